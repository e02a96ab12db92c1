use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lepsched::base_case::make_base_instance;
use lepsched::domain::group_part_timers;
use lepsched::eval::{check_batch, tally, total_objective, write_violations_csv};
use lepsched::evaluation::{
    compare, sensitivity_sweep, simulate_with, solve_evp, write_comparison_csv, write_sensitivity_csv,
    SensitivityParameter, SimOptions,
};
use lepsched::exact::{solve_saa_exact_with, ExactLimits};
use lepsched::family::{generate_fixture_family, FamilyLimits, FAMILY_SEED};
use lepsched::fixtures::{reduced, t1};
use lepsched::hestof::{construct_schedule_with, SelectionPolicy};
use lepsched::report::{write_json, SolutionFile};
use lepsched::saa::{run_saa, write_summary_csv, InnerSolver, SaaParams};
use lepsched::scenario::{expected_scenario, ScenarioBatch};
use lepsched::tabu::{fitness_scenarios, run_ts, write_trace_csv, TsParams};
use lepsched::{Error, HiringDecision, ProblemInstance, Result, Scenario, Schedule};

/// Interpreter hiring and scheduling under uncertain emergency arrivals.
#[derive(Parser, Debug)]
#[command(name = "lepsched", version)]
struct Cli {
    /// Instance file (JSON).
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a canonical instance (base case by default).
    GenInstance {
        #[arg(long, value_enum, default_value = "base")]
        kind: InstanceKind,
        /// Same as `--kind base`.
        #[arg(long)]
        base: bool,
    },
    /// Write the exhaustive fixture family with brute-force optima.
    GenFamily {
        #[arg(long, default_value_t = FAMILY_SEED)]
        family_seed: u64,
    },
    /// Sample a scenario batch.
    GenScenarios {
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Solve the sampled problem exactly (small instances only).
    SolveExact {
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Use this stored scenario batch instead of sampling.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        max_patients: usize,
        #[arg(long = "max-parttimers", default_value_t = 12)]
        max_part_timers: usize,
    },
    /// Sample average approximation with gap estimate.
    SolveSaa {
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        replications: usize,
        #[arg(long, default_value_t = 500)]
        eval_samples: usize,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long, value_enum, default_value = "exact")]
        inner: Inner,
        #[command(flatten)]
        ts: TsArgs,
    },
    /// Tabu search over hiring decisions.
    SolveTs {
        #[command(flatten)]
        ts: TsArgs,
    },
    /// Expected-value problem.
    SolveEvp {
        #[command(flatten)]
        ts: TsArgs,
    },
    /// Simulate a stored solution's hiring decision.
    Evaluate {
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// EVP versus tabu search, simulated on common scenarios.
    Compare {
        #[command(flatten)]
        ts: TsArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// One-factor sensitivity experiments at factors 1.0 to 2.0.
    Sensitivity {
        /// Parameter name, or `all`.
        #[arg(long, default_value = "all")]
        parameter: String,
        /// Reduced tabu-search and simulation effort.
        #[arg(long)]
        quick: bool,
        #[command(flatten)]
        ts: TsArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Check a stored solution against every constraint.
    Check {
        #[arg(long)]
        solution: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum InstanceKind {
    Base,
    T1,
    Reduced,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Inner {
    Exact,
    Ts,
}

#[derive(Args, Debug, Clone)]
struct TsArgs {
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 30)]
    tabu_len: usize,
    #[arg(long, default_value_t = 0.05)]
    div_prob: f64,
    #[arg(long, default_value_t = 20)]
    neighbors: usize,
    #[arg(long, default_value_t = 50)]
    fitness_scenarios: usize,
    #[arg(long, default_value_t = 5)]
    init_scenarios: usize,
    /// Also try every single-bit flip (changes hire counts).
    #[arg(long)]
    bit_flips: bool,
    /// Pick the waiting patient with the lowest accrued penalty instead.
    #[arg(long)]
    min_penalty_policy: bool,
}

impl TsArgs {
    fn params(&self, seed: u64) -> TsParams {
        TsParams {
            iterations: self.iterations,
            tabu_length: self.tabu_len,
            diversification_prob: self.div_prob,
            neighborhood_size: self.neighbors,
            fitness_sample_size: self.fitness_scenarios,
            init_sample_size: self.init_scenarios,
            master_seed: seed,
            policy: self.policy(),
            bit_flip_moves: self.bit_flips,
            exact_limits: ExactLimits::default(),
        }
    }

    fn policy(&self) -> SelectionPolicy {
        if self.min_penalty_policy {
            SelectionPolicy::MinImmediatePenalty
        } else {
            SelectionPolicy::MaxAccruedPenalty
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    /// Number of simulated scenarios.
    #[arg(long, default_value_t = 500)]
    count: usize,
    /// Solve each simulated scenario exactly when it is small enough.
    #[arg(long)]
    exact: bool,
    /// Count a patient as served only within this many periods of waiting.
    #[arg(long)]
    service_threshold: Option<u32>,
}

impl SimArgs {
    fn options(&self) -> SimOptions {
        SimOptions {
            exact_within_guards: self.exact,
            service_threshold: self.service_threshold,
            policy: SelectionPolicy::default(),
        }
    }
}

fn load_instance(path: &Option<PathBuf>) -> Result<ProblemInstance> {
    let path = path
        .as_ref()
        .ok_or_else(|| Error::validation("--instance", "an instance file is required"))?;
    let raw = ProblemInstance::load(path)?;
    raw.simplify()
}

fn out_file(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

fn greedy_schedules(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenarios: &[Scenario],
    policy: SelectionPolicy,
) -> Result<Vec<Schedule>> {
    scenarios
        .iter()
        .map(|s| construct_schedule_with(instance, w, s, policy))
        .collect()
}

fn save_greedy_solution(
    cli: &Cli,
    instance: &ProblemInstance,
    solver: &str,
    w: HiringDecision,
    scenarios: Vec<Scenario>,
    policy: SelectionPolicy,
) -> Result<f64> {
    let schedules = greedy_schedules(instance, &w, &scenarios, policy)?;
    let objective = total_objective(instance, &w, &scenarios, &schedules)?;
    SolutionFile::new(solver, cli.seed, w, objective, scenarios, schedules)
        .save(out_file(&cli.out, "solution.json")?)?;
    Ok(objective)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenInstance { kind, base } => {
            let kind = if *base { InstanceKind::Base } else { *kind };
            let (name, instance) = match kind {
                InstanceKind::Base => ("base_case.json", make_base_instance(cli.seed)),
                InstanceKind::T1 => ("t1.json", t1()),
                InstanceKind::Reduced => ("reduced.json", reduced()),
            };
            let path = out_file(&cli.out, name)?;
            instance.save(&path)?;
            println!("wrote {}", path.display());
        }
        Command::GenFamily { family_seed } => {
            let family = generate_fixture_family(&FamilyLimits::default(), *family_seed)?;
            let path = out_file(&cli.out, "family.json")?;
            family.save(&path)?;
            println!("wrote {} ({} members)", path.display(), family.members.len());
        }
        Command::GenScenarios { count } => {
            let instance = load_instance(&cli.instance)?;
            let batch = ScenarioBatch::sample(&instance, *count, cli.seed)?;
            let path = out_file(&cli.out, "scenarios.json")?;
            batch.save(&path)?;
            println!("wrote {}", path.display());
        }
        Command::SolveExact {
            count,
            scenarios,
            max_patients,
            max_part_timers,
        } => {
            let instance = load_instance(&cli.instance)?;
            let limits = ExactLimits {
                max_patients: *max_patients,
                max_part_timers: *max_part_timers,
                ..ExactLimits::default()
            };
            limits.check_hiring(&instance)?;
            let batch = match scenarios {
                Some(p) => ScenarioBatch::load(p)?.scenarios,
                None => ScenarioBatch::sample(&instance, *count, cli.seed)?.scenarios,
            };
            let sol = solve_saa_exact_with(&instance, &batch, &limits)?;
            println!("w = {}  objective = {:.6}", sol.hiring.bit_string(), sol.objective);
            SolutionFile::new("exact", cli.seed, sol.hiring, sol.objective, batch, sol.schedules)
                .save(out_file(&cli.out, "solution.json")?)?;
        }
        Command::SolveSaa {
            samples,
            replications,
            eval_samples,
            confidence,
            inner,
            ts,
        } => {
            let instance = load_instance(&cli.instance)?;
            let params = SaaParams {
                samples: *samples,
                replications: *replications,
                eval_samples: *eval_samples,
                confidence: *confidence,
                master_seed: cli.seed,
                inner: match inner {
                    Inner::Exact => InnerSolver::Exact,
                    Inner::Ts => InnerSolver::Ts(ts.params(cli.seed)),
                },
                exact_limits: ExactLimits::default(),
            };
            let report = run_saa(&instance, &params)?;
            write_json(out_file(&cli.out, "saa_report.json")?, &report)?;
            write_summary_csv(fs::File::create(out_file(&cli.out, "saa_summary.csv")?)?, std::slice::from_ref(&report))?;
            println!(
                "LB {:.2} ({:.2})  UB {:.2} ({:.2})  gap {:.2} [{:.2}, {:.2}]  w = {}",
                report.lb_mean,
                report.sigma_lb,
                report.ub,
                report.sigma_ub,
                report.gap,
                report.ci_low,
                report.ci_high,
                report.best().bit_string()
            );
            if report.negative_gap_flag {
                println!("warning: gap is below minus twice its standard deviation");
            }
        }
        Command::SolveTs { ts } => {
            let instance = load_instance(&cli.instance)?;
            let params = ts.params(cli.seed);
            let r = run_ts(&instance, &params)?;
            write_trace_csv(fs::File::create(out_file(&cli.out, "trace.csv")?)?, &r.trace)?;
            let batch = fitness_scenarios(&instance, &params)?;
            println!("w = {}  fitness = {:.6}", r.hiring.bit_string(), r.best_fitness);
            save_greedy_solution(cli, &instance, "ts", r.hiring, batch, params.policy)?;
        }
        Command::SolveEvp { ts } => {
            let instance = load_instance(&cli.instance)?;
            let params = ts.params(cli.seed);
            let w = solve_evp(&instance, &params)?;
            let sc = vec![expected_scenario(&instance)];
            let objective = save_greedy_solution(cli, &instance, "evp", w.clone(), sc, params.policy)?;
            println!("w = {}  expected-scenario cost = {:.6}", w.bit_string(), objective);
        }
        Command::Evaluate { solution, sim } => {
            let instance = load_instance(&cli.instance)?;
            let sol = SolutionFile::load(solution)?;
            let layout = group_part_timers(&instance);
            let w = layout.with_bits(sol.hiring.bits.clone())?;
            let stats = simulate_with(&instance, &w, sim.count, cli.seed, &sim.options())?;
            write_json(out_file(&cli.out, "evaluation.json")?, &stats)?;
            println!(
                "mean {:.2}  std {:.2}  wait {:.3}  SL emergency {:.4}  SL outpatient {:.4}",
                stats.mean_total,
                stats.std_total,
                stats.mean_wait,
                stats.service_level_emergency,
                stats.service_level_outpatient
            );
        }
        Command::Compare { ts, sim } => {
            let instance = load_instance(&cli.instance)?;
            let rows = compare(&instance, &ts.params(cli.seed), sim.count, cli.seed, &sim.options())?;
            write_comparison_csv(fs::File::create(out_file(&cli.out, "comparison.csv")?)?, &rows)?;
            for r in &rows {
                println!("{:<4} mean {:.2}  w = {}", r.solution, r.stats.mean_total, r.hiring.bit_string());
            }
        }
        Command::Sensitivity {
            parameter,
            quick,
            ts,
            sim,
        } => {
            let instance = load_instance(&cli.instance)?;
            let parameters: Vec<SensitivityParameter> = if parameter == "all" {
                SensitivityParameter::ALL.to_vec()
            } else {
                vec![parameter.parse()?]
            };
            let mut params = ts.params(cli.seed);
            let mut n_sim = sim.count;
            if *quick {
                params.iterations = params.iterations.min(10);
                params.fitness_sample_size = params.fitness_sample_size.min(20);
                n_sim = n_sim.min(100);
            }
            for p in parameters {
                let rows = sensitivity_sweep(&instance, p, &params, n_sim, cli.seed)?;
                let name = format!("sensitivity_{}.csv", p.name().replace('-', "_"));
                write_sensitivity_csv(fs::File::create(out_file(&cli.out, &name)?)?, &rows)?;
                println!("wrote {name}");
            }
        }
        Command::Check { solution } => {
            let instance = load_instance(&cli.instance)?;
            let sol = SolutionFile::load(solution)?;
            let layout = group_part_timers(&instance);
            let w = layout.with_bits(sol.hiring.bits.clone())?;
            let violations = check_batch(&instance, &w, &sol.scenarios, &sol.schedules)?;
            write_violations_csv(fs::File::create(out_file(&cli.out, "violations.csv")?)?, &violations)?;
            if violations.is_empty() {
                println!("0 violations");
            } else {
                for (family, n) in tally(&violations) {
                    println!("{family}: {n}");
                }
                return Err(Error::validation(
                    "solution",
                    format!("{} constraint violations", violations.len()),
                ));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_size_guard() { 2 } else { 1 })
        }
    }
}
