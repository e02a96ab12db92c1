//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! its measured value and tolerance. Exits non-zero if a gated check fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use lepsched::domain::group_part_timers;
use lepsched::eval::{check_batch, second_stage_cost};
use lepsched::evaluation::{relative_reduction, sensitivity_sweep, simulate, solve_evp, SensitivityParameter};
use lepsched::exact::{solve_saa_exact, solve_second_stage_exact};
use lepsched::family::FixtureFamily;
use lepsched::fixtures::{base_case, reduced};
use lepsched::hestof::construct_schedule;
use lepsched::rng::stream;
use lepsched::saa::{gap_confidence_interval, run_saa, SaaParams};
use lepsched::scenario::sample_batch;
use lepsched::tabu::{run_ts, write_trace_csv, TsParams};
use lepsched::{ProblemInstance, Result};
use rand::seq::IndexedRandom;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

type Check<'a> = Box<dyn Fn() -> Result<Outcome> + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
    /// Reported but does not change the exit status.
    advisory: bool,
}

fn gated(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail, advisory: false }
}

fn family() -> FixtureFamily {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/family.json");
    FixtureFamily::load(path).expect("fixtures/family.json")
}

fn table_arithmetic() -> Result<Outcome> {
    let ci = gap_confidence_interval(258.37, 40.85, 657.17, 0.95);
    let tol = 0.01;
    let pass = (ci.gap_pct - 39.31).abs() <= tol
        && (ci.ci_low - 178.30).abs() <= tol
        && (ci.ci_high - 338.44).abs() <= tol;
    Ok(gated(
        pass,
        format!(
            "gap_pct {:.4} ci ({:.4}, {:.4}) vs 39.31 (178.30, 338.44) tol {tol}",
            ci.gap_pct, ci.ci_low, ci.ci_high
        ),
    ))
}

fn oracle_equivalence() -> Result<Outcome> {
    let fam = family();
    let mut mismatches = 0;
    for m in &fam.members {
        let (_, v) = solve_saa_exact(&m.instance, &m.scenarios)?;
        if v != m.optimum.objective {
            mismatches += 1;
        }
    }
    Ok(gated(
        mismatches == 0,
        format!("{} of {} members match brute force, tol 0", fam.members.len() - mismatches, fam.members.len()),
    ))
}

fn greedy_dominance() -> Result<Outcome> {
    let fam = family();
    let mut rng = stream(1, "acceptance-pairs", 0);
    let (mut below, mut equal) = (0, 0);
    let pairs = 200;
    for i in 0..pairs {
        let m = &fam.members[i % fam.members.len()];
        let layout = group_part_timers(&m.instance);
        let w = layout.with_bits((0..layout.len()).map(|_| rng.random_bool(0.5)).collect())?;
        let sc = m.scenarios.choose(&mut rng).expect("member has scenarios");
        let h = construct_schedule(&m.instance, &w, sc)?;
        let c = second_stage_cost(&m.instance, &w, sc, &h)?;
        let greedy = c.variable_cost + c.overtime_cost + c.penalty_cost;
        let (_, exact) = solve_second_stage_exact(&m.instance, &w, sc)?;
        if greedy < exact - 1e-9 {
            below += 1;
        }
        if (greedy - exact).abs() <= 1e-9 {
            equal += 1;
        }
    }
    let share = equal as f64 / pairs as f64;
    Ok(gated(
        below == 0 && share >= 0.6,
        format!("{below} pairs below exact, equal in {:.1}% of {pairs} (floor 60%)", 100.0 * share),
    ))
}

fn feasibility(base: &ProblemInstance) -> Result<Outcome> {
    let w = run_ts(base, &TsParams::default())?.hiring;
    let scenarios = sample_batch(base, 1000, 4)?;
    let schedules = scenarios
        .iter()
        .map(|sc| construct_schedule(base, &w, sc))
        .collect::<Result<Vec<_>>>()?;
    let v = check_batch(base, &w, &scenarios, &schedules)?;
    Ok(gated(v.is_empty(), format!("{} violations over 1000 scenarios, w {}", v.len(), w.bit_string())))
}

fn beats_evp(base: &ProblemInstance) -> Result<Outcome> {
    let p = TsParams::default();
    let evp = solve_evp(base, &p)?;
    let ts = run_ts(base, &p)?.hiring;
    let a = simulate(base, &evp, 500, 11)?;
    let b = simulate(base, &ts, 500, 11)?;
    let r = relative_reduction(&a, &b);
    Ok(gated(
        b.mean_total <= a.mean_total && r >= 5.0,
        format!(
            "EVP {:.2} vs TS {:.2}, reduction {r:.2}% (floor 5%), emergency service {:.2}% vs {:.2}%",
            a.mean_total,
            b.mean_total,
            100.0 * a.service_level_emergency,
            100.0 * b.service_level_emergency
        ),
    ))
}

fn saa_convergence() -> Result<Outcome> {
    let inst = reduced();
    let mut narrower = 0;
    let mut widths = Vec::new();
    for seed in 1..=5 {
        let width = |s: usize| -> Result<f64> {
            let p = SaaParams {
                samples: s,
                replications: 3,
                eval_samples: 200,
                master_seed: seed,
                ..SaaParams::default()
            };
            let r = run_saa(&inst, &p)?;
            Ok(r.ci_high - r.ci_low)
        };
        let w = [width(2)?, width(5)?, width(10)?];
        if w[2] < w[0] {
            narrower += 1;
        }
        widths.push(format!("{:.1}/{:.1}/{:.1}", w[0], w[1], w[2]));
    }
    Ok(Outcome {
        pass: narrower >= 4,
        detail: format!(
            "width at S=10 below S=2 for {narrower} of 5 seeds (need 4), widths S=2/5/10: {}",
            widths.join(" ")
        ),
        advisory: true,
    })
}

fn ts_determinism(base: &ProblemInstance) -> Result<Outcome> {
    let mut ok = true;
    for seed in 1..=5 {
        let p = TsParams {
            master_seed: seed,
            ..TsParams::default()
        };
        let mut traces = Vec::new();
        for _ in 0..2 {
            let r = run_ts(base, &p)?;
            ok &= r.trace.windows(2).all(|t| t[1].best_fitness <= t[0].best_fitness);
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &r.trace)?;
            traces.push(buf);
        }
        ok &= traces[0] == traces[1];
    }
    Ok(gated(ok, "5 seeds, byte-identical traces and non-increasing best".into()))
}

fn rounded_normal_mean(mean: f64, sd: f64, horizon: u32) -> f64 {
    let n = Normal::new(mean, sd).expect("valid normal");
    (1..=horizon)
        .map(|d| {
            let lo = if d == 1 { 0.0 } else { n.cdf(d as f64 - 0.5) };
            let hi = if d == horizon { 1.0 } else { n.cdf(d as f64 + 0.5) };
            d as f64 * (hi - lo)
        })
        .sum()
}

fn generator_statistics(base: &ProblemInstance) -> Result<Outcome> {
    let n = 20_000;
    let batch = sample_batch(base, n, 8)?;
    let t = base.horizon;
    let mut worst: f64 = 0.0;
    for (lang, &rate) in &base.arrival_rates {
        let count = batch
            .iter()
            .flat_map(|s| &s.emergency_patients)
            .filter(|e| &e.language == lang)
            .count();
        let per_period = count as f64 / (n as f64 * t as f64);
        worst = worst.max((per_period - rate).abs() / rate);
    }
    let durations: Vec<u32> = batch.iter().flat_map(|s| s.outpatient_durations.values().copied()).collect();
    let in_support = durations.iter().all(|&d| (1..=t).contains(&d));
    let empirical = durations.iter().map(|&d| d as f64).sum::<f64>() / durations.len() as f64;
    let op = base.durations.outpatient;
    let oracle = rounded_normal_mean(op.mean, op.spread, t);
    let dev = (empirical - oracle).abs() / oracle;
    Ok(gated(
        worst <= 0.03 && dev <= 0.05 && in_support,
        format!(
            "worst arrival-rate error {:.2}% (tol 3%), outpatient mean {empirical:.3} vs {oracle:.3} ({:.2}%, tol 5%), support ok {in_support}",
            100.0 * worst,
            100.0 * dev
        ),
    ))
}

fn sensitivity_shape(base: &ProblemInstance) -> Result<Outcome> {
    let p = TsParams {
        iterations: 10,
        fitness_sample_size: 20,
        ..TsParams::default()
    };
    let mut ok = true;
    for param in SensitivityParameter::ALL {
        let rows = sensitivity_sweep(base, param, &p, 100, 1)?;
        ok &= rows.len() == 6;
        ok &= rows
            .iter()
            .enumerate()
            .all(|(k, r)| (r.factor - (1.0 + 0.2 * k as f64)).abs() < 1e-9);
        ok &= rows
            .iter()
            .all(|r| r.stats.hired_count_per_language_set.values().sum::<usize>() == r.hiring.hired_count());
    }
    Ok(gated(ok, format!("{} parameters x 6 factors, quick mode", SensitivityParameter::ALL.len())))
}

fn main() -> ExitCode {
    let base = base_case().simplify().expect("base case simplifies");
    let checks: Vec<(&str, Check)> = vec![
        ("1 gap interval arithmetic", Box::new(table_arithmetic)),
        ("2 exact solver vs brute force", Box::new(oracle_equivalence)),
        ("3 greedy dominance", Box::new(greedy_dominance)),
        ("4 feasibility on base case", Box::new(|| feasibility(&base))),
        ("5 stochastic beats EVP", Box::new(|| beats_evp(&base))),
        ("6 SAA interval narrows with S", Box::new(saa_convergence)),
        ("7 TS determinism and monotone best", Box::new(|| ts_determinism(&base))),
        ("8 scenario generator statistics", Box::new(|| generator_statistics(&base))),
        ("9 sensitivity harness shape", Box::new(|| sensitivity_shape(&base))),
    ];
    let mut failed = false;
    for (name, check) in checks {
        let start = Instant::now();
        let (status, detail, blocking) = match check() {
            Ok(o) => (if o.pass { "PASS" } else { "FAIL" }, o.detail, !o.pass && !o.advisory),
            Err(e) => ("FAIL", format!("error: {e}"), true),
        };
        let note = if status == "FAIL" && !blocking { " [reported, not gating]" } else { "" };
        println!("{status} criterion {name}: {detail} ({:.1}s){note}", start.elapsed().as_secs_f64());
        failed |= blocking;
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
