//! Out-of-sample simulation of hiring decisions, the expected-value
//! problem, the EVP versus stochastic comparison and one-factor
//! sensitivity sweeps.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Contract, HiringDecision, PatientClass, ProblemInstance, Scenario};
use crate::error::{Error, Result};
use crate::eval::cost_plan;
use crate::exact::{solve_plan, solve_saa_exact_with};
use crate::hestof::construct_plan;
use crate::model::Problem;
use crate::report::num;
use crate::scenario::{expected_scenario, sample_batch_with};
use crate::tabu::{run_ts, run_ts_with, TsParams};

pub const SIMULATE_PURPOSE: &str = "simulate";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimOptions {
    /// Solve each scenario exactly when it fits the exact solver's guards.
    pub exact_within_guards: bool,
    /// Count a patient as served only if they wait at most this many
    /// periods. `None` counts every patient who gets an interpreter.
    pub service_threshold: Option<u32>,
    pub policy: crate::hestof::SelectionPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub fixed: f64,
    pub variable: f64,
    pub overtime: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationStats {
    pub n_scenarios: usize,
    pub mean_total: f64,
    pub std_total: f64,
    /// Mean wait per patient in periods; unserved patients count with
    /// their end-of-horizon wait.
    pub mean_wait: f64,
    pub service_level_emergency: f64,
    pub service_level_outpatient: f64,
    pub cost_breakdown_means: CostBreakdown,
    pub hired_count_per_language_set: BTreeMap<String, usize>,
}

#[derive(Default)]
struct Tally {
    total: f64,
    costs: CostBreakdown,
    wait_sum: f64,
    patients: usize,
    // (served, demand) per class
    emergency: (usize, usize),
    outpatient: (usize, usize),
}

fn simulate_one(p: &Problem, bits: &[bool], opts: &SimOptions) -> Tally {
    let limits = crate::exact::ExactLimits::default();
    let plan = if opts.exact_within_guards && p.jobs.len() <= limits.max_patients && p.horizon <= limits.max_horizon
    {
        solve_plan(p, bits).0
    } else {
        construct_plan(p, bits, opts.policy)
    };
    let c = cost_plan(p, bits, &plan);
    let mut t = Tally {
        total: c.total(),
        costs: CostBreakdown {
            fixed: c.fixed,
            variable: c.variable,
            overtime: c.overtime,
            penalty: c.penalty,
        },
        wait_sum: c.waits.iter().sum(),
        patients: c.waits.len(),
        ..Default::default()
    };
    for (j, slot) in plan.iter().enumerate() {
        let served = slot.is_some() && opts.service_threshold.is_none_or(|k| c.waits[j] <= k as f64);
        let cell = match p.jobs[j].class {
            PatientClass::Emergency => &mut t.emergency,
            _ => &mut t.outpatient,
        };
        cell.0 += usize::from(served);
        cell.1 += 1;
    }
    t
}

fn level((served, demand): (usize, usize)) -> f64 {
    if demand == 0 {
        1.0
    } else {
        served as f64 / demand as f64
    }
}

/// Statistics of `w` on a given scenario batch (equal weights).
pub fn simulate_on(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenarios: &[Scenario],
    opts: &SimOptions,
) -> Result<SimulationStats> {
    if scenarios.is_empty() {
        return Err(Error::validation("n", "at least one scenario is required"));
    }
    let problems = scenarios
        .iter()
        .map(|s| Problem::new(instance, w, s))
        .collect::<Result<Vec<_>>>()?;
    let tallies: Vec<Tally> = problems.par_iter().map(|p| simulate_one(p, &w.bits, opts)).collect();
    let n = tallies.len() as f64;
    let mean_total = tallies.iter().map(|t| t.total).sum::<f64>() / n;
    let std_total = if tallies.len() > 1 {
        (tallies.iter().map(|t| (t.total - mean_total).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut costs = CostBreakdown::default();
    let (mut wait_sum, mut patients) = (0.0, 0);
    let (mut em, mut op) = ((0, 0), (0, 0));
    for t in &tallies {
        costs.fixed += t.costs.fixed / n;
        costs.variable += t.costs.variable / n;
        costs.overtime += t.costs.overtime / n;
        costs.penalty += t.costs.penalty / n;
        wait_sum += t.wait_sum;
        patients += t.patients;
        em = (em.0 + t.emergency.0, em.1 + t.emergency.1);
        op = (op.0 + t.outpatient.0, op.1 + t.outpatient.1);
    }
    Ok(SimulationStats {
        n_scenarios: tallies.len(),
        mean_total,
        std_total,
        mean_wait: if patients == 0 { 0.0 } else { wait_sum / patients as f64 },
        service_level_emergency: level(em),
        service_level_outpatient: level(op),
        cost_breakdown_means: costs,
        hired_count_per_language_set: w.group_counts(),
    })
}

/// Simulates `w` on `n` fresh scenarios drawn from `master_seed`.
pub fn simulate(instance: &ProblemInstance, w: &HiringDecision, n: usize, master_seed: u64) -> Result<SimulationStats> {
    simulate_with(instance, w, n, master_seed, &SimOptions::default())
}

pub fn simulate_with(
    instance: &ProblemInstance,
    w: &HiringDecision,
    n: usize,
    master_seed: u64,
    opts: &SimOptions,
) -> Result<SimulationStats> {
    if n < 1 {
        return Err(Error::validation("n", "at least one scenario is required"));
    }
    let scenarios = sample_batch_with(instance, n, master_seed, SIMULATE_PURPOSE)?;
    simulate_on(instance, w, &scenarios, opts)
}

/// Hiring decision of the expected-value problem: every random quantity
/// replaced by its mean, solved exactly when small enough and by tabu
/// search on that single scenario otherwise.
pub fn solve_evp(instance: &ProblemInstance, params: &TsParams) -> Result<HiringDecision> {
    let sc = vec![expected_scenario(instance)];
    if params.exact_limits.admits(instance, &sc) {
        return Ok(solve_saa_exact_with(instance, &sc, &params.exact_limits)?.hiring);
    }
    let p = TsParams {
        fitness_sample_size: 1,
        ..params.clone()
    };
    Ok(run_ts_with(instance, &p, &sc, Some(&sc), None)?.hiring)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub solution: String,
    pub hiring: HiringDecision,
    pub stats: SimulationStats,
}

/// EVP and tabu-search decisions, each simulated on the same `n`
/// scenarios.
pub fn compare(
    instance: &ProblemInstance,
    params: &TsParams,
    n: usize,
    master_seed: u64,
    opts: &SimOptions,
) -> Result<Vec<ComparisonRow>> {
    let evp = solve_evp(instance, params)?;
    let ts = run_ts(instance, params)?.hiring;
    let scenarios = sample_batch_with(instance, n, master_seed, SIMULATE_PURPOSE)?;
    [("EVP", evp), ("TS", ts)]
        .into_iter()
        .map(|(name, w)| {
            Ok(ComparisonRow {
                solution: name.to_owned(),
                stats: simulate_on(instance, &w, &scenarios, opts)?,
                hiring: w,
            })
        })
        .collect()
}

/// Relative cost reduction of `b` against `a`, in percent of `a`.
pub fn relative_reduction(a: &SimulationStats, b: &SimulationStats) -> f64 {
    100.0 * (a.mean_total - b.mean_total) / a.mean_total
}

const STAT_COLUMNS: [&str; 9] = [
    "mean_total",
    "std",
    "mean_wait",
    "sl_emergency",
    "sl_outpatient",
    "fixed",
    "variable",
    "overtime",
    "penalty",
];

fn stat_fields(s: &SimulationStats) -> Vec<String> {
    let c = &s.cost_breakdown_means;
    [
        s.mean_total,
        s.std_total,
        s.mean_wait,
        s.service_level_emergency,
        s.service_level_outpatient,
        c.fixed,
        c.variable,
        c.overtime,
        c.penalty,
    ]
    .iter()
    .map(|&x| num(x))
    .collect()
}

pub fn write_comparison_csv<W: Write>(out: W, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["solution"];
    header.extend(STAT_COLUMNS);
    header.push("w");
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.solution.clone()];
        rec.extend(stat_fields(&r.stats));
        rec.push(r.hiring.bit_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitivityParameter {
    OvertimeRate,
    PartTimeFixed,
    PartTimeVariable,
    WaitPenalty,
    EmergencyRate,
}

impl SensitivityParameter {
    pub const ALL: [SensitivityParameter; 5] = [
        SensitivityParameter::OvertimeRate,
        SensitivityParameter::PartTimeFixed,
        SensitivityParameter::PartTimeVariable,
        SensitivityParameter::WaitPenalty,
        SensitivityParameter::EmergencyRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SensitivityParameter::OvertimeRate => "overtime-rate",
            SensitivityParameter::PartTimeFixed => "part-time-fixed",
            SensitivityParameter::PartTimeVariable => "part-time-variable",
            SensitivityParameter::WaitPenalty => "wait-penalty",
            SensitivityParameter::EmergencyRate => "emergency-rate",
        }
    }

    /// Copy of `instance` with every field of this parameter multiplied by
    /// `factor`.
    pub fn scale(self, instance: &ProblemInstance, factor: f64) -> ProblemInstance {
        let mut out = instance.clone();
        match self {
            SensitivityParameter::OvertimeRate => {
                for i in &mut out.interpreters {
                    if let Contract::FullTime { overtime_rate, .. } = &mut i.contract {
                        *overtime_rate *= factor;
                    }
                }
            }
            SensitivityParameter::PartTimeFixed => {
                for i in &mut out.interpreters {
                    if let Contract::PartTime { fixed_cost, .. } = &mut i.contract {
                        *fixed_cost *= factor;
                    }
                }
            }
            SensitivityParameter::PartTimeVariable => {
                for i in &mut out.interpreters {
                    if let Contract::PartTime { variable_rate, .. } = &mut i.contract {
                        *variable_rate *= factor;
                    }
                }
            }
            SensitivityParameter::WaitPenalty => {
                for p in out.outpatients.iter_mut().chain(out.inpatients.iter_mut()) {
                    p.penalty_rate *= factor;
                }
                out.penalties.emergency *= factor;
            }
            SensitivityParameter::EmergencyRate => {
                for r in out.arrival_rates.values_mut() {
                    *r *= factor;
                }
            }
        }
        out
    }
}

impl FromStr for SensitivityParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::validation("parameter", format!("unknown sensitivity parameter `{s}`")))
    }
}

/// Experiment factors: the base case, then 20% steps up to double.
pub const FACTORS: [f64; 6] = [1.0, 1.2, 1.4, 1.6, 1.8, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub experiment: usize,
    pub factor: f64,
    pub hiring: HiringDecision,
    pub stats: SimulationStats,
}

/// One row per factor. Every experiment reuses the same tabu-search and
/// simulation seeds, so rows differ only through the scaled parameter.
pub fn sensitivity_sweep(
    instance: &ProblemInstance,
    parameter: SensitivityParameter,
    params: &TsParams,
    n_sim: usize,
    sim_seed: u64,
) -> Result<Vec<SensitivityRow>> {
    FACTORS
        .par_iter()
        .enumerate()
        .map(|(k, &factor)| {
            let scaled = parameter.scale(instance, factor);
            let w = run_ts(&scaled, params)?.hiring;
            let stats = simulate(&scaled, &w, n_sim, sim_seed)?;
            Ok(SensitivityRow {
                experiment: k + 1,
                factor,
                hiring: w,
                stats,
            })
        })
        .collect()
}

pub fn write_sensitivity_csv<W: Write>(out: W, rows: &[SensitivityRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let labels: Vec<String> = rows
        .first()
        .map(|r| r.hiring.groups.iter().map(|g| g.label()).collect())
        .unwrap_or_default();
    let mut header = vec!["experiment".to_owned(), "factor".to_owned()];
    header.extend(STAT_COLUMNS.iter().map(|s| s.to_string()));
    header.push("hired_total".into());
    header.extend(labels.iter().map(|l| format!("hired_{l}")));
    header.push("w".into());
    w.write_record(&header)?;
    for r in rows {
        let counts = r.hiring.group_counts();
        let mut rec = vec![r.experiment.to_string(), format!("{:.1}", r.factor)];
        rec.extend(stat_fields(&r.stats));
        rec.push(r.hiring.hired_count().to_string());
        rec.extend(labels.iter().map(|l| counts.get(l).copied().unwrap_or(0).to_string()));
        rec.push(r.hiring.bit_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
