//! Sample average approximation with statistical bounds.
//!
//! `M` independent replications each solve a sampled problem of `S`
//! scenarios. The mean of their optima estimates a lower bound on the true
//! optimum; each candidate decision is re-evaluated on a larger common batch
//! of `S'` scenarios for an upper-bound estimate. The best candidate's gap
//! comes with a normal confidence interval.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::domain::{HiringDecision, ProblemInstance, Scenario, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::eval::cost_plan;
use crate::exact::{solve_plan, solve_saa_exact_with, ExactLimits};
use crate::hestof::construct_plan;
use crate::model::Problem;
use crate::report::num;
use crate::scenario::sample_batch_with;
use crate::tabu::{run_ts_with, TsParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InnerSolver {
    Exact,
    /// Tabu search; its fitness batch is the replication's sample, so
    /// `fitness_sample_size` is ignored.
    Ts(TsParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaaParams {
    pub samples: usize,
    pub replications: usize,
    pub eval_samples: usize,
    pub confidence: f64,
    pub master_seed: u64,
    pub inner: InnerSolver,
    #[serde(default)]
    pub exact_limits: ExactLimits,
}

impl Default for SaaParams {
    fn default() -> Self {
        SaaParams {
            samples: 5,
            replications: 5,
            eval_samples: 500,
            confidence: 0.95,
            master_seed: 1,
            inner: InnerSolver::Exact,
            exact_limits: ExactLimits::default(),
        }
    }
}

impl SaaParams {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::validation("samples", "S must be at least 1"));
        }
        if self.replications < 2 {
            return Err(Error::validation("replications", "M must be at least 2"));
        }
        if self.eval_samples <= self.samples {
            return Err(Error::validation("eval_samples", "S' must exceed S"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::validation("confidence", "must lie strictly between 0 and 1"));
        }
        Ok(())
    }
}

/// Two-sided standard normal quantile for `confidence`.
pub fn z_value(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + confidence / 2.0)
}

/// Sample mean and standard error `sqrt(sum (x - mean)^2 / ((n - 1) n))`.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, (ss / ((n - 1.0) * n)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapInterval {
    pub z: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub gap_pct: f64,
}

/// `gap ± z · sigma_gap` and the gap as a percentage of the lower bound.
pub fn gap_confidence_interval(gap: f64, sigma_gap: f64, lb_mean: f64, confidence: f64) -> GapInterval {
    let z = z_value(confidence);
    GapInterval {
        z,
        ci_low: gap - z * sigma_gap,
        ci_high: gap + z * sigma_gap,
        gap_pct: 100.0 * gap / lb_mean,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub hiring: HiringDecision,
    /// Optimum of the replication's sampled problem.
    pub objective: f64,
    /// Estimated true objective of `hiring` on the evaluation batch.
    pub g_hat: f64,
    pub sigma_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaaReport {
    pub schema_version: u32,
    pub samples: usize,
    pub eval_samples: usize,
    pub replications: usize,
    pub confidence: f64,
    pub master_seed: u64,
    pub inner: String,
    pub per_replication: Vec<Replication>,
    pub lb_mean: f64,
    pub sigma_lb: f64,
    pub m_star: usize,
    pub ub: f64,
    pub sigma_ub: f64,
    pub gap: f64,
    pub gap_pct: f64,
    pub sigma_gap: f64,
    pub z: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Set when the gap is below minus twice its standard deviation.
    pub negative_gap_flag: bool,
    /// Evaluation-batch scenarios solved exactly versus greedily.
    pub eval_exact: usize,
    pub eval_greedy: usize,
}

impl SaaReport {
    pub fn best(&self) -> &HiringDecision {
        &self.per_replication[self.m_star].hiring
    }
}

fn replication_purpose(m: usize) -> String {
    format!("saa/replication/{m}")
}

const EVAL_PURPOSE: &str = "saa/evaluation";

/// Per-scenario totals of `bits` on the evaluation problems: exact where
/// the scenario fits the guards, greedy otherwise.
fn evaluate(problems: &[(Problem, bool)], bits: &[bool]) -> Vec<f64> {
    problems
        .par_iter()
        .map(|(p, exact)| {
            let plan = if *exact {
                solve_plan(p, bits).0
            } else {
                construct_plan(p, bits, Default::default())
            };
            cost_plan(p, bits, &plan).total()
        })
        .collect()
}

pub fn run_saa(instance: &ProblemInstance, params: &SaaParams) -> Result<SaaReport> {
    params.validate()?;
    let limits = &params.exact_limits;
    let batches: Vec<Vec<Scenario>> = (0..params.replications)
        .map(|m| sample_batch_with(instance, params.samples, params.master_seed, &replication_purpose(m)))
        .collect::<Result<_>>()?;
    let solved: Vec<(HiringDecision, f64)> = batches
        .par_iter()
        .map(|batch| match &params.inner {
            InnerSolver::Exact => solve_saa_exact_with(instance, batch, limits).map(|s| (s.hiring, s.objective)),
            InnerSolver::Ts(ts) => {
                let ts = TsParams {
                    fitness_sample_size: params.samples,
                    ..ts.clone()
                };
                run_ts_with(instance, &ts, batch, None, None).map(|r| (r.hiring, r.best_fitness))
            }
        })
        .collect::<Result<_>>()?;

    let eval_batch = sample_batch_with(instance, params.eval_samples, params.master_seed, EVAL_PURPOSE)?;
    let layout = crate::domain::group_part_timers(instance);
    let problems: Vec<(Problem, bool)> = eval_batch
        .iter()
        .map(|s| {
            let exact = limits.check_scenario(instance, s).is_ok();
            Problem::new(instance, &layout, s).map(|p| (p, exact))
        })
        .collect::<Result<_>>()?;
    let eval_exact = problems.iter().filter(|(_, e)| *e).count();

    let per_replication: Vec<Replication> = solved
        .into_iter()
        .enumerate()
        .map(|(index, (hiring, objective))| {
            let (g_hat, sigma_g) = mean_and_std_error(&evaluate(&problems, &hiring.bits));
            Replication {
                index,
                hiring,
                objective,
                g_hat,
                sigma_g,
            }
        })
        .collect();

    let optima: Vec<f64> = per_replication.iter().map(|r| r.objective).collect();
    let (lb_mean, sigma_lb) = mean_and_std_error(&optima);
    let m_star = per_replication
        .iter()
        .min_by(|a, b| a.g_hat.total_cmp(&b.g_hat).then_with(|| a.index.cmp(&b.index)))
        .map(|r| r.index)
        .expect("at least two replications");
    let best = &per_replication[m_star];
    let gap = best.g_hat - lb_mean;
    let sigma_gap = (sigma_lb.powi(2) + best.sigma_g.powi(2)).sqrt();
    let ci = gap_confidence_interval(gap, sigma_gap, lb_mean, params.confidence);
    Ok(SaaReport {
        schema_version: SCHEMA_VERSION,
        samples: params.samples,
        eval_samples: params.eval_samples,
        replications: params.replications,
        confidence: params.confidence,
        master_seed: params.master_seed,
        inner: match params.inner {
            InnerSolver::Exact => "exact".into(),
            InnerSolver::Ts(_) => "ts".into(),
        },
        lb_mean,
        sigma_lb,
        m_star,
        ub: best.g_hat,
        sigma_ub: best.sigma_g,
        gap,
        gap_pct: ci.gap_pct,
        sigma_gap,
        z: ci.z,
        ci_low: ci.ci_low,
        ci_high: ci.ci_high,
        negative_gap_flag: gap < -2.0 * sigma_gap,
        eval_exact,
        eval_greedy: problems.len() - eval_exact,
        per_replication,
    })
}

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "S", "LB", "LB_std", "UB", "UB_std", "gap", "gap_pct", "gap_std", "ci_low", "ci_high",
];

/// One summary row per report, in the bounds-table column layout.
pub fn write_summary_csv<W: Write>(out: W, reports: &[SaaReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in reports {
        let mut rec = vec![r.samples.to_string()];
        rec.extend(
            [
                r.lb_mean,
                r.sigma_lb,
                r.ub,
                r.sigma_ub,
                r.gap,
                r.gap_pct,
                r.sigma_gap,
                r.ci_low,
                r.ci_high,
            ]
            .map(num),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;

    #[test]
    fn published_row_arithmetic() {
        let ci = gap_confidence_interval(258.37, 40.85, 657.17, 0.95);
        assert!((ci.ci_low - 178.30).abs() <= 0.01, "{}", ci.ci_low);
        assert!((ci.ci_high - 338.44).abs() <= 0.01, "{}", ci.ci_high);
        assert!((ci.gap_pct - 39.31).abs() <= 0.01, "{}", ci.gap_pct);
        assert!((ci.z - 1.959964).abs() < 1e-6);
    }

    #[test]
    fn lower_bound_variance() {
        let (m, s) = mean_and_std_error(&[100.0, 110.0, 120.0]);
        assert_eq!(m, 110.0);
        assert!((s * s - 200.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_instance_has_zero_gap() {
        let p = SaaParams {
            samples: 1,
            replications: 2,
            eval_samples: 3,
            ..SaaParams::default()
        };
        let r = run_saa(&t1(), &p).unwrap();
        assert!(r.per_replication.iter().all(|x| x.objective == 20.0 && x.g_hat == 20.0));
        assert_eq!((r.gap, r.sigma_gap, r.ci_low, r.ci_high), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.best().bits, [true, false]);
        assert!(!r.negative_gap_flag);
    }

    #[test]
    fn preconditions() {
        let bad = [
            SaaParams {
                samples: 0,
                ..SaaParams::default()
            },
            SaaParams {
                replications: 1,
                ..SaaParams::default()
            },
            SaaParams {
                eval_samples: 5,
                ..SaaParams::default()
            },
        ];
        for p in bad {
            assert!(run_saa(&t1(), &p).is_err());
        }
    }

    #[test]
    fn exact_inner_refuses_large_instances() {
        let base = crate::fixtures::base_case().simplify().unwrap();
        let e = run_saa(&base, &SaaParams::default()).unwrap_err();
        assert!(e.is_size_guard());
    }

    #[test]
    fn summary_header() {
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "S,LB,LB_std,UB,UB_std,gap,gap_pct,gap_std,ci_low,ci_high\n"
        );
    }
}
