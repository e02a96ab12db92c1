//! Greedy second-stage schedule construction and the multi-scenario
//! fitness used by tabu search.
//!
//! The sweep visits every period. Whenever some interpreter is idle and
//! patients are waiting, idle interpreters are scanned full-timers first
//! (roster order), then hired part-timers (hiring-bit order), and each one
//! picks a compatible waiting patient whose session fits, according to the
//! [`SelectionPolicy`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{HiringDecision, ProblemInstance, Scenario, Schedule};
use crate::error::Result;
use crate::eval::{cost_plan, plan_to_schedule};
use crate::model::{Plan, Problem};

/// How an idle interpreter chooses among compatible waiting patients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    /// Largest accrued penalty `P_n · (t - arrival)`.
    #[default]
    MaxAccruedPenalty,
    /// Smallest accrued penalty, the literal reading of "lowest penalty".
    MinImmediatePenalty,
}

pub(crate) fn construct_plan(p: &Problem, bits: &[bool], policy: SelectionPolicy) -> Plan {
    let n = p.jobs.len();
    let mut plan: Plan = vec![None; n];
    if n == 0 {
        return plan;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| (p.jobs[j].arrival, j));
    let mut next_arrival = 0;
    let mut waiting: Vec<usize> = Vec::new();
    let mut free_at = vec![1u32; p.staff.len()];
    let hired: Vec<usize> = (0..p.staff.len()).filter(|&s| p.staff[s].is_hired(bits)).collect();

    for t in 1..=p.horizon {
        while next_arrival < n && p.jobs[order[next_arrival]].arrival <= t {
            waiting.push(order[next_arrival]);
            next_arrival += 1;
        }
        if waiting.is_empty() {
            continue;
        }
        for &s in &hired {
            if free_at[s] > t || !p.staff[s].is_available(t) {
                continue;
            }
            let mut best: Option<(usize, usize)> = None; // (position in waiting, job)
            for (pos, &j) in waiting.iter().enumerate() {
                let job = &p.jobs[j];
                if !p.skill[s][j] || !p.fits(s, t, job.duration) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((_, b)) => prefers(p, policy, t, j, b),
                };
                if better {
                    best = Some((pos, j));
                }
            }
            if let Some((pos, j)) = best {
                plan[j] = Some((s, t));
                free_at[s] = t + p.jobs[j].duration;
                waiting.remove(pos);
                if waiting.is_empty() {
                    break;
                }
            }
        }
    }
    plan
}

/// Whether job `a` should be chosen over job `b` at period `t`.
fn prefers(p: &Problem, policy: SelectionPolicy, t: u32, a: usize, b: usize) -> bool {
    let (ja, jb) = (&p.jobs[a], &p.jobs[b]);
    let accrued = |j: &crate::model::Job| j.penalty * (t - j.arrival) as f64;
    let (ka, kb) = (accrued(ja), accrued(jb));
    let primary = match policy {
        SelectionPolicy::MaxAccruedPenalty => kb.total_cmp(&ka),
        SelectionPolicy::MinImmediatePenalty => ka.total_cmp(&kb),
    };
    primary
        .then_with(|| jb.penalty.total_cmp(&ja.penalty))
        .then_with(|| ja.arrival.cmp(&jb.arrival))
        .then_with(|| ja.id.cmp(jb.id))
        .is_lt()
}

/// Greedy schedule for one scenario under hiring decision `w`.
pub fn construct_schedule(instance: &ProblemInstance, w: &HiringDecision, scenario: &Scenario) -> Result<Schedule> {
    construct_schedule_with(instance, w, scenario, SelectionPolicy::default())
}

pub fn construct_schedule_with(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenario: &Scenario,
    policy: SelectionPolicy,
) -> Result<Schedule> {
    let p = Problem::new(instance, w, scenario)?;
    Ok(plan_to_schedule(&p, &construct_plan(&p, &w.bits, policy)))
}

/// Pre-built scenario views for repeated fitness evaluation of many
/// hiring vectors against one fixed batch.
pub struct FitnessBatch<'a> {
    problems: Vec<Problem<'a>>,
    weights: Vec<f64>,
    policy: SelectionPolicy,
}

impl<'a> FitnessBatch<'a> {
    pub fn new(
        instance: &'a ProblemInstance,
        layout: &'a HiringDecision,
        scenarios: &'a [Scenario],
        policy: SelectionPolicy,
    ) -> Result<Self> {
        let problems = scenarios
            .iter()
            .map(|s| Problem::new(instance, layout, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(FitnessBatch {
            problems,
            weights: scenarios.iter().map(|s| s.probability).collect(),
            policy,
        })
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    /// Per-scenario totals (fixed cost included) of the greedy schedules.
    pub fn scenario_totals(&self, bits: &[bool]) -> Vec<f64> {
        self.problems
            .par_iter()
            .map(|p| cost_plan(p, bits, &construct_plan(p, bits, self.policy)).total())
            .collect()
    }

    /// Bit positions hired in `bits` that no greedy schedule of the batch
    /// uses.
    pub fn unused_hires(&self, bits: &[bool]) -> Vec<usize> {
        let mut used = vec![false; bits.len()];
        for p in &self.problems {
            for &(s, _) in construct_plan(p, bits, self.policy).iter().flatten() {
                if let Some(b) = p.staff[s].bit {
                    used[b] = true;
                }
            }
        }
        (0..bits.len()).filter(|&b| bits[b] && !used[b]).collect()
    }

    /// Fixed cost plus probability-weighted greedy second-stage cost.
    /// Summation runs in scenario order.
    pub fn fitness(&self, bits: &[bool]) -> f64 {
        let second: Vec<f64> = self
            .problems
            .par_iter()
            .map(|p| cost_plan(p, bits, &construct_plan(p, bits, self.policy)).second_stage())
            .collect();
        let fixed = self.problems.first().map_or(0.0, |p| p.fixed_cost(bits));
        fixed + second.iter().zip(&self.weights).map(|(c, w)| c * w).sum::<f64>()
    }
}

/// Expected cost of `w` over `scenarios` using the greedy schedules.
/// Hired-but-unused part-timers still pay their fixed cost.
pub fn fitness(instance: &ProblemInstance, w: &HiringDecision, scenarios: &[Scenario]) -> Result<f64> {
    if scenarios.is_empty() {
        return Ok(w.fixed_cost(instance));
    }
    Ok(FitnessBatch::new(instance, w, scenarios, SelectionPolicy::default())?.fitness(&w.bits))
}
