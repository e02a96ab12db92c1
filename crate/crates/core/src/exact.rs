//! Exact solution of the sampled problem at desk scale.
//!
//! Once the hiring vector is fixed the scenarios decouple, so the sampled
//! problem is solved by enumerating hiring vectors and solving each
//! scenario's scheduling subproblem by depth-first branch-and-bound.
//! Size guards refuse anything larger; use the heuristics there.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{group_part_timers, HiringDecision, ProblemInstance, Scenario, Schedule};
use crate::error::{Error, Result};
use crate::eval::{cost_plan, plan_to_schedule};
use crate::hestof::{construct_plan, SelectionPolicy};
use crate::model::{Plan, Problem};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactLimits {
    pub max_patients: usize,
    pub max_horizon: u32,
    pub max_part_timers: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            max_patients: 10,
            max_horizon: 24,
            max_part_timers: 12,
        }
    }
}

impl ExactLimits {
    pub fn check_scenario(&self, instance: &ProblemInstance, scenario: &Scenario) -> Result<()> {
        let n = scenario.patient_count(instance);
        if n > self.max_patients {
            return Err(Error::SizeGuard(format!(
                "{n} patients in a scenario exceeds the exact-solver cap of {}",
                self.max_patients
            )));
        }
        if instance.horizon > self.max_horizon {
            return Err(Error::SizeGuard(format!(
                "horizon {} exceeds the exact-solver cap of {}",
                instance.horizon, self.max_horizon
            )));
        }
        Ok(())
    }

    pub fn check_hiring(&self, instance: &ProblemInstance) -> Result<()> {
        let j = instance.part_timers().count();
        if j > self.max_part_timers {
            return Err(Error::SizeGuard(format!(
                "{j} part-timers exceeds the exact-solver cap of {}",
                self.max_part_timers
            )));
        }
        Ok(())
    }

    pub fn admits(&self, instance: &ProblemInstance, scenarios: &[Scenario]) -> bool {
        self.check_hiring(instance).is_ok() && scenarios.iter().all(|s| self.check_scenario(instance, s).is_ok())
    }
}

struct Search<'p, 'a> {
    p: &'p Problem<'a>,
    /// Jobs in branching order (arrival, then index).
    order: Vec<usize>,
    /// Hired staff in tie-break order.
    staff: Vec<usize>,
    /// `busy[s][t - 1]`: period `t` already taken by a session of `s`.
    busy: Vec<Vec<bool>>,
    loads: Vec<u32>,
    plan: Plan,
    best_plan: Option<Plan>,
    best: f64,
}

impl Search<'_, '_> {
    fn fits(&self, s: usize, start: u32, d: u32) -> bool {
        self.p.fits(s, start, d) && self.busy[s][self.span(start, d)].iter().all(|b| !b)
    }

    /// Indices into `busy` covered by a session that fits.
    fn span(&self, start: u32, d: u32) -> std::ops::Range<usize> {
        (start - 1) as usize..(start + d - 1).min(self.p.horizon) as usize
    }

    fn marginal(&self, s: usize, d: u32) -> f64 {
        let st = &self.p.staff[s];
        st.load_cost(self.loads[s] + d) - st.load_cost(self.loads[s])
    }

    /// Each remaining job's cheapest individual option given the current
    /// partial schedule. Free slots only shrink and load costs are convex,
    /// so the sum never exceeds the cost of any completion.
    fn bound(&self, depth: usize) -> f64 {
        let p = self.p;
        let mut total = 0.0;
        for &j in &self.order[depth..] {
            let job = &p.jobs[j];
            let mut best = job.penalty * p.unserved_wait(j);
            for &s in &self.staff {
                if !p.skill[s][j] {
                    continue;
                }
                let m = self.marginal(s, job.duration);
                if m >= best {
                    continue;
                }
                let last = p.last_start(job.duration);
                if let Some(start) = (job.arrival..=last).find(|&t| self.fits(s, t, job.duration)) {
                    best = best.min(job.penalty * (start - job.arrival) as f64 + m);
                }
            }
            total += best;
        }
        total
    }

    fn prune(&self, value: f64) -> bool {
        match self.best_plan {
            Some(_) => value >= self.best - EPS,
            None => value > self.best + EPS,
        }
    }

    fn dfs(&mut self, depth: usize, acc: f64) {
        if self.prune(acc + self.bound(depth)) {
            return;
        }
        if depth == self.order.len() {
            self.best = acc;
            self.best_plan = Some(self.plan.clone());
            return;
        }
        let p = self.p;
        let j = self.order[depth];
        let job = &p.jobs[j];
        let last = p.last_start(job.duration);
        for k in 0..self.staff.len() {
            let s = self.staff[k];
            if !p.skill[s][j] {
                continue;
            }
            let m = self.marginal(s, job.duration);
            for start in job.arrival..=last {
                if !self.fits(s, start, job.duration) {
                    continue;
                }
                let step = job.penalty * (start - job.arrival) as f64 + m;
                let range = self.span(start, job.duration);
                self.busy[s][range.clone()].iter_mut().for_each(|b| *b = true);
                self.loads[s] += job.duration;
                self.plan[j] = Some((s, start));
                self.dfs(depth + 1, acc + step);
                self.plan[j] = None;
                self.loads[s] -= job.duration;
                self.busy[s][range].iter_mut().for_each(|b| *b = false);
            }
        }
        let step = job.penalty * p.unserved_wait(j);
        self.dfs(depth + 1, acc + step);
    }
}

/// Minimum second-stage cost plan; ties go to earlier staff, then earlier
/// starts, in branching order.
pub(crate) fn solve_plan(p: &Problem, bits: &[bool]) -> (Plan, f64) {
    let staff: Vec<usize> = (0..p.staff.len()).filter(|&s| p.staff[s].is_hired(bits)).collect();
    let mut order: Vec<usize> = (0..p.jobs.len()).collect();
    order.sort_by_key(|&j| (p.jobs[j].arrival, j));
    let greedy = construct_plan(p, bits, SelectionPolicy::default());
    let incumbent = cost_plan(p, bits, &greedy).second_stage();
    let mut search = Search {
        p,
        order,
        staff,
        busy: vec![vec![false; p.horizon as usize]; p.staff.len()],
        loads: vec![0; p.staff.len()],
        plan: vec![None; p.jobs.len()],
        best_plan: None,
        best: incumbent,
        };
    search.dfs(0, 0.0);
    match search.best_plan {
        Some(plan) => {
            let cost = cost_plan(p, bits, &plan).second_stage();
            (plan, cost)
        }
        // cannot happen: the greedy schedule itself is a leaf within the bound
        None => (greedy, incumbent),
    }
}

/// Optimal schedule of one scenario for fixed `w` and its second-stage
/// cost (fixed hiring cost excluded).
pub fn solve_second_stage_exact(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenario: &Scenario,
) -> Result<(Schedule, f64)> {
    solve_second_stage_exact_with(instance, w, scenario, &ExactLimits::default())
}

pub fn solve_second_stage_exact_with(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenario: &Scenario,
    limits: &ExactLimits,
) -> Result<(Schedule, f64)> {
    limits.check_scenario(instance, scenario)?;
    let p = Problem::new(instance, w, scenario)?;
    let (plan, cost) = solve_plan(&p, &w.bits);
    Ok((plan_to_schedule(&p, &plan), cost))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaaSolution {
    pub hiring: HiringDecision,
    pub objective: f64,
    pub schedules: Vec<Schedule>,
}

/// Gray-code sequence over `n` bits, starting at all-false.
pub(crate) fn gray_codes(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1u64 << n).map(move |k| {
        let g = k ^ (k >> 1);
        (0..n).map(|b| g >> b & 1 == 1).collect()
    })
}

/// Exact optimum of the sampled problem: the hiring vector minimizing fixed
/// cost plus probability-weighted optimal second-stage cost. Ties go to the
/// lexicographically smallest bit vector.
pub fn solve_saa_exact(instance: &ProblemInstance, scenarios: &[Scenario]) -> Result<(HiringDecision, f64)> {
    solve_saa_exact_with(instance, scenarios, &ExactLimits::default()).map(|s| (s.hiring, s.objective))
}

pub fn solve_saa_exact_with(
    instance: &ProblemInstance,
    scenarios: &[Scenario],
    limits: &ExactLimits,
) -> Result<SaaSolution> {
    limits.check_hiring(instance)?;
    for s in scenarios {
        limits.check_scenario(instance, s)?;
    }
    let layout = group_part_timers(instance);
    let problems = scenarios
        .iter()
        .map(|s| Problem::new(instance, &layout, s))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(Vec<bool>, f64, Vec<Plan>)> = None;
    for bits in gray_codes(layout.len()) {
        let fixed = layout
            .members
            .iter()
            .zip(&bits)
            .filter(|(_, &b)| b)
            .map(|(id, _)| instance.interpreter(id).map_or(0.0, |i| i.fixed_cost()))
            .sum::<f64>();
        if let Some((bb, bv, _)) = &best {
            if fixed > bv + EPS || (fixed >= bv - EPS && bits >= *bb) {
                continue;
            }
        }
        let solved: Vec<(Plan, f64)> = problems.par_iter().map(|p| solve_plan(p, &bits)).collect();
        let value = fixed
            + solved
                .iter()
                .zip(scenarios)
                .map(|((_, c), s)| s.probability * c)
                .sum::<f64>();
        let better = match &best {
            None => true,
            Some((bb, bv, _)) => value < bv - EPS || (value <= bv + EPS && bits < *bb),
        };
        if better {
            best = Some((bits, value, solved.into_iter().map(|(plan, _)| plan).collect()));
        }
    }
    let (bits, objective, plans) = best.expect("at least the all-false vector is evaluated");
    let schedules = problems.iter().zip(&plans).map(|(p, plan)| plan_to_schedule(p, plan)).collect();
    Ok(SaaSolution {
        hiring: layout.with_bits(bits)?,
        objective,
        schedules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Assignment as A, Contract};
    use crate::eval::check_constraints;
    use crate::fixtures::t1;
    use crate::scenario::expected_scenario;

    fn w(bits: [bool; 2]) -> HiringDecision {
        group_part_timers(&t1()).with_bits(bits.to_vec()).unwrap()
    }

    #[test]
    fn t1_second_stage() {
        let inst = t1();
        let sc = expected_scenario(&inst);
        let (s, c) = solve_second_stage_exact(&inst, &w([true, false]), &sc).unwrap();
        assert_eq!(s.assignments, [A::served("n1", "f1", 1), A::served("n2", "p1", 2)]);
        assert_eq!(c + 20.0, 20.0);
        let (s, c) = solve_second_stage_exact(&inst, &w([false, false]), &sc).unwrap();
        assert_eq!(c, 25.0);
        assert!(check_constraints(&inst, &w([false, false]), &sc, &s).is_empty());
    }

    #[test]
    fn t1_saa() {
        let inst = t1();
        let sc = vec![expected_scenario(&inst)];
        let (hw, v) = solve_saa_exact(&inst, &sc).unwrap();
        assert_eq!((hw.bits, v), (vec![true, false], 20.0));

        let mut pricey = t1();
        if let Contract::PartTime { fixed_cost, .. } = &mut pricey.interpreters[1].contract {
            *fixed_cost = 100.0;
        }
        let sc = vec![expected_scenario(&pricey)];
        let (hw, v) = solve_saa_exact(&pricey, &sc).unwrap();
        assert_eq!((hw.bits, v), (vec![false, false], 25.0));
    }

    #[test]
    fn empty_cases() {
        let mut inst = t1();
        inst.outpatients.clear();
        let sc = expected_scenario(&inst);
        let (s, c) = solve_second_stage_exact(&inst, &group_part_timers(&inst), &sc).unwrap();
        assert!(s.assignments.is_empty());
        assert_eq!(c, 0.0);
        let (hw, v) = solve_saa_exact(&inst, &[sc]).unwrap();
        assert_eq!((hw.bits, v), (vec![false, false], 0.0));
    }

    #[test]
    fn guards() {
        let inst = crate::fixtures::base_case().simplify().unwrap();
        let sc = vec![expected_scenario(&inst)];
        assert!(solve_saa_exact(&inst, &sc).unwrap_err().is_size_guard());
        let layout = group_part_timers(&inst);
        assert!(solve_second_stage_exact(&inst, &layout, &sc[0]).unwrap_err().is_size_guard());
    }

    #[test]
    fn gray_order_covers_everything_once() {
        let all: Vec<Vec<bool>> = gray_codes(3).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], [false, false, false]);
        let set: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), 8);
        for pair in all.windows(2) {
            assert_eq!(pair[0].iter().zip(&pair[1]).filter(|(a, b)| a != b).count(), 1);
        }
    }
}
