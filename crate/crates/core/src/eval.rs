//! Second-stage costing and constraint checking.
//!
//! This module is the single source of truth for what a schedule costs and
//! whether it is feasible. Solvers produce schedules; only this module
//! judges them.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::domain::{Assignment, HiringDecision, ProblemInstance, Scenario, Schedule, ScheduleCosting};
use crate::error::{Error, Result};
use crate::model::{Plan, Problem};

/// Constraint families of the scheduling model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintFamily {
    /// A patient is served at most once (34).
    SingleAssignment,
    /// Sessions start, and run, only in available periods (35)-(36).
    StartAvailability,
    /// Sessions of one interpreter do not overlap (37)-(40).
    SessionOverlap,
    /// Sessions start no earlier than the patient's arrival (43)-(46).
    StartBeforeArrival,
    /// The interpreter speaks the patient's language (47)-(50).
    SkillMismatch,
    /// Only hired part-timers are used (53)/(57).
    UnhiredUsage,
    /// Every hired part-timer is used somewhere in the batch (56).
    HiredUnused,
    /// Sessions finish within the horizon.
    HorizonOverrun,
    /// The schedule names a patient or interpreter that does not exist.
    UnknownReference,
}

impl ConstraintFamily {
    pub fn code(self) -> &'static str {
        match self {
            ConstraintFamily::SingleAssignment => "single-assignment(34)",
            ConstraintFamily::StartAvailability => "start-availability(35-36)",
            ConstraintFamily::SessionOverlap => "session-overlap(37-40)",
            ConstraintFamily::StartBeforeArrival => "start-before-arrival(43-46)",
            ConstraintFamily::SkillMismatch => "skill-mismatch(47-50)",
            ConstraintFamily::UnhiredUsage => "unhired-usage(53,57)",
            ConstraintFamily::HiredUnused => "hired-unused(56)",
            ConstraintFamily::HorizonOverrun => "horizon-overrun",
            ConstraintFamily::UnknownReference => "unknown-reference",
        }
    }
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub scenario: Option<usize>,
    /// Offending patient and interpreter ids.
    pub ids: Vec<String>,
}

/// Per-job, per-staff quantities of a plan.
#[derive(Debug, Clone)]
pub(crate) struct PlanCost {
    pub waits: Vec<f64>,
    pub loads: Vec<u32>,
    pub fixed: f64,
    pub variable: f64,
    pub overtime: f64,
    pub penalty: f64,
}

impl PlanCost {
    pub fn total(&self) -> f64 {
        self.fixed + self.variable + self.overtime + self.penalty
    }

    pub fn second_stage(&self) -> f64 {
        self.variable + self.overtime + self.penalty
    }
}

pub(crate) fn cost_plan(p: &Problem, bits: &[bool], plan: &Plan) -> PlanCost {
    let mut loads = vec![0u32; p.staff.len()];
    let mut waits = Vec::with_capacity(plan.len());
    let mut penalty = 0.0;
    for (j, slot) in plan.iter().enumerate() {
        let job = &p.jobs[j];
        let wait = match *slot {
            Some((s, start)) => {
                loads[s] += job.duration;
                start as f64 - job.arrival as f64
            }
            None => p.unserved_wait(j),
        };
        penalty += job.penalty * wait;
        waits.push(wait);
    }
    let (mut variable, mut overtime) = (0.0, 0.0);
    for (s, staff) in p.staff.iter().enumerate() {
        match staff.bit {
            None => overtime += staff.load_cost(loads[s]),
            Some(b) if bits[b] => variable += staff.load_cost(loads[s]),
            Some(_) => {}
        }
    }
    PlanCost {
        waits,
        loads,
        fixed: p.fixed_cost(bits),
        variable,
        overtime,
        penalty,
    }
}

/// Walks every constraint of the single-scenario model and reports each
/// breach to `sink` as `(family, jobs, staff)`. Stops early when the sink
/// breaks.
pub(crate) fn scan_plan<B>(
    p: &Problem,
    bits: &[bool],
    plan: &Plan,
    mut sink: impl FnMut(ConstraintFamily, &[usize], Option<usize>) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let mut per_staff: Vec<Vec<(u32, u32, usize)>> = vec![Vec::new(); p.staff.len()];
    for (j, slot) in plan.iter().enumerate() {
        let Some((s, start)) = *slot else { continue };
        let job = &p.jobs[j];
        let staff = &p.staff[s];
        if !staff.is_hired(bits) {
            sink(ConstraintFamily::UnhiredUsage, &[j], Some(s))?;
        }
        if !p.skill[s][j] {
            sink(ConstraintFamily::SkillMismatch, &[j], Some(s))?;
        }
        if start < job.arrival {
            sink(ConstraintFamily::StartBeforeArrival, &[j], Some(s))?;
        }
        let end = start + job.duration - 1;
        if start < 1 || start > p.horizon || (!p.overrun && end > p.horizon) {
            sink(ConstraintFamily::HorizonOverrun, &[j], Some(s))?;
        }
        let in_horizon_end = end.min(p.horizon);
        if !staff.is_available(start) || (start.max(1)..=in_horizon_end).any(|t| !staff.is_available(t)) {
            sink(ConstraintFamily::StartAvailability, &[j], Some(s))?;
        }
        per_staff[s].push((start, end, j));
    }
    for (s, sessions) in per_staff.iter_mut().enumerate() {
        sessions.sort_unstable();
        for a in 0..sessions.len() {
            for b in a + 1..sessions.len() {
                let (sa, ea, ja) = sessions[a];
                let (sb, _, jb) = sessions[b];
                if sb > ea {
                    break;
                }
                debug_assert!(sa <= sb);
                sink(ConstraintFamily::SessionOverlap, &[ja, jb], Some(s))?;
            }
        }
    }
    ControlFlow::Continue(())
}

pub(crate) fn plan_is_feasible(p: &Problem, bits: &[bool], plan: &Plan) -> bool {
    scan_plan(p, bits, plan, |_, _, _| ControlFlow::Break(())).is_continue()
}

pub(crate) fn plan_violations(p: &Problem, bits: &[bool], plan: &Plan, scenario: Option<usize>) -> Vec<Violation> {
    let mut out = Vec::new();
    let _ = scan_plan(p, bits, plan, |family, jobs, staff| {
        let mut ids: Vec<String> = jobs.iter().map(|&j| p.jobs[j].id.to_owned()).collect();
        ids.extend(staff.map(|s| p.staff[s].id.to_owned()));
        out.push(Violation { family, scenario, ids });
        ControlFlow::<()>::Continue(())
    });
    out
}

pub(crate) fn plan_to_schedule(p: &Problem, plan: &Plan) -> Schedule {
    Schedule::new(
        plan.iter()
            .enumerate()
            .map(|(j, slot)| match *slot {
                Some((s, start)) => Assignment::served(p.jobs[j].id, p.staff[s].id, start),
                None => Assignment::unserved(p.jobs[j].id),
            })
            .collect(),
    )
}

/// Translates a schedule into a plan. Reference problems are returned as
/// violations rather than errors.
fn schedule_to_plan(p: &Problem, schedule: &Schedule, scenario: Option<usize>) -> (Plan, Vec<Violation>) {
    let mut plan: Plan = vec![None; p.jobs.len()];
    let mut seen = HashSet::new();
    let mut issues = Vec::new();
    for a in &schedule.assignments {
        let Some(j) = p.job_index(&a.patient) else {
            issues.push(Violation {
                family: ConstraintFamily::UnknownReference,
                scenario,
                ids: vec![a.patient.clone()],
            });
            continue;
        };
        if !seen.insert(j) {
            issues.push(Violation {
                family: ConstraintFamily::SingleAssignment,
                scenario,
                ids: vec![a.patient.clone()],
            });
            continue;
        }
        let Some(interp) = &a.interpreter else { continue };
        let Some(s) = p.staff_index(interp) else {
            issues.push(Violation {
                family: ConstraintFamily::UnknownReference,
                scenario,
                ids: vec![a.patient.clone(), interp.clone()],
            });
            continue;
        };
        match a.start {
            Some(start) => plan[j] = Some((s, start)),
            None => issues.push(Violation {
                family: ConstraintFamily::UnknownReference,
                scenario,
                ids: vec![a.patient.clone(), interp.clone()],
            }),
        }
    }
    (plan, issues)
}

/// Cost of one scenario's schedule under hiring decision `w`. The fixed
/// hiring cost of `w` is included in `fixed_cost` and `total`.
pub fn second_stage_cost(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenario: &Scenario,
    schedule: &Schedule,
) -> Result<ScheduleCosting> {
    let p = Problem::new(instance, w, scenario)?;
    let (plan, issues) = schedule_to_plan(&p, schedule, None);
    if let Some(v) = issues.first() {
        return Err(match v.family {
            ConstraintFamily::SingleAssignment => {
                Error::validation(format!("schedule.{}", v.ids[0]), "patient assigned more than once")
            }
            _ if v.ids.len() > 1 && p.staff_index(&v.ids[1]).is_none() => Error::UnknownInterpreter(v.ids[1].clone()),
            _ if v.ids.len() > 1 => Error::validation(format!("schedule.{}", v.ids[0]), "served without a start period"),
            _ => Error::UnknownPatient(v.ids[0].clone()),
        });
    }
    for &(s, _) in plan.iter().flatten() {
        if !p.staff[s].is_hired(&w.bits) {
            return Err(Error::UnhiredInterpreter(p.staff[s].id.to_owned()));
        }
    }
    let c = cost_plan(&p, &w.bits, &plan);
    let mut costing = ScheduleCosting {
        fixed_cost: c.fixed,
        variable_cost: c.variable,
        overtime_cost: c.overtime,
        penalty_cost: c.penalty,
        total: c.total(),
        ..Default::default()
    };
    for (j, &wait) in c.waits.iter().enumerate() {
        costing.per_patient_wait.insert(p.jobs[j].id.to_owned(), wait);
    }
    for (s, staff) in p.staff.iter().enumerate() {
        let load = c.loads[s];
        costing.per_interpreter_load.insert(staff.id.to_owned(), load);
        match staff.bit {
            None => {
                costing
                    .per_interpreter_overtime
                    .insert(staff.id.to_owned(), load.saturating_sub(staff.threshold));
            }
            Some(b) if w.bits[b] => {
                costing
                    .per_parttimer_extra
                    .insert(staff.id.to_owned(), load.saturating_sub(staff.threshold));
            }
            Some(_) => {}
        }
    }
    Ok(costing)
}

/// Every breached constraint of one scenario's schedule. Never fails:
/// malformed references are reported as violations.
pub fn check_constraints(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenario: &Scenario,
    schedule: &Schedule,
) -> Vec<Violation> {
    check_indexed(instance, w, scenario, schedule, None)
}

fn check_indexed(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenario: &Scenario,
    schedule: &Schedule,
    index: Option<usize>,
) -> Vec<Violation> {
    let p = match Problem::new(instance, w, scenario) {
        Ok(p) => p,
        Err(e) => {
            return vec![Violation {
                family: ConstraintFamily::UnknownReference,
                scenario: index,
                ids: vec![e.to_string()],
            }]
        }
    };
    let (plan, mut out) = schedule_to_plan(&p, schedule, index);
    out.extend(plan_violations(&p, &w.bits, &plan, index));
    out
}

/// Per-scenario checks over a whole batch plus the batch-level rule that
/// every hired part-timer is used in at least one scenario.
pub fn check_batch(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenarios: &[Scenario],
    schedules: &[Schedule],
) -> Result<Vec<Violation>> {
    if scenarios.len() != schedules.len() {
        return Err(Error::CountMismatch {
            expected: scenarios.len(),
            actual: schedules.len(),
        });
    }
    let mut out = Vec::new();
    for (k, (sc, sch)) in scenarios.iter().zip(schedules).enumerate() {
        out.extend(check_indexed(instance, w, sc, sch, Some(k)));
    }
    let used: HashSet<&str> = schedules
        .iter()
        .flat_map(|s| s.assignments.iter())
        .filter_map(|a| a.interpreter.as_deref())
        .collect();
    for (id, &hired) in w.members.iter().zip(&w.bits) {
        if hired && !used.contains(id.as_str()) {
            out.push(Violation {
                family: ConstraintFamily::HiredUnused,
                scenario: None,
                ids: vec![id.clone()],
            });
        }
    }
    Ok(out)
}

/// Fixed cost of `w` once, plus the probability-weighted second-stage cost
/// of each scenario's schedule.
pub fn total_objective(
    instance: &ProblemInstance,
    w: &HiringDecision,
    scenarios: &[Scenario],
    schedules: &[Schedule],
) -> Result<f64> {
    if scenarios.len() != schedules.len() {
        return Err(Error::CountMismatch {
            expected: scenarios.len(),
            actual: schedules.len(),
        });
    }
    let mut second = 0.0;
    for (sc, sch) in scenarios.iter().zip(schedules) {
        let c = second_stage_cost(instance, w, sc, sch)?;
        second += sc.probability * (c.variable_cost + c.overtime_cost + c.penalty_cost);
    }
    Ok(w.fixed_cost(instance) + second)
}

/// CSV report: `family,scenario,ids` with ids joined by `;`.
pub fn write_violations_csv<W: Write>(out: W, violations: &[Violation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["family", "scenario", "ids"])?;
    for v in violations {
        let scenario = v.scenario.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([v.family.code(), scenario.as_str(), v.ids.join(";").as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Counts violations by family, for reports.
pub fn tally(violations: &[Violation]) -> BTreeMap<ConstraintFamily, usize> {
    let mut m = BTreeMap::new();
    for v in violations {
        *m.entry(v.family).or_insert(0) += 1;
    }
    m
}
