//! Index-based view of one (instance, scenario) pair shared by the
//! evaluator, the heuristics and the exact solvers.
//!
//! Staff are ordered full-timers first (roster order), then part-timers in
//! hiring-bit order. Jobs are outpatients (instance order) followed by the
//! scenario's emergencies.

use crate::domain::{
    Contract, HiringDecision, InterpreterProfile, PatientClass, PatientRecord, ProblemInstance, Scenario,
    SessionEnd,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Staff<'a> {
    pub id: &'a str,
    /// Hiring-bit index for part-timers, `None` for full-timers.
    pub bit: Option<usize>,
    /// Regular time (full-timers) or covered threshold (part-timers).
    pub threshold: u32,
    /// Overtime rate (full-timers) or variable rate (part-timers).
    pub rate: f64,
    pub fixed_cost: f64,
    pub available: &'a [bool],
}

impl Staff<'_> {
    pub fn is_hired(&self, bits: &[bool]) -> bool {
        self.bit.is_none_or(|b| bits[b])
    }

    pub fn is_available(&self, t: u32) -> bool {
        t >= 1 && self.available.get(t as usize - 1).copied().unwrap_or(false)
    }

    /// Whether a session `[start, end]` lies in this interpreter's
    /// availability; `end` is already capped by the caller.
    pub fn span_available(&self, start: u32, end: u32) -> bool {
        start >= 1 && (start..=end).all(|t| self.is_available(t))
    }

    /// Cost of carrying `load` periods of service beyond what is already paid.
    pub fn load_cost(&self, load: u32) -> f64 {
        load.saturating_sub(self.threshold) as f64 * self.rate
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Job<'a> {
    pub id: &'a str,
    pub class: PatientClass,
    pub arrival: u32,
    pub duration: u32,
    pub penalty: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Problem<'a> {
    pub horizon: u32,
    pub overrun: bool,
    pub alpha: f64,
    pub staff: Vec<Staff<'a>>,
    pub jobs: Vec<Job<'a>>,
    /// `skill[s][j]`: staff `s` speaks job `j`'s language.
    pub skill: Vec<Vec<bool>>,
}

/// `slot[j] = Some((staff, start))` or `None` for unserved.
pub(crate) type Plan = Vec<Option<(usize, u32)>>;

impl<'a> Problem<'a> {
    pub fn new(instance: &'a ProblemInstance, layout: &'a HiringDecision, scenario: &'a Scenario) -> Result<Self> {
        let horizon = instance.horizon;
        let mut staff: Vec<Staff<'a>> = instance.full_timers().map(|i| staff_of(i, None, horizon)).collect();
        for (b, id) in layout.members.iter().enumerate() {
            let interp = instance
                .interpreter(id)
                .ok_or_else(|| Error::UnknownInterpreter(id.clone()))?;
            staff.push(staff_of(interp, Some(b), horizon));
        }
        let mut jobs = Vec::with_capacity(instance.outpatients.len() + scenario.emergency_patients.len());
        let mut languages = Vec::with_capacity(jobs.capacity());
        for p in &instance.outpatients {
            let d = scenario
                .outpatient_durations
                .get(&p.id)
                .copied()
                .or(p.duration)
                .ok_or_else(|| Error::validation(format!("outpatient_durations.{}", p.id), "missing duration"))?;
            jobs.push(job_of(p, d));
            languages.push(&p.language);
        }
        for p in &scenario.emergency_patients {
            let d = p
                .duration
                .ok_or_else(|| Error::validation(format!("emergency_patients.{}", p.id), "missing duration"))?;
            jobs.push(job_of(p, d));
            languages.push(&p.language);
        }
        for j in &jobs {
            if j.duration < 1 {
                return Err(Error::validation(format!("durations.{}", j.id), "must be at least 1"));
            }
        }
        let skill = staff
            .iter()
            .map(|s| {
                let profile = instance.interpreter(s.id).expect("staff built from roster");
                languages.iter().map(|l| profile.speaks(l)).collect()
            })
            .collect();
        Ok(Problem {
            horizon,
            overrun: instance.session_end == SessionEnd::MayOverrun,
            alpha: instance.alpha,
            staff,
            jobs,
            skill,
        })
    }

    /// Latest start period for a session of `duration`.
    pub fn last_start(&self, duration: u32) -> u32 {
        if self.overrun {
            self.horizon
        } else {
            (self.horizon + 1).saturating_sub(duration)
        }
    }

    /// Last in-horizon period occupied by a session, or `None` if the
    /// session is not allowed to start at `start`.
    pub fn session_end(&self, start: u32, duration: u32) -> Option<u32> {
        (start >= 1 && start <= self.last_start(duration)).then(|| (start + duration - 1).min(self.horizon))
    }

    /// Whether staff `s` may run a `duration` session from `start`.
    pub fn fits(&self, s: usize, start: u32, duration: u32) -> bool {
        self.session_end(start, duration)
            .is_some_and(|end| self.staff[s].span_available(start, end))
    }

    pub fn unserved_wait(&self, job: usize) -> f64 {
        self.alpha * self.horizon as f64 - self.jobs[job].arrival as f64
    }

    pub fn fixed_cost(&self, bits: &[bool]) -> f64 {
        self.staff
            .iter()
            .filter(|s| s.bit.is_some_and(|b| bits[b]))
            .map(|s| s.fixed_cost)
            .sum()
    }

    pub fn staff_index(&self, id: &str) -> Option<usize> {
        self.staff.iter().position(|s| s.id == id)
    }

    pub fn job_index(&self, id: &str) -> Option<usize> {
        self.jobs.iter().position(|j| j.id == id)
    }
}

fn staff_of<'a>(i: &'a InterpreterProfile, bit: Option<usize>, horizon: u32) -> Staff<'a> {
    let (threshold, rate, fixed_cost) = match i.contract {
        Contract::FullTime {
            regular_time,
            overtime_rate,
        } => (regular_time.unwrap_or(horizon), overtime_rate, 0.0),
        Contract::PartTime {
            fixed_cost,
            covered_threshold,
            variable_rate,
        } => (covered_threshold, variable_rate, fixed_cost),
    };
    Staff {
        id: &i.id,
        bit,
        threshold,
        rate,
        fixed_cost,
        available: &i.availability,
    }
}

fn job_of(p: &PatientRecord, duration: u32) -> Job<'_> {
    Job {
        id: &p.id,
        class: p.class,
        arrival: p.arrival,
        duration,
        penalty: p.penalty_rate,
    }
}
