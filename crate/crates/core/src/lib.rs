//! Scheduling limited-English-proficiency patients with interpreters under
//! emergency-arrival uncertainty.
//!
//! A day is split into `T` periods. First-stage decisions choose which
//! part-time interpreters to hire; second-stage decisions, taken once the
//! emergency arrivals and outpatient session lengths are known, assign each
//! patient to a compatible interpreter and start period or leave them
//! unserved. The crate provides the model types, a scenario sampler, a
//! schedule checker and cost evaluator, an exact small-instance solver, the
//! greedy constructor and tabu search used at realistic size, and a sample
//! average approximation driver with optimality-gap estimates.

// NaN must fail range checks, so `!(x >= 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base_case;
pub mod domain;
pub mod error;
pub mod eval;
pub mod evaluation;
pub mod exact;
pub mod family;
pub mod fixtures;
pub mod hestof;
pub(crate) mod model;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod saa;
pub mod scenario;
pub mod tabu;

pub use domain::{
    Assignment, Contract, HiringDecision, InterpreterKind, InterpreterProfile, LanguageId, PatientClass,
    PatientRecord, ProblemInstance, Scenario, Schedule, ScheduleCosting,
};
pub use error::{Error, Result};
pub use eval::{check_batch, check_constraints, second_stage_cost, total_objective, Violation};
pub use exact::{solve_saa_exact, solve_second_stage_exact, ExactLimits};
pub use hestof::{construct_schedule, fitness, SelectionPolicy};
pub use rng::RandomStream;
pub use saa::{run_saa, SaaParams, SaaReport};
pub use scenario::{expected_scenario, sample_batch, sample_scenario};
pub use tabu::{run_ts, TsParams, TsResult};
