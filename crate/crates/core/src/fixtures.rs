//! Canonical instances: the tiny hand-checkable T1, the reduced instance
//! used for sampling-convergence experiments, and the seeded base case.

use std::collections::BTreeMap;

use crate::base_case::make_base_instance;
use crate::domain::{
    Contract, DurationModel, InterpreterProfile, LanguageId, NormalDuration, PatientClass, PatientRecord,
    Penalties, ProblemInstance, UniformDuration, SessionEnd, SCHEMA_VERSION,
};

/// Seed of the shipped `fixtures/base_case.json`.
pub const BASE_CASE_SEED: u64 = 7;

fn full_timer(id: &str, langs: &[&str], horizon: u32, regular_time: u32, overtime_rate: f64) -> InterpreterProfile {
    InterpreterProfile {
        id: id.into(),
        languages: langs.iter().map(|&l| LanguageId::from(l)).collect(),
        availability: vec![true; horizon as usize],
        contract: Contract::FullTime {
            regular_time: Some(regular_time),
            overtime_rate,
        },
    }
}

fn part_timer(id: &str, langs: &[&str], horizon: u32, fixed: f64, covered: u32, rate: f64) -> InterpreterProfile {
    InterpreterProfile {
        id: id.into(),
        languages: langs.iter().map(|&l| LanguageId::from(l)).collect(),
        availability: vec![true; horizon as usize],
        contract: Contract::PartTime {
            fixed_cost: fixed,
            covered_threshold: covered,
            variable_rate: rate,
        },
    }
}

fn outpatient(id: &str, lang: &str, arrival: u32, duration: Option<u32>, penalty: f64) -> PatientRecord {
    PatientRecord {
        id: id.into(),
        class: PatientClass::Outpatient,
        language: lang.into(),
        arrival,
        duration,
        penalty_rate: penalty,
    }
}

/// T1: four periods, one language, one full-timer and two part-timers,
/// two outpatients with known durations and no emergencies.
pub fn t1() -> ProblemInstance {
    ProblemInstance {
        schema_version: SCHEMA_VERSION,
        horizon: 4,
        languages: vec!["L1".into()],
        interpreters: vec![
            full_timer("f1", &["L1"], 4, 2, 10.0),
            part_timer("p1", &["L1"], 4, 20.0, 1, 5.0),
            part_timer("p2", &["L1"], 4, 30.0, 1, 5.0),
        ],
        outpatients: vec![
            outpatient("n1", "L1", 1, Some(2), 15.0),
            outpatient("n2", "L1", 2, Some(1), 15.0),
        ],
        inpatients: vec![],
        preassignments: vec![],
        arrival_rates: BTreeMap::from([("L1".into(), 0.0)]),
        durations: DurationModel {
            outpatient: NormalDuration { mean: 1.0, spread: 0.0 },
            emergency: UniformDuration { low: 1, high: 1 },
        },
        alpha: 2.0,
        penalties: Penalties { emergency: 15.0 },
        session_end: SessionEnd::WithinHorizon,
    }
}

/// Reduced stochastic instance inside the exact solver's guards: twelve
/// periods, three interpreters, two outpatients and about 2.4 expected
/// emergencies per day.
pub fn reduced() -> ProblemInstance {
    let t = 12;
    ProblemInstance {
        schema_version: SCHEMA_VERSION,
        horizon: t,
        languages: vec!["L1".into(), "L2".into()],
        interpreters: vec![
            full_timer("f1", &["L1", "L2"], t, 6, 12.0),
            part_timer("p1", &["L1"], t, 25.0, 3, 6.0),
            part_timer("p2", &["L2"], t, 20.0, 3, 6.0),
        ],
        outpatients: vec![
            outpatient("o1", "L1", 2, None, 10.0),
            outpatient("o2", "L2", 5, None, 10.0),
        ],
        inpatients: vec![],
        preassignments: vec![],
        arrival_rates: BTreeMap::from([("L1".into(), 0.12), ("L2".into(), 0.08)]),
        durations: DurationModel {
            outpatient: NormalDuration { mean: 3.0, spread: 1.5 },
            emergency: UniformDuration { low: 1, high: 4 },
        },
        alpha: 2.0,
        penalties: Penalties { emergency: 20.0 },
        session_end: SessionEnd::WithinHorizon,
    }
}

/// The seeded base case shipped as `fixtures/base_case.json`.
pub fn base_case() -> ProblemInstance {
    make_base_instance(BASE_CASE_SEED)
}
