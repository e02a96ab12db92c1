//! Generator for the hospital base case.
//!
//! Roster sizes, cost ranges, rates and duration distributions are fixed;
//! per-interpreter costs and outpatient languages and arrivals are seeded
//! draws persisted in the instance file, so every downstream result can be
//! reproduced from the file alone.

use std::collections::BTreeMap;

use rand::Rng;

use crate::domain::{
    Contract, DurationModel, InterpreterProfile, LanguageId, NormalDuration, PatientClass, PatientRecord,
    Penalties, PreAssignment, ProblemInstance, UniformDuration, SessionEnd, SCHEMA_VERSION,
};
use crate::rng::stream;

pub const HORIZON: u32 = 24;
pub const OUTPATIENTS: usize = 14;
pub const OUTPATIENT_PENALTY: f64 = 15.0;
pub const EMERGENCY_PENALTY: f64 = 30.0;
pub const COVERED_THRESHOLD: u32 = 8;

/// (language, full-timers, part-timers, emergency arrivals per period)
pub const LANGUAGES: [(&str, usize, usize, f64); 5] = [
    ("Hmong", 6, 6, 0.13),
    ("Russian", 1, 2, 0.013),
    ("Somalian", 1, 1, 0.050),
    ("Vietnamese", 1, 2, 0.022),
    ("Spanish", 3, 10, 0.184),
];

/// Inpatients of the day by language, each covered by a pre-assigned
/// interpreter. Spanish has one more inpatient than full-timers; the
/// first Spanish part-timer covers it.
pub const INPATIENTS: [(&str, usize); 3] = [("Spanish", 4), ("Vietnamese", 1), ("Hmong", 1)];

fn cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn slug(lang: &str) -> String {
    lang.to_lowercase()
}

pub fn make_base_instance(seed: u64) -> ProblemInstance {
    let mut rng = stream(seed, "base-case", 0);
    let all = vec![true; HORIZON as usize];
    let mut interpreters = Vec::new();
    for &(lang, ft, _, _) in &LANGUAGES {
        for k in 1..=ft {
            interpreters.push(InterpreterProfile {
                id: format!("ft-{}-{k}", slug(lang)),
                languages: [LanguageId::from(lang)].into(),
                availability: all.clone(),
                contract: Contract::FullTime {
                    regular_time: None,
                    overtime_rate: cents(rng.random_range(13.0..=17.0)),
                },
            });
        }
    }
    for &(lang, _, pt, _) in &LANGUAGES {
        for k in 1..=pt {
            interpreters.push(InterpreterProfile {
                id: format!("pt-{}-{k}", slug(lang)),
                languages: [LanguageId::from(lang)].into(),
                availability: all.clone(),
                contract: Contract::PartTime {
                    fixed_cost: cents(rng.random_range(40.0..=60.0)),
                    covered_threshold: COVERED_THRESHOLD,
                    variable_rate: cents(rng.random_range(7.0..=10.0)),
                },
            });
        }
    }

    let total_rate: f64 = LANGUAGES.iter().map(|l| l.3).sum();
    let outpatients = (1..=OUTPATIENTS)
        .map(|k| {
            let mut u = rng.random_range(0.0..total_rate);
            let mut lang = LANGUAGES[LANGUAGES.len() - 1].0;
            for &(l, _, _, rate) in &LANGUAGES {
                if u < rate {
                    lang = l;
                    break;
                }
                u -= rate;
            }
            PatientRecord {
                id: format!("op{k}"),
                class: PatientClass::Outpatient,
                language: lang.into(),
                arrival: rng.random_range(1..=HORIZON),
                duration: None,
                penalty_rate: OUTPATIENT_PENALTY,
            }
        })
        .collect();

    let mut inpatients = Vec::new();
    let mut preassignments = Vec::new();
    for &(lang, count) in &INPATIENTS {
        let ft = LANGUAGES.iter().find(|l| l.0 == lang).map_or(0, |l| l.1);
        for k in 1..=count {
            let id = format!("in{}", inpatients.len() + 1);
            let interpreter = if k <= ft {
                format!("ft-{}-{k}", slug(lang))
            } else {
                format!("pt-{}-{}", slug(lang), k - ft)
            };
            inpatients.push(PatientRecord {
                id: id.clone(),
                class: PatientClass::Inpatient,
                language: lang.into(),
                arrival: 1,
                duration: Some(HORIZON),
                penalty_rate: OUTPATIENT_PENALTY,
            });
            preassignments.push(PreAssignment { patient: id, interpreter });
        }
    }

    ProblemInstance {
        schema_version: SCHEMA_VERSION,
        horizon: HORIZON,
        languages: LANGUAGES.iter().map(|l| LanguageId::from(l.0)).collect(),
        interpreters,
        outpatients,
        inpatients,
        preassignments,
        arrival_rates: LANGUAGES
            .iter()
            .map(|l| (LanguageId::from(l.0), l.3))
            .collect::<BTreeMap<_, _>>(),
        durations: DurationModel {
            outpatient: NormalDuration { mean: 7.20, spread: 5.25 },
            emergency: UniformDuration { low: 6, high: 12 },
        },
        alpha: 2.0,
        penalties: Penalties {
            emergency: EMERGENCY_PENALTY,
        },
        session_end: SessionEnd::MayOverrun,
    }
}
