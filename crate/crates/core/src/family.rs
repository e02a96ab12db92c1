//! Seeded grid of tiny instances with brute-force optima, used to check
//! the exact solver and the greedy heuristic against exhaustive search.
//!
//! Every member has one full-timer and up to `max_part_timers`
//! part-timers, at most `max_patients` patients per scenario and at most
//! `max_scenarios` explicit scenarios. Costs, penalties, language mixes,
//! availabilities and the session-end rule vary with the seed.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    Contract, DurationModel, InterpreterProfile, LanguageId, NormalDuration, PatientClass, PatientRecord,
    Penalties, ProblemInstance, Scenario, SessionEnd, UniformDuration, SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::fixtures::t1;
use crate::oracle::{brute_force_saa, oracle_version};
use crate::report::{read_json, write_json};
use crate::rng::stream;
use crate::scenario::expected_scenario;

/// Default seed of the shipped `fixtures/family.json`.
pub const FAMILY_SEED: u64 = 2024;

const HORIZONS: [u32; 3] = [2, 4, 6];
const REPLICATES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyLimits {
    pub max_part_timers: usize,
    pub max_patients: usize,
    pub max_horizon: u32,
    pub max_scenarios: usize,
}

impl Default for FamilyLimits {
    fn default() -> Self {
        FamilyLimits {
            max_part_timers: 2,
            max_patients: 4,
            max_horizon: 6,
            max_scenarios: 2,
        }
    }
}

impl FamilyLimits {
    /// Largest limits that brute force still handles in seconds.
    pub const BUDGET: FamilyLimits = FamilyLimits {
        max_part_timers: 2,
        max_patients: 4,
        max_horizon: 6,
        max_scenarios: 2,
    };

    pub fn check(&self) -> Result<()> {
        let b = Self::BUDGET;
        if self.max_part_timers > b.max_part_timers
            || self.max_patients > b.max_patients
            || self.max_horizon > b.max_horizon
            || self.max_scenarios > b.max_scenarios
        {
            return Err(Error::SizeGuard(format!(
                "family limits {self:?} exceed the enumeration budget {b:?}"
            )));
        }
        if self.max_scenarios < 1 {
            return Err(Error::validation("max_scenarios", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredOptimum {
    pub bits: Vec<bool>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub name: String,
    pub instance: ProblemInstance,
    pub scenarios: Vec<Scenario>,
    pub optimum: StoredOptimum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureFamily {
    pub schema_version: u32,
    pub seed: u64,
    pub limits: FamilyLimits,
    /// Hash of the enumerator that produced the stored optima.
    pub oracle_version: String,
    pub members: Vec<FamilyMember>,
}

impl FixtureFamily {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path, "fixture family")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }
}

fn pick_languages(rng: &mut ChaCha12Rng, langs: &[LanguageId]) -> Vec<LanguageId> {
    if langs.len() > 1 && rng.random_bool(0.25) {
        langs.to_vec()
    } else {
        vec![langs.choose(rng).expect("non-empty").clone()]
    }
}

fn availability(rng: &mut ChaCha12Rng, horizon: u32) -> Vec<bool> {
    if rng.random_bool(0.6) {
        vec![true; horizon as usize]
    } else {
        (0..horizon).map(|_| rng.random_bool(0.75)).collect()
    }
}

/// One random member: a full-timer, `n_pt` part-timers, `patients`
/// patients per scenario split between outpatients and emergencies, and
/// `n_scenarios` equally weighted scenarios.
pub fn random_member(
    seed: u64,
    index: u64,
    n_pt: usize,
    patients: usize,
    horizon: u32,
    n_scenarios: usize,
) -> (ProblemInstance, Vec<Scenario>) {
    let mut rng = stream(seed, "family", index);
    let languages: Vec<LanguageId> = if rng.random_bool(0.5) {
        vec!["L1".into()]
    } else {
        vec!["L1".into(), "L2".into()]
    };
    let mut interpreters = vec![InterpreterProfile {
        id: "f1".into(),
        languages: pick_languages(&mut rng, &languages).into_iter().collect(),
        availability: availability(&mut rng, horizon),
        contract: Contract::FullTime {
            regular_time: Some(rng.random_range(0..=horizon)),
            overtime_rate: rng.random_range(5..=15) as f64,
        },
    }];
    for k in 1..=n_pt {
        interpreters.push(InterpreterProfile {
            id: format!("p{k}"),
            languages: pick_languages(&mut rng, &languages).into_iter().collect(),
            availability: availability(&mut rng, horizon),
            contract: Contract::PartTime {
                fixed_cost: rng.random_range(0..=40) as f64,
                covered_threshold: rng.random_range(0..=horizon),
                variable_rate: rng.random_range(1..=10) as f64,
            },
        });
    }
    let n_out = rng.random_range(0..=patients);
    let outpatients: Vec<PatientRecord> = (1..=n_out)
        .map(|k| PatientRecord {
            id: format!("n{k}"),
            class: PatientClass::Outpatient,
            language: languages.choose(&mut rng).expect("non-empty").clone(),
            arrival: rng.random_range(1..=horizon),
            duration: None,
            penalty_rate: rng.random_range(1..=20) as f64,
        })
        .collect();
    let emergency_penalty = rng.random_range(1..=30) as f64;
    let session_end = if rng.random_bool(0.5) {
        SessionEnd::WithinHorizon
    } else {
        SessionEnd::MayOverrun
    };
    let instance = ProblemInstance {
        schema_version: SCHEMA_VERSION,
        horizon,
        languages: languages.clone(),
        interpreters,
        outpatients,
        inpatients: vec![],
        preassignments: vec![],
        arrival_rates: languages.iter().map(|l| (l.clone(), 0.1)).collect::<BTreeMap<_, _>>(),
        durations: DurationModel {
            outpatient: NormalDuration {
                mean: 1.5,
                spread: 1.0,
            },
            emergency: UniformDuration { low: 1, high: horizon.min(3) },
        },
        alpha: rng.random_range(12..=30) as f64 / 10.0,
        penalties: Penalties {
            emergency: emergency_penalty,
        },
        session_end,
    };
    let p = 1.0 / n_scenarios as f64;
    let scenarios = (0..n_scenarios)
        .map(|_| Scenario {
            emergency_patients: (1..=patients - n_out)
                .map(|k| PatientRecord {
                    id: format!("E{k}"),
                    class: PatientClass::Emergency,
                    language: languages.choose(&mut rng).expect("non-empty").clone(),
                    arrival: rng.random_range(1..=horizon),
                    duration: Some(rng.random_range(1..=horizon.min(3))),
                    penalty_rate: emergency_penalty,
                })
                .collect(),
            outpatient_durations: instance
                .outpatients
                .iter()
                .map(|o| (o.id.clone(), rng.random_range(1..=horizon.min(3))))
                .collect(),
            probability: p,
        })
        .collect();
    (instance, scenarios)
}

/// The grid of (part-timers, patients, horizon, replicate) members within
/// `limits`, plus T1 with its single scenario, each paired with its
/// brute-force optimum.
pub fn generate_fixture_family(limits: &FamilyLimits, seed: u64) -> Result<FixtureFamily> {
    limits.check()?;
    let mut grid = Vec::new();
    for n_pt in 0..=limits.max_part_timers {
        for patients in 0..=limits.max_patients {
            for &horizon in HORIZONS.iter().filter(|&&h| h <= limits.max_horizon) {
                for rep in 0..REPLICATES {
                    let n_scenarios = (rep + 1).min(limits.max_scenarios);
                    grid.push((n_pt, patients, horizon, rep, n_scenarios));
                }
            }
        }
    }
    let mut members: Vec<(String, ProblemInstance, Vec<Scenario>)> = Vec::new();
    let t1 = t1();
    let t1_sc = vec![expected_scenario(&t1)];
    members.push(("t1".into(), t1, t1_sc));
    for (index, &(n_pt, patients, horizon, rep, n_scenarios)) in grid.iter().enumerate() {
        let (instance, scenarios) = random_member(seed, index as u64, n_pt, patients, horizon, n_scenarios);
        members.push((format!("pt{n_pt}-n{patients}-t{horizon}-r{rep}"), instance, scenarios));
    }
    use rayon::prelude::*;
    let members = members
        .into_par_iter()
        .map(|(name, instance, scenarios)| {
            instance.validate()?;
            let (bits, objective) = brute_force_saa(&instance, &scenarios)?;
            Ok(FamilyMember {
                name,
                instance,
                scenarios,
                optimum: StoredOptimum { bits, objective },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FixtureFamily {
        schema_version: SCHEMA_VERSION,
        seed,
        limits: *limits,
        oracle_version: oracle_version(),
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn over_budget_is_refused() {
        let big = FamilyLimits {
            max_patients: 5,
            ..FamilyLimits::default()
        };
        assert!(generate_fixture_family(&big, 1).unwrap_err().is_size_guard());
    }

    #[test]
    fn small_family_contains_t1_and_is_reproducible() {
        let limits = FamilyLimits {
            max_part_timers: 2,
            max_patients: 2,
            max_horizon: 4,
            max_scenarios: 1,
        };
        let a = generate_fixture_family(&limits, 5).unwrap();
        assert!(a.members.iter().any(|m| m.instance == t1()));
        assert_eq!(a.members.len(), 1 + 3 * 3 * 2 * 2);
        let b = generate_fixture_family(&limits, 5).unwrap();
        assert_eq!(a, b);
        let t1m = &a.members[0];
        assert_eq!((t1m.optimum.bits.clone(), t1m.optimum.objective), (vec![true, false], 20.0));
    }
}
