//! Monte Carlo scenario sampling and the expected-value scenario.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{PatientClass, PatientRecord, ProblemInstance, Scenario, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Stream purpose used by [`sample_batch`].
pub const SAMPLE_PURPOSE: &str = "sample";

/// Rounds a continuous duration draw to whole periods and clamps it into
/// `[1, horizon]`.
pub fn clamp_round_duration(x: f64, horizon: u32) -> u32 {
    let r = x.round();
    if r.is_nan() || r < 1.0 {
        1
    } else if r > horizon as f64 {
        horizon
    } else {
        r as u32
    }
}

fn check_distributions(instance: &ProblemInstance) -> Result<()> {
    for (l, &rate) in &instance.arrival_rates {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::validation(format!("arrival_rates.{l}"), "negative rate"));
        }
    }
    let e = instance.durations.emergency;
    if e.high < e.low {
        return Err(Error::validation("durations.emergency.high", "high < low"));
    }
    Ok(())
}

fn emergency_id(k: usize) -> String {
    format!("E{k}")
}

/// Draws one scenario from the stream.
///
/// Emergencies: for every language and period, a Poisson count of arrivals,
/// each with a discrete-uniform duration. Outpatients: a normal draw
/// rounded and clamped to `[1, T]`, unless the record carries a known
/// duration.
pub fn sample_scenario(instance: &ProblemInstance, stream: &RandomStream) -> Result<Scenario> {
    check_distributions(instance)?;
    let mut rng = stream.rng();
    let horizon = instance.horizon;
    let em = instance.durations.emergency;
    let mut emergency_patients = Vec::new();
    for (language, &rate) in &instance.arrival_rates {
        if rate <= 0.0 {
            continue;
        }
        let poisson = Poisson::new(rate).map_err(|e| Error::validation(format!("arrival_rates.{language}"), e.to_string()))?;
        for t in 1..=horizon {
            let k = poisson.sample(&mut rng) as usize;
            for _ in 0..k {
                let d: u32 = rng.random_range(em.low..=em.high);
                emergency_patients.push(PatientRecord {
                    id: emergency_id(emergency_patients.len() + 1),
                    class: PatientClass::Emergency,
                    language: language.clone(),
                    arrival: t,
                    duration: Some(d.clamp(1, horizon)),
                    penalty_rate: instance.emergency_penalty_rate(),
                });
            }
        }
    }
    let op = instance.durations.outpatient;
    let normal = Normal::new(op.mean, op.spread)
        .map_err(|e| Error::validation("durations.outpatient", e.to_string()))?;
    let mut outpatient_durations = BTreeMap::new();
    for p in &instance.outpatients {
        let d = match p.duration {
            Some(d) => d,
            None => clamp_round_duration(normal.sample(&mut rng), horizon),
        };
        outpatient_durations.insert(p.id.clone(), d);
    }
    Ok(Scenario {
        emergency_patients,
        outpatient_durations,
        probability: 1.0,
    })
}

/// `count` scenarios on streams `(purpose, i)`, each weighted `1 / count`.
pub fn sample_batch_with(
    instance: &ProblemInstance,
    count: usize,
    master_seed: u64,
    purpose: &str,
) -> Result<Vec<Scenario>> {
    if count < 1 {
        return Err(Error::validation("S", "sample size must be at least 1"));
    }
    let p = 1.0 / count as f64;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut s = sample_scenario(instance, &RandomStream::new(master_seed, purpose, i as u64))?;
            s.probability = p;
            Ok(s)
        })
        .collect()
}

pub fn sample_batch(instance: &ProblemInstance, count: usize, master_seed: u64) -> Result<Vec<Scenario>> {
    sample_batch_with(instance, count, master_seed, SAMPLE_PURPOSE)
}

/// Arrival periods for `k` evenly spread arrivals over `1..=horizon`:
/// `ceil((2i - 1) T / 2k)` for `i = 1..=k`.
pub fn even_spread(k: u32, horizon: u32) -> Vec<u32> {
    (1..=k)
        .map(|i| {
            let num = (2 * i as u64 - 1) * horizon as u64;
            let den = 2 * k as u64;
            num.div_ceil(den) as u32
        })
        .collect()
}

/// The scenario in which every random quantity takes its expected value.
pub fn expected_scenario(instance: &ProblemInstance) -> Scenario {
    let horizon = instance.horizon;
    let em = instance.durations.emergency;
    let em_duration = clamp_round_duration((em.low + em.high) as f64 / 2.0, horizon);
    let mut emergency_patients = Vec::new();
    for (language, &rate) in &instance.arrival_rates {
        let k = (rate * horizon as f64).round().max(0.0) as u32;
        for t in even_spread(k, horizon) {
            emergency_patients.push(PatientRecord {
                id: emergency_id(emergency_patients.len() + 1),
                class: PatientClass::Emergency,
                language: language.clone(),
                arrival: t,
                duration: Some(em_duration),
                penalty_rate: instance.emergency_penalty_rate(),
            });
        }
    }
    let op_duration = clamp_round_duration(instance.durations.outpatient.mean, horizon);
    let outpatient_durations = instance
        .outpatients
        .iter()
        .map(|p| (p.id.clone(), p.duration.unwrap_or(op_duration)))
        .collect();
    Scenario {
        emergency_patients,
        outpatient_durations,
        probability: 1.0,
    }
}

/// Persisted scenario batch, so that experiments can be re-run bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBatch {
    pub schema_version: u32,
    pub master_seed: u64,
    pub purpose: String,
    pub scenarios: Vec<Scenario>,
}

impl ScenarioBatch {
    pub fn sample(instance: &ProblemInstance, count: usize, master_seed: u64) -> Result<Self> {
        Ok(ScenarioBatch {
            schema_version: SCHEMA_VERSION,
            master_seed,
            purpose: SAMPLE_PURPOSE.to_owned(),
            scenarios: sample_batch(instance, count, master_seed)?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|source| Error::Parse {
            what: "scenario batch",
            source,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}
