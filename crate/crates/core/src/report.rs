//! File formats shared by the command-line tool: number formatting for CSV
//! output, JSON writing and the stored-solution file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{HiringDecision, Scenario, Schedule, SCHEMA_VERSION};
use crate::error::{Error, Result};

/// Fixed six-decimal rendering, so CSV files are byte-stable.
pub fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_owned()
    } else {
        s
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    std::fs::write(path, to_json_pretty(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>, what: &'static str) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|source| Error::Parse { what, source })
}

/// A hiring decision together with the scenarios it was scheduled on and
/// one schedule per scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub solver: String,
    pub master_seed: u64,
    pub hiring: HiringDecision,
    pub objective: f64,
    pub scenarios: Vec<Scenario>,
    pub schedules: Vec<Schedule>,
}

impl SolutionFile {
    pub fn new(
        solver: impl Into<String>,
        master_seed: u64,
        hiring: HiringDecision,
        objective: f64,
        scenarios: Vec<Scenario>,
        schedules: Vec<Schedule>,
    ) -> Self {
        SolutionFile {
            schema_version: SCHEMA_VERSION,
            solver: solver.into(),
            master_seed,
            hiring,
            objective,
            scenarios,
            schedules,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path, "solution")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }
}
