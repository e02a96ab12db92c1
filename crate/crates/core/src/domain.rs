//! Domain types for the interpreter staffing problem.
//!
//! A [`ProblemInstance`] is what planners know the evening before: the
//! roster, the scheduled outpatients, the inpatients already covered by a
//! pre-assigned interpreter, and the distributions of everything that is
//! still uncertain. A [`Scenario`] is one realization of that uncertainty.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LanguageId(pub String);

impl LanguageId {
    pub fn new(label: impl Into<String>) -> Self {
        LanguageId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LanguageId {
    fn from(s: &str) -> Self {
        LanguageId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpreterKind {
    FullTime,
    PartTime,
}

/// Employment terms. Full-timers are paid overtime beyond their regular time,
/// part-timers a hiring fee that covers `covered_threshold` periods plus a
/// variable rate beyond it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contract {
    FullTime {
        /// Defaults to the whole horizon when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        regular_time: Option<u32>,
        overtime_rate: f64,
    },
    PartTime {
        fixed_cost: f64,
        covered_threshold: u32,
        variable_rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpreterProfile {
    pub id: String,
    pub languages: BTreeSet<LanguageId>,
    /// One flag per period; an empty vector in a file means "always available".
    #[serde(default)]
    pub availability: Vec<bool>,
    #[serde(flatten)]
    pub contract: Contract,
}

impl InterpreterProfile {
    pub fn kind(&self) -> InterpreterKind {
        match self.contract {
            Contract::FullTime { .. } => InterpreterKind::FullTime,
            Contract::PartTime { .. } => InterpreterKind::PartTime,
        }
    }

    pub fn is_part_time(&self) -> bool {
        self.kind() == InterpreterKind::PartTime
    }

    pub fn speaks(&self, language: &LanguageId) -> bool {
        self.languages.contains(language)
    }

    /// Availability at 1-based period `t`.
    pub fn is_available(&self, t: u32) -> bool {
        t >= 1 && self.availability.get(t as usize - 1).copied().unwrap_or(false)
    }

    pub fn fixed_cost(&self) -> f64 {
        match self.contract {
            Contract::PartTime { fixed_cost, .. } => fixed_cost,
            Contract::FullTime { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatientClass {
    Inpatient,
    #[default]
    Outpatient,
    Emergency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: String,
    #[serde(default)]
    pub class: PatientClass,
    pub language: LanguageId,
    /// 1-based arrival period.
    pub arrival: u32,
    /// Known duration. For outpatients a known duration overrides the
    /// duration model and is used in every scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<u32>,
    pub penalty_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreAssignment {
    pub patient: String,
    pub interpreter: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalDuration {
    pub mean: f64,
    /// Standard deviation.
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformDuration {
    pub low: u32,
    pub high: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationModel {
    pub outpatient: NormalDuration,
    pub emergency: UniformDuration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    /// Waiting penalty per period charged to every emergency patient.
    pub emergency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub horizon: u32,
    pub languages: Vec<LanguageId>,
    pub interpreters: Vec<InterpreterProfile>,
    pub outpatients: Vec<PatientRecord>,
    #[serde(default)]
    pub inpatients: Vec<PatientRecord>,
    pub preassignments: Vec<PreAssignment>,
    /// Poisson emergency arrival rate per period, per language.
    pub arrival_rates: BTreeMap<LanguageId, f64>,
    pub durations: DurationModel,
    pub alpha: f64,
    pub penalties: Penalties,
    #[serde(default)]
    pub session_end: SessionEnd,
}

/// Whether a session must end inside the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionEnd {
    /// A session started at `t` with duration `d` needs `t + d - 1 <= T`.
    #[default]
    WithinHorizon,
    /// Any start in `1..=T` is allowed; the part after `T` still counts as
    /// service time but blocks nothing, since no session starts after `T`.
    MayOverrun,
}

impl ProblemInstance {
    /// Parses, fills defaults and validates an instance document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut instance: ProblemInstance =
            serde_path_to_error::deserialize(de).map_err(|source| Error::Parse {
                what: "instance",
                source,
            })?;
        instance.normalize();
        instance.validate()?;
        Ok(instance)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_pretty()?)?;
        Ok(())
    }

    /// Fills availability vectors and patient classes left implicit in files.
    pub fn normalize(&mut self) {
        let t = self.horizon as usize;
        for interp in &mut self.interpreters {
            if interp.availability.is_empty() {
                interp.availability = vec![true; t];
            }
        }
        for p in &mut self.inpatients {
            p.class = PatientClass::Inpatient;
        }
    }

    /// Checks every structural invariant and returns soft warnings
    /// (currently: patient languages nobody speaks).
    pub fn validate(&self) -> Result<Vec<String>> {
        let t = self.horizon;
        if t < 1 {
            return Err(Error::validation("horizon", "must be at least 1"));
        }
        if !(self.alpha > 1.0) {
            return Err(Error::validation("alpha", "must be greater than 1"));
        }
        let mut langs = HashSet::new();
        for (k, l) in self.languages.iter().enumerate() {
            if !langs.insert(l) {
                return Err(Error::validation(format!("languages[{k}]"), "duplicate language"));
            }
        }
        let mut ids = HashSet::new();
        for (k, interp) in self.interpreters.iter().enumerate() {
            let path = |f: &str| format!("interpreters[{k}].{f}");
            if !ids.insert(interp.id.as_str()) {
                return Err(Error::validation(path("id"), format!("duplicate id `{}`", interp.id)));
            }
            if interp.languages.is_empty() {
                return Err(Error::validation(path("languages"), "must not be empty"));
            }
            if let Some(l) = interp.languages.iter().find(|l| !langs.contains(l)) {
                return Err(Error::validation(path("languages"), format!("undeclared language `{l}`")));
            }
            if interp.availability.len() != t as usize {
                return Err(Error::validation(
                    path("availability"),
                    format!("expected {t} entries, got {}", interp.availability.len()),
                ));
            }
            let money = match interp.contract {
                Contract::FullTime { overtime_rate, .. } => vec![("overtime_rate", overtime_rate)],
                Contract::PartTime {
                    fixed_cost,
                    variable_rate,
                    ..
                } => vec![("fixed_cost", fixed_cost), ("variable_rate", variable_rate)],
            };
            for (name, v) in money {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::validation(path(name), "must be a finite non-negative amount"));
                }
            }
        }
        let mut patient_ids = HashSet::new();
        for (list, name, class) in [
            (&self.outpatients, "outpatients", PatientClass::Outpatient),
            (&self.inpatients, "inpatients", PatientClass::Inpatient),
        ] {
            for (k, p) in list.iter().enumerate() {
                let path = |f: &str| format!("{name}[{k}].{f}");
                if !patient_ids.insert(p.id.as_str()) {
                    return Err(Error::validation(path("id"), format!("duplicate id `{}`", p.id)));
                }
                if p.class != class {
                    return Err(Error::validation(path("class"), format!("expected {class:?}")));
                }
                if !langs.contains(&p.language) {
                    return Err(Error::validation(path("language"), format!("undeclared language `{}`", p.language)));
                }
                if p.arrival < 1 || p.arrival > t {
                    return Err(Error::validation(path("arrival"), format!("must lie in 1..={t}")));
                }
                if p.duration == Some(0) {
                    return Err(Error::validation(path("duration"), "must be at least 1"));
                }
                if !(p.penalty_rate >= 0.0) {
                    return Err(Error::validation(path("penalty_rate"), "must be non-negative"));
                }
            }
        }
        for (l, &rate) in &self.arrival_rates {
            if !langs.contains(l) {
                return Err(Error::validation(format!("arrival_rates.{l}"), "undeclared language"));
            }
            if !(rate >= 0.0) || !rate.is_finite() {
                return Err(Error::validation(format!("arrival_rates.{l}"), "negative rate"));
            }
        }
        let d = &self.durations;
        if !(d.outpatient.mean > 0.0) {
            return Err(Error::validation("durations.outpatient.mean", "must be positive"));
        }
        if !(d.outpatient.spread >= 0.0) {
            return Err(Error::validation("durations.outpatient.spread", "must be non-negative"));
        }
        if d.emergency.low < 1 {
            return Err(Error::validation("durations.emergency.low", "must be at least 1"));
        }
        if d.emergency.high < d.emergency.low {
            return Err(Error::validation("durations.emergency.high", "high < low"));
        }
        if !(self.penalties.emergency >= 0.0) {
            return Err(Error::validation("penalties.emergency", "must be non-negative"));
        }

        let spoken: HashSet<&LanguageId> =
            self.interpreters.iter().flat_map(|i| i.languages.iter()).collect();
        let mut warnings = Vec::new();
        for p in self.outpatients.iter().chain(&self.inpatients) {
            if !spoken.contains(&p.language) {
                warnings.push(format!("patient `{}` speaks {}, which no interpreter covers", p.id, p.language));
            }
        }
        for (l, &rate) in &self.arrival_rates {
            if rate > 0.0 && !spoken.contains(l) {
                warnings.push(format!("emergencies in {l} arrive but no interpreter covers it"));
            }
        }
        Ok(warnings)
    }

    pub fn interpreter(&self, id: &str) -> Option<&InterpreterProfile> {
        self.interpreters.iter().find(|i| i.id == id)
    }

    pub fn full_timers(&self) -> impl Iterator<Item = &InterpreterProfile> {
        self.interpreters.iter().filter(|i| !i.is_part_time())
    }

    pub fn part_timers(&self) -> impl Iterator<Item = &InterpreterProfile> {
        self.interpreters.iter().filter(|i| i.is_part_time())
    }

    pub fn emergency_penalty_rate(&self) -> f64 {
        self.penalties.emergency
    }

    pub fn arrival_rate(&self, language: &LanguageId) -> f64 {
        self.arrival_rates.get(language).copied().unwrap_or(0.0)
    }

    /// Largest admissible value of the small constant linking hiring to usage,
    /// `1 / (T · S · N)` for a sample of `scenarios` scenarios with at most
    /// `max_patients` patients each.
    pub fn epsilon_bound(&self, scenarios: usize, max_patients: usize) -> f64 {
        1.0 / (self.horizon as f64 * scenarios.max(1) as f64 * max_patients.max(1) as f64)
    }

    /// Removes inpatients and their pre-assigned interpreters. They are fully
    /// determined before the day starts and take no part in the decision.
    pub fn simplify(&self) -> Result<ProblemInstance> {
        let mut taken_interp = HashSet::new();
        let mut taken_patient = HashSet::new();
        for pa in &self.preassignments {
            let interp = self
                .interpreter(&pa.interpreter)
                .ok_or_else(|| Error::UnknownInterpreter(pa.interpreter.clone()))?;
            let patient = self
                .inpatients
                .iter()
                .find(|p| p.id == pa.patient)
                .ok_or_else(|| Error::UnknownPatient(pa.patient.clone()))?;
            if !taken_interp.insert(pa.interpreter.as_str()) {
                return Err(Error::DuplicatePreassignment(pa.interpreter.clone()));
            }
            if !taken_patient.insert(pa.patient.as_str()) {
                return Err(Error::DuplicatePreassignment(pa.patient.clone()));
            }
            if !derive_skill(interp, patient) {
                return Err(Error::validation(
                    format!("preassignments[{}]", pa.patient),
                    format!("`{}` does not speak {}", interp.id, patient.language),
                ));
            }
        }
        let mut out = self.clone();
        out.interpreters.retain(|i| !taken_interp.contains(i.id.as_str()));
        out.inpatients.clear();
        out.preassignments.clear();
        Ok(out)
    }
}

/// Free function form of [`ProblemInstance::simplify`].
pub fn simplify_instance(raw: &ProblemInstance) -> Result<ProblemInstance> {
    raw.simplify()
}

/// Whether the interpreter has the language skill the patient needs.
/// Availability is a separate constraint.
pub fn derive_skill(interpreter: &InterpreterProfile, patient: &PatientRecord) -> bool {
    interpreter.speaks(&patient.language)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiringGroup {
    pub languages: Vec<LanguageId>,
    pub start: usize,
    pub end: usize,
}

impl HiringGroup {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn label(&self) -> String {
        self.languages
            .iter()
            .map(LanguageId::as_str)
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// First-stage decision: one bit per part-timer, ordered so that part-timers
/// with the same language set are contiguous.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiringDecision {
    /// Part-timer ids in bit order.
    pub members: Vec<String>,
    pub groups: Vec<HiringGroup>,
    pub bits: Vec<bool>,
}

impl HiringDecision {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Same layout, different bits.
    pub fn with_bits(&self, bits: Vec<bool>) -> Result<HiringDecision> {
        if bits.len() != self.members.len() {
            return Err(Error::validation(
                "bits",
                format!("expected {} bits, got {}", self.members.len(), bits.len()),
            ));
        }
        Ok(HiringDecision {
            members: self.members.clone(),
            groups: self.groups.clone(),
            bits,
        })
    }

    pub fn hired_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_hired(&self, id: &str) -> bool {
        self.members
            .iter()
            .position(|m| m == id)
            .is_some_and(|k| self.bits[k])
    }

    /// Hired count per language-set group, keyed by the group label.
    pub fn group_counts(&self) -> BTreeMap<String, usize> {
        self.groups
            .iter()
            .map(|g| (g.label(), self.bits[g.range()].iter().filter(|&&b| b).count()))
            .collect()
    }

    /// Bits as a `0`/`1` string, e.g. `"1010"`.
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
        s.chars()
            .filter(|c| !matches!(c, ',' | ' ' | '_'))
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::validation("bits", format!("unexpected character `{other}`"))),
            })
            .collect()
    }

    pub fn fixed_cost(&self, instance: &ProblemInstance) -> f64 {
        self.members
            .iter()
            .zip(&self.bits)
            .filter(|(_, &b)| b)
            .filter_map(|(id, _)| instance.interpreter(id))
            .map(InterpreterProfile::fixed_cost)
            .sum()
    }
}

/// Orders part-timers by language set (single-language sets first, then by
/// cardinality, then lexicographically) and, within a set, by fixed cost
/// and id. Returns an all-false decision with the group boundaries set.
pub fn group_part_timers(instance: &ProblemInstance) -> HiringDecision {
    let mut pts: Vec<&InterpreterProfile> = instance.part_timers().collect();
    pts.sort_by(|a, b| {
        let la: Vec<&LanguageId> = a.languages.iter().collect();
        let lb: Vec<&LanguageId> = b.languages.iter().collect();
        la.len()
            .cmp(&lb.len())
            .then_with(|| la.cmp(&lb))
            .then_with(|| a.fixed_cost().total_cmp(&b.fixed_cost()))
            .then_with(|| a.id.cmp(&b.id))
    });
    let mut groups: Vec<HiringGroup> = Vec::new();
    for (k, p) in pts.iter().enumerate() {
        let langs: Vec<LanguageId> = p.languages.iter().cloned().collect();
        match groups.last_mut() {
            Some(g) if g.languages == langs => g.end = k + 1,
            _ => groups.push(HiringGroup {
                languages: langs,
                start: k,
                end: k + 1,
            }),
        }
    }
    HiringDecision {
        members: pts.iter().map(|p| p.id.clone()).collect(),
        groups,
        bits: vec![false; pts.len()],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub emergency_patients: Vec<PatientRecord>,
    /// Realized duration of every outpatient, by patient id.
    pub outpatient_durations: BTreeMap<String, u32>,
    pub probability: f64,
}

impl Scenario {
    pub fn patient_count(&self, instance: &ProblemInstance) -> usize {
        instance.outpatients.len() + self.emergency_patients.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub patient: String,
    /// `None` means the patient is not served within the horizon.
    pub interpreter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<u32>,
}

impl Assignment {
    pub fn served(patient: impl Into<String>, interpreter: impl Into<String>, start: u32) -> Self {
        Assignment {
            patient: patient.into(),
            interpreter: Some(interpreter.into()),
            start: Some(start),
        }
    }

    pub fn unserved(patient: impl Into<String>) -> Self {
        Assignment {
            patient: patient.into(),
            interpreter: None,
            start: None,
        }
    }

    pub fn is_served(&self) -> bool {
        self.interpreter.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub assignments: Vec<Assignment>,
}

impl Schedule {
    pub fn new(assignments: Vec<Assignment>) -> Self {
        Schedule { assignments }
    }

    pub fn get(&self, patient: &str) -> Option<&Assignment> {
        self.assignments.iter().find(|a| a.patient == patient)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScheduleCosting {
    pub per_patient_wait: BTreeMap<String, f64>,
    pub per_interpreter_load: BTreeMap<String, u32>,
    pub per_interpreter_overtime: BTreeMap<String, u32>,
    pub per_parttimer_extra: BTreeMap<String, u32>,
    pub fixed_cost: f64,
    pub variable_cost: f64,
    pub overtime_cost: f64,
    pub penalty_cost: f64,
    pub total: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;

    fn interp(id: &str, langs: &[&str], fixed: f64) -> InterpreterProfile {
        InterpreterProfile {
            id: id.into(),
            languages: langs.iter().map(|&l| LanguageId::from(l)).collect(),
            availability: vec![true; 4],
            contract: Contract::PartTime {
                fixed_cost: fixed,
                covered_threshold: 1,
                variable_rate: 1.0,
            },
        }
    }

    fn patient(lang: &str) -> PatientRecord {
        PatientRecord {
            id: "n".into(),
            class: PatientClass::Outpatient,
            language: lang.into(),
            arrival: 1,
            duration: Some(1),
            penalty_rate: 1.0,
        }
    }

    fn with_inpatient() -> ProblemInstance {
        let mut inst = t1();
        inst.interpreters.push(InterpreterProfile {
            id: "f_a".into(),
            languages: [LanguageId::from("L1")].into(),
            availability: vec![true; 4],
            contract: Contract::FullTime {
                regular_time: None,
                overtime_rate: 10.0,
            },
        });
        inst.inpatients.push(PatientRecord {
            id: "i1".into(),
            class: PatientClass::Inpatient,
            language: "L1".into(),
            arrival: 1,
            duration: Some(4),
            penalty_rate: 15.0,
        });
        inst.preassignments.push(PreAssignment {
            patient: "i1".into(),
            interpreter: "f_a".into(),
        });
        inst
    }

    #[test]
    fn simplify_removes_preassigned_pair() {
        let raw = with_inpatient();
        let s = raw.simplify().unwrap();
        assert!(s.interpreter("f_a").is_none());
        assert!(s.inpatients.is_empty());
        assert!(s.preassignments.is_empty());
        assert_eq!(s, t1());
        // original untouched
        assert!(raw.interpreter("f_a").is_some());
    }

    #[test]
    fn simplify_identity_without_preassignments() {
        assert_eq!(t1().simplify().unwrap(), t1());
    }

    #[test]
    fn simplify_is_idempotent() {
        let once = with_inpatient().simplify().unwrap();
        assert_eq!(once.simplify().unwrap(), once);
    }

    #[test]
    fn simplify_rejects_bad_preassignments() {
        let mut raw = with_inpatient();
        raw.preassignments[0].interpreter = "ghost".into();
        let err = raw.simplify().unwrap_err();
        assert!(err.to_string().contains("unknown interpreter id"), "{err}");

        let mut raw = with_inpatient();
        raw.preassignments[0].patient = "nobody".into();
        assert!(matches!(raw.simplify(), Err(Error::UnknownPatient(_))));

        let mut raw = with_inpatient();
        raw.inpatients.push(PatientRecord {
            id: "i2".into(),
            ..raw.inpatients[0].clone()
        });
        raw.preassignments.push(PreAssignment {
            patient: "i2".into(),
            interpreter: "f_a".into(),
        });
        assert!(matches!(raw.simplify(), Err(Error::DuplicatePreassignment(_))));
    }

    #[test]
    fn skill_is_language_membership() {
        let a = interp("a", &["Spanish", "Hmong"], 1.0);
        let b = interp("b", &["Russian"], 1.0);
        assert!(derive_skill(&a, &patient("Spanish")));
        assert!(!derive_skill(&b, &patient("Spanish")));
        let mut off = interp("c", &["Spanish"], 1.0);
        off.availability = vec![false; 4];
        assert!(derive_skill(&off, &patient("Spanish")));
    }

    #[test]
    fn grouping_places_multilingual_sets_last() {
        let mut inst = t1();
        inst.languages.push("L2".into());
        inst.interpreters = vec![
            interp("a", &["L1"], 5.0),
            interp("b", &["L2"], 5.0),
            interp("c", &["L1"], 3.0),
            interp("d", &["L1", "L2"], 1.0),
        ];
        let w = group_part_timers(&inst);
        assert_eq!(w.members, ["c", "a", "b", "d"]);
        let ranges: Vec<_> = w.groups.iter().map(HiringGroup::range).collect();
        assert_eq!(ranges, [0..2, 2..3, 3..4]);
        assert!(w.bits.iter().all(|b| !b));
    }

    #[test]
    fn grouping_edge_cases() {
        let w = group_part_timers(&t1());
        assert_eq!(w.groups.len(), 1);
        assert_eq!(w.groups[0].range(), 0..2);
        assert_eq!(w.members, ["p1", "p2"]);

        let mut none = t1();
        none.interpreters.retain(|i| !i.is_part_time());
        let w = group_part_timers(&none);
        assert!(w.is_empty() && w.groups.is_empty());
    }

    #[test]
    fn file_errors_carry_field_paths() {
        let mut v: serde_json::Value = serde_json::from_str(&t1().to_json_pretty().unwrap()).unwrap();
        v["interpreters"][1]["fixed_cost"] = serde_json::json!("cheap");
        let err = ProblemInstance::from_json_str(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("interpreters[1]"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(&t1().to_json_pretty().unwrap()).unwrap();
        v["interpreters"][0]["languages"] = serde_json::json!([]);
        let err = ProblemInstance::from_json_str(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("interpreters[0].languages"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(&t1().to_json_pretty().unwrap()).unwrap();
        v["alpha"] = serde_json::json!(1.0);
        assert!(ProblemInstance::from_json_str(&v.to_string()).is_err());
    }

    #[test]
    fn json_round_trip_and_default_availability() {
        let text = t1().to_json_pretty().unwrap();
        assert_eq!(ProblemInstance::from_json_str(&text).unwrap(), t1());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["interpreters"][0].as_object_mut().unwrap().remove("availability");
        let parsed = ProblemInstance::from_json_str(&v.to_string()).unwrap();
        assert_eq!(parsed.interpreters[0].availability, vec![true; 4]);
    }

    #[test]
    fn epsilon_bound_respects_product() {
        let inst = t1();
        let eps = inst.epsilon_bound(3, 5);
        assert!(eps * (4.0 * 3.0 * 5.0) <= 1.0 + 1e-12);
    }

    #[test]
    fn uncovered_language_is_a_warning() {
        let mut inst = t1();
        inst.languages.push("L9".into());
        inst.outpatients[0].language = "L9".into();
        let warnings = inst.validate().unwrap();
        assert_eq!(warnings.len(), 1);
    }
}
