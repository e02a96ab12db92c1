//! Tabu search over hiring vectors.
//!
//! A candidate's fitness is its greedy-schedule expected cost on one fixed
//! scenario batch drawn at the start of the run, so every comparison inside
//! a run sees the same scenarios. Neighbors swap two positions inside each
//! language group, which keeps the per-group hire count; only
//! diversification (and the optional bit-flip move) changes the counts.

use std::collections::{HashMap, VecDeque};
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{group_part_timers, HiringDecision, ProblemInstance, Scenario};
use crate::error::{Error, Result};
use crate::exact::{solve_saa_exact_with, ExactLimits};
use crate::hestof::{FitnessBatch, SelectionPolicy};
use crate::rng::stream;
use crate::scenario::sample_batch_with;

pub const FITNESS_PURPOSE: &str = "ts-fitness";
const INIT_PURPOSE: &str = "ts-init";
const DIVERSIFY_PURPOSE: &str = "ts-diversify";
const RANDOM_PURPOSE: &str = "ts-random";
const SEARCH_PURPOSE: &str = "ts-search";

/// Random vectors tried when the exact solver cannot take the small batch.
pub const RANDOM_STARTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsParams {
    pub iterations: usize,
    pub tabu_length: usize,
    pub diversification_prob: f64,
    pub neighborhood_size: usize,
    pub fitness_sample_size: usize,
    pub init_sample_size: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub policy: SelectionPolicy,
    /// Adds every single-bit flip to the neighborhood. Off by default;
    /// with it on, neighbors may change the hire counts.
    #[serde(default)]
    pub bit_flip_moves: bool,
    #[serde(default)]
    pub exact_limits: ExactLimits,
}

impl Default for TsParams {
    fn default() -> Self {
        TsParams {
            iterations: 100,
            tabu_length: 30,
            diversification_prob: 0.05,
            neighborhood_size: 20,
            fitness_sample_size: 50,
            init_sample_size: 5,
            master_seed: 1,
            policy: SelectionPolicy::default(),
            bit_flip_moves: false,
            exact_limits: ExactLimits::default(),
        }
    }
}

impl TsParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("iterations", self.iterations),
            ("tabu_length", self.tabu_length),
            ("neighborhood_size", self.neighborhood_size),
            ("fitness_sample_size", self.fitness_sample_size),
            ("init_sample_size", self.init_sample_size),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::validation(name, "must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.diversification_prob) {
            return Err(Error::validation("diversification_prob", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Fixed-capacity FIFO of visited bit vectors.
#[derive(Debug, Clone)]
pub struct TabuMemory {
    capacity: usize,
    entries: VecDeque<Vec<bool>>,
}

impl TabuMemory {
    pub fn new(capacity: usize) -> Self {
        TabuMemory {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, bits: Vec<bool>) {
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(bits);
    }

    pub fn contains(&self, bits: &[bool]) -> bool {
        self.entries.iter().any(|e| e == bits)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub current_fitness: f64,
    pub best_fitness: f64,
    pub diversified: bool,
    /// Whether the current solution was replaced (moved or diversified).
    pub moved: bool,
    /// Current solution as a bit string.
    pub current: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsResult {
    /// Best vector seen, minus any hire the greedy schedules never use.
    pub hiring: HiringDecision,
    pub best_fitness: f64,
    /// Row 0 is the initial solution.
    pub trace: Vec<TraceRow>,
}

/// Solution of a small batch: exact when the guards allow, else the best of
/// [`RANDOM_STARTS`] random vectors under greedy fitness on that batch.
fn solve_small(
    instance: &ProblemInstance,
    layout: &HiringDecision,
    batch: &[Scenario],
    params: &TsParams,
    random_index: u64,
) -> Result<HiringDecision> {
    if params.exact_limits.admits(instance, batch) {
        return Ok(solve_saa_exact_with(instance, batch, &params.exact_limits)?.hiring);
    }
    let mut rng = stream(params.master_seed, RANDOM_PURPOSE, random_index);
    let candidates: Vec<Vec<bool>> = (0..RANDOM_STARTS)
        .map(|_| {
            let density: f64 = rng.random();
            (0..layout.len()).map(|_| rng.random_bool(density)).collect()
        })
        .collect();
    let fb = FitnessBatch::new(instance, layout, batch, params.policy)?;
    let scored: Vec<(f64, Vec<bool>)> = candidates.into_iter().map(|b| (fb.fitness(&b), b)).collect();
    let best = pick_best(scored).expect("non-empty candidate list");
    layout.with_bits(best.1)
}

/// Lowest fitness, ties to the lexicographically smallest bits.
fn pick_best(scored: Vec<(f64, Vec<bool>)>) -> Option<(f64, Vec<bool>)> {
    scored
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
}

/// Starting point of a run: sample `init_sample_size` scenarios and solve
/// that small sampled problem.
pub fn initial_solution(instance: &ProblemInstance, params: &TsParams) -> Result<HiringDecision> {
    params.validate()?;
    let layout = group_part_timers(instance);
    let batch = sample_batch_with(instance, params.init_sample_size, params.master_seed, INIT_PURPOSE)?;
    solve_small(instance, &layout, &batch, params, 0)
}

/// Up to `neighborhood_size` distinct candidates, each obtained by one
/// random two-position swap inside every group of size at least two.
/// Duplicates and `w` itself are dropped; generation order is kept.
pub fn neighbors(w: &HiringDecision, params: &TsParams, rng: &mut impl Rng) -> Vec<HiringDecision> {
    let mut out: Vec<Vec<bool>> = Vec::new();
    let swappable = w.groups.iter().any(|g| g.len() >= 2);
    if swappable {
        for _ in 0..params.neighborhood_size {
            let mut bits = w.bits.clone();
            for g in w.groups.iter().filter(|g| g.len() >= 2) {
                let a = rng.random_range(g.start..g.end);
                let mut b = rng.random_range(g.start..g.end - 1);
                if b >= a {
                    b += 1;
                }
                bits.swap(a, b);
            }
            if bits != w.bits && !out.contains(&bits) {
                out.push(bits);
            }
        }
    }
    if params.bit_flip_moves {
        for k in 0..w.len() {
            let mut bits = w.bits.clone();
            bits[k] = !bits[k];
            if !out.contains(&bits) {
                out.push(bits);
            }
        }
    }
    out.into_iter()
        .map(|bits| HiringDecision {
            members: w.members.clone(),
            groups: w.groups.clone(),
            bits,
        })
        .collect()
}

/// The fixed fitness batch of a run with these parameters.
pub fn fitness_scenarios(instance: &ProblemInstance, params: &TsParams) -> Result<Vec<Scenario>> {
    sample_batch_with(instance, params.fitness_sample_size, params.master_seed, FITNESS_PURPOSE)
}

pub fn run_ts(instance: &ProblemInstance, params: &TsParams) -> Result<TsResult> {
    params.validate()?;
    let batch = fitness_scenarios(instance, params)?;
    run_ts_with(instance, params, &batch, None, None)
}

/// Tabu search on a given fitness batch.
///
/// `small_batch` replaces the freshly sampled batches used for the initial
/// solution and for diversification (the expected-value problem passes its
/// single scenario here); `start` overrides the initial solution.
pub fn run_ts_with(
    instance: &ProblemInstance,
    params: &TsParams,
    batch: &[Scenario],
    small_batch: Option<&[Scenario]>,
    start: Option<Vec<bool>>,
) -> Result<TsResult> {
    params.validate()?;
    let layout = group_part_timers(instance);
    let fb = FitnessBatch::new(instance, &layout, batch, params.policy)?;
    let mut cache: HashMap<Vec<bool>, f64> = HashMap::new();

    let small = |k: u64| -> Result<HiringDecision> {
        match small_batch {
            Some(b) => solve_small(instance, &layout, b, params, k),
            None => {
                let purpose = if k == 0 {
                    INIT_PURPOSE.to_owned()
                } else {
                    format!("{DIVERSIFY_PURPOSE}/{k}")
                };
                let b = sample_batch_with(instance, params.init_sample_size, params.master_seed, &purpose)?;
                solve_small(instance, &layout, &b, params, k)
            }
        }
    };

    let mut current = match start {
        Some(bits) => layout.with_bits(bits)?,
        None => small(0)?,
    };
    let mut current_fit = *cache
        .entry(current.bits.clone())
        .or_insert_with(|| fb.fitness(&current.bits));
    let mut best = (current_fit, current.bits.clone());
    let mut tabu = TabuMemory::new(params.tabu_length);
    tabu.push(current.bits.clone());
    let mut trace = vec![TraceRow {
        iteration: 0,
        current_fitness: current_fit,
        best_fitness: best.0,
        diversified: false,
        moved: true,
        current: current.bit_string(),
    }];
    let mut rng = stream(params.master_seed, SEARCH_PURPOSE, 0);

    for it in 1..=params.iterations {
        let diversify = rng.random_bool(params.diversification_prob);
        let mut moved = diversify;
        if diversify {
            current = small(it as u64)?;
            current_fit = *cache
                .entry(current.bits.clone())
                .or_insert_with(|| fb.fitness(&current.bits));
            tabu.push(current.bits.clone());
        } else {
            let candidates: Vec<HiringDecision> = neighbors(&current, params, &mut rng)
                .into_iter()
                .filter(|c| !tabu.contains(&c.bits))
                .collect();
            let fresh: Vec<&Vec<bool>> = candidates
                .iter()
                .map(|c| &c.bits)
                .filter(|b| !cache.contains_key(*b))
                .collect();
            let scores: Vec<f64> = fresh.par_iter().map(|b| fb.fitness(b)).collect();
            for (b, s) in fresh.into_iter().zip(scores) {
                cache.insert(b.clone(), s);
            }
            let scored = candidates.iter().map(|c| (cache[&c.bits], c.bits.clone())).collect();
            if let Some((f, bits)) = pick_best(scored) {
                current = layout.with_bits(bits)?;
                current_fit = f;
                tabu.push(current.bits.clone());
                moved = true;
            }
        }
        if current_fit < best.0 {
            best = (current_fit, current.bits.clone());
        }
        trace.push(TraceRow {
            iteration: it,
            current_fitness: current_fit,
            best_fitness: best.0,
            diversified: diversify,
            moved,
            current: current.bit_string(),
        });
    }

    // A hire the greedy schedules never use only adds its fixed cost, and
    // dropping it leaves every schedule unchanged.
    let mut bits = best.1;
    let unused = fb.unused_hires(&bits);
    let mut best_fitness = best.0;
    if !unused.is_empty() {
        for b in unused {
            bits[b] = false;
        }
        best_fitness = fb.fitness(&bits);
    }
    Ok(TsResult {
        hiring: layout.with_bits(bits)?,
        best_fitness,
        trace,
    })
}

/// Trace as CSV: `iteration,current_fitness,best_fitness,diversified`.
pub fn write_trace_csv<W: Write>(out: W, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "current_fitness", "best_fitness", "diversified"])?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            format!("{:.6}", r.current_fitness),
            format!("{:.6}", r.best_fitness),
            u8::from(r.diversified).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{HiringGroup, LanguageId};
    use crate::fixtures::{base_case, t1};
    use crate::scenario::expected_scenario;

    fn layout(groups: &[usize], bits: &[u8]) -> HiringDecision {
        let mut start = 0;
        let groups = groups
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let g = HiringGroup {
                    languages: vec![LanguageId::new(format!("L{k}"))],
                    start,
                    end: start + n,
                };
                start += n;
                g
            })
            .collect();
        HiringDecision {
            members: (0..bits.len()).map(|k| format!("p{k}")).collect(),
            groups,
            bits: bits.iter().map(|&b| b == 1).collect(),
        }
    }

    #[test]
    fn tabu_memory_is_fifo() {
        let mut m = TabuMemory::new(2);
        m.push(vec![true]);
        m.push(vec![false]);
        m.push(vec![true, true]);
        assert_eq!(m.len(), 2);
        assert!(!m.contains(&[true]));
        assert!(m.contains(&[false]));
    }

    #[test]
    fn two_groups_of_two_swap_both() {
        let w = layout(&[2, 2], &[1, 0, 0, 1]);
        let mut rng = stream(0, "t", 0);
        let n = neighbors(&w, &TsParams::default(), &mut rng);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].bits, [false, true, true, false]);
    }

    #[test]
    fn equal_values_make_swap_a_no_op() {
        let w = layout(&[2, 2], &[1, 1, 0, 1]);
        let mut rng = stream(0, "t", 0);
        let n = neighbors(&w, &TsParams::default(), &mut rng);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].bits, [true, true, true, false]);
    }

    #[test]
    fn singleton_groups_have_no_neighbors() {
        let w = layout(&[1, 1, 1], &[1, 0, 1]);
        let mut rng = stream(0, "t", 0);
        assert!(neighbors(&w, &TsParams::default(), &mut rng).is_empty());
        let flips = TsParams {
            bit_flip_moves: true,
            ..TsParams::default()
        };
        assert_eq!(neighbors(&w, &flips, &mut rng).len(), 3);
    }

    #[test]
    fn initial_solution_cases() {
        let p = TsParams {
            init_sample_size: 1,
            ..TsParams::default()
        };
        assert_eq!(initial_solution(&t1(), &p).unwrap().bits, [true, false]);

        let mut empty = t1();
        empty.outpatients.clear();
        assert_eq!(initial_solution(&empty, &p).unwrap().bits, [false, false]);

        let base = base_case().simplify().unwrap();
        let w = initial_solution(&base, &p).unwrap();
        assert_eq!(w, group_part_timers(&base).with_bits(w.bits.clone()).unwrap());
    }

    #[test]
    fn forced_bad_start_on_t1_moves_to_optimum() {
        let inst = t1();
        let sc = vec![expected_scenario(&inst)];
        let p = TsParams {
            iterations: 3,
            diversification_prob: 0.0,
            ..TsParams::default()
        };
        let r = run_ts_with(&inst, &p, &sc, None, Some(vec![false, true])).unwrap();
        assert_eq!(r.trace[0].current_fitness, 30.0);
        assert_eq!(r.trace[1].current_fitness, 20.0);
        assert_eq!((r.hiring.bits, r.best_fitness), (vec![true, false], 20.0));
    }

    #[test]
    fn zero_patients() {
        let mut inst = t1();
        inst.outpatients.clear();
        let r = run_ts(&inst, &TsParams::default()).unwrap();
        assert_eq!((r.hiring.bits, r.best_fitness), (vec![false, false], 0.0));
    }

    #[test]
    fn trace_csv() {
        let rows = [TraceRow {
            iteration: 0,
            current_fitness: 1.5,
            best_fitness: 1.5,
            diversified: true,
            moved: true,
            current: "01".into(),
        }];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "iteration,current_fitness,best_fitness,diversified\n0,1.500000,1.500000,1\n"
        );
    }
}
