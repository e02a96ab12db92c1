use std::collections::VecDeque;

use lepsched::domain::group_part_timers;
use lepsched::eval::{check_constraints, second_stage_cost, total_objective};
use lepsched::evaluation::{simulate, simulate_on, SensitivityParameter, SimOptions};
use lepsched::exact::{solve_saa_exact, solve_second_stage_exact};
use lepsched::family::random_member;
use lepsched::fixtures::{base_case, reduced, t1};
use lepsched::hestof::construct_schedule;
use lepsched::oracle::{brute_force_joint, brute_force_saa};
use lepsched::rng::{stream, RandomStream};
use lepsched::saa::{gap_confidence_interval, mean_and_std_error};
use lepsched::scenario::{sample_batch, sample_scenario};
use lepsched::tabu::{neighbors, run_ts_with, TsParams};
use lepsched::HiringDecision;
use proptest::prelude::*;
use rand::Rng;

fn small() -> impl Strategy<Value = (u64, usize, usize, u32, usize)> {
    (any::<u64>(), 0usize..=2, 0usize..=4, prop::sample::select(vec![2u32, 3, 4, 5, 6]), 1usize..=2)
}

fn bits_for(w: &HiringDecision, seed: u64) -> HiringDecision {
    let mut rng = stream(seed, "prop-bits", 0);
    w.with_bits((0..w.len()).map(|_| rng.random_bool(0.5)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_schedules_are_feasible_and_dominated_by_exact((seed, pt, n, t, s) in small()) {
        let (inst, scs) = random_member(seed, 0, pt, n, t, s);
        let w = bits_for(&group_part_timers(&inst), seed);
        for sc in &scs {
            let h = construct_schedule(&inst, &w, sc).unwrap();
            prop_assert!(check_constraints(&inst, &w, sc, &h).is_empty());
            let (e, cost) = solve_second_stage_exact(&inst, &w, sc).unwrap();
            prop_assert!(check_constraints(&inst, &w, sc, &e).is_empty());
            let fixed = w.fixed_cost(&inst);
            let hc = second_stage_cost(&inst, &w, sc, &h).unwrap().total - fixed;
            prop_assert!(hc >= cost - 1e-9);
        }
    }

    #[test]
    fn exact_matches_brute_force((seed, pt, n, t, s) in small()) {
        let (inst, scs) = random_member(seed, 1, pt, n.min(3), t.min(4), s);
        let (w, v) = solve_saa_exact(&inst, &scs).unwrap();
        let (bits, bv) = brute_force_saa(&inst, &scs).unwrap();
        prop_assert_eq!(v, bv);
        prop_assert_eq!(w.bits, bits);
    }

    #[test]
    fn joint_enumeration_agrees_with_decoupled((seed, pt) in (any::<u64>(), 0usize..=1)) {
        let (inst, scs) = random_member(seed, 2, pt, 1, 3, 2);
        let joint = brute_force_joint(&inst, &scs).unwrap();
        let (_, v) = brute_force_saa(&inst, &scs).unwrap();
        prop_assert!((joint - v).abs() < 1e-9);
    }

    #[test]
    fn objective_counts_fixed_once((seed, pt, n, t, s) in small()) {
        let (inst, scs) = random_member(seed, 3, pt, n, t, s);
        let w = bits_for(&group_part_timers(&inst), seed ^ 1);
        let schedules: Vec<_> = scs.iter().map(|sc| construct_schedule(&inst, &w, sc).unwrap()).collect();
        let total = total_objective(&inst, &w, &scs, &schedules).unwrap();
        let fixed = w.fixed_cost(&inst);
        let mut second = 0.0;
        for (sc, sch) in scs.iter().zip(&schedules) {
            let c = second_stage_cost(&inst, &w, sc, sch).unwrap();
            prop_assert!(c.variable_cost >= 0.0 && c.overtime_cost >= 0.0 && c.penalty_cost >= 0.0);
            prop_assert!((c.total - c.fixed_cost - c.variable_cost - c.overtime_cost - c.penalty_cost).abs() < 1e-9);
            second += sc.probability * (c.total - fixed);
        }
        prop_assert!((total - fixed - second).abs() < 1e-9);
    }

    #[test]
    fn sampled_scenarios_respect_bounds(seed in any::<u64>(), index in 0u64..1000) {
        let inst = base_case().simplify().unwrap();
        let sc = sample_scenario(&inst, &RandomStream::new(seed, "p", index)).unwrap();
        let t = inst.horizon;
        for e in &sc.emergency_patients {
            prop_assert!((1..=t).contains(&e.arrival));
            let d = e.duration.unwrap();
            prop_assert!((6..=12).contains(&d));
        }
        prop_assert_eq!(sc.outpatient_durations.len(), inst.outpatients.len());
        prop_assert!(sc.outpatient_durations.values().all(|&d| (1..=t).contains(&d)));
    }

    #[test]
    fn two_swaps_keep_group_counts(seed in any::<u64>()) {
        let layout = group_part_timers(&base_case().simplify().unwrap());
        let w = bits_for(&layout, seed);
        let mut rng = stream(seed, "n", 0);
        let counts = w.group_counts();
        for n in neighbors(&w, &TsParams::default(), &mut rng) {
            prop_assert_eq!(n.group_counts(), counts.clone());
            prop_assert_ne!(&n.bits, &w.bits);
        }
    }

    #[test]
    fn ci_width_is_two_z_sigma(gap in -500.0..500.0f64, sigma in 0.0..100.0f64, lb in 1.0..1000.0f64) {
        let ci = gap_confidence_interval(gap, sigma, lb, 0.95);
        prop_assert!(ci.ci_low <= gap && gap <= ci.ci_high);
        prop_assert!(((ci.ci_high - ci.ci_low) - 2.0 * ci.z * sigma).abs() < 1e-9);
        prop_assert!((ci.gap_pct - 100.0 * gap / lb).abs() < 1e-9);
    }

    #[test]
    fn standard_error_matches_definition(xs in prop::collection::vec(-100.0..100.0f64, 2..20)) {
        let (m, s) = mean_and_std_error(&xs);
        let n = xs.len() as f64;
        let direct = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / ((n - 1.0) * n);
        prop_assert!((s * s - direct).abs() < 1e-9);
    }

    #[test]
    fn simulation_breakdown_sums_to_total(seed in any::<u64>()) {
        let inst = reduced();
        let w = bits_for(&group_part_timers(&inst), seed);
        let s = simulate(&inst, &w, 30, seed).unwrap();
        let c = s.cost_breakdown_means;
        prop_assert!((c.fixed + c.variable + c.overtime + c.penalty - s.mean_total).abs() < 1e-6);
        prop_assert!((0.0..=1.0).contains(&s.service_level_emergency));
        prop_assert!((0.0..=1.0).contains(&s.service_level_outpatient));
        let parts: usize = s.hired_count_per_language_set.values().sum();
        prop_assert_eq!(parts, w.hired_count());
    }
}

#[test]
fn tabu_discipline_and_monotone_best() {
    let inst = base_case().simplify().unwrap();
    for seed in 1..=3 {
        let p = TsParams {
            iterations: 60,
            diversification_prob: 0.1,
            tabu_length: 5,
            fitness_sample_size: 10,
            master_seed: seed,
            ..TsParams::default()
        };
        let batch = sample_batch(&inst, 10, seed).unwrap();
        let r = run_ts_with(&inst, &p, &batch, None, None).unwrap();
        let mut memory: VecDeque<String> = VecDeque::new();
        for (k, row) in r.trace.iter().enumerate() {
            if k > 0 {
                assert!(row.best_fitness <= r.trace[k - 1].best_fitness);
                if row.moved && !row.diversified {
                    assert!(!memory.contains(&row.current), "tabu move at iteration {k}");
                }
            }
            if row.moved {
                if memory.len() == p.tabu_length {
                    memory.pop_front();
                }
                memory.push_back(row.current.clone());
            }
            if k > 0 && !row.diversified {
                let prev = r.trace[k - 1].current.as_bytes();
                let cur = row.current.as_bytes();
                let layout = group_part_timers(&inst);
                for g in &layout.groups {
                    let count = |b: &[u8]| b[g.range()].iter().filter(|&&c| c == b'1').count();
                    assert_eq!(count(prev), count(cur));
                }
            }
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let inst = base_case().simplify().unwrap();
    let layout = group_part_timers(&inst);
    let w = bits_for(&layout, 9);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let batch = sample_batch(&inst, 40, 5).unwrap();
            let stats = simulate_on(&inst, &w, &batch, &SimOptions::default()).unwrap();
            let p = TsParams {
                iterations: 15,
                fitness_sample_size: 15,
                master_seed: 3,
                ..TsParams::default()
            };
            let ts = lepsched::tabu::run_ts(&inst, &p).unwrap();
            (batch, stats, ts)
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn wait_penalty_scaling_preserves_zero_wait_argmin() {
    let base = t1();
    let sc = vec![lepsched::scenario::expected_scenario(&base)];
    let (w0, _) = solve_saa_exact(&base, &sc).unwrap();
    for f in [1.2, 1.6, 2.0, 3.0] {
        let scaled = SensitivityParameter::WaitPenalty.scale(&base, f);
        let (w, v) = solve_saa_exact(&scaled, &sc).unwrap();
        assert_eq!(w.bits, w0.bits);
        assert_eq!(v, 20.0);
    }
}
