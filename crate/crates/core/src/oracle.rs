//! No-pruning brute-force enumerators.
//!
//! These try every assignment tuple (each patient unserved, or any
//! interpreter at any start period) and keep the cheapest one that the
//! constraint checker accepts. They share nothing with the branch-and-bound
//! search except the checker and the cost function, and are only usable on
//! tiny instances.

use crate::domain::{group_part_timers, ProblemInstance, Scenario};
use crate::error::Result;
use crate::eval::{cost_plan, plan_is_feasible};
use crate::model::{Plan, Problem};

/// Every plan of `p`, in odometer order over `job -> option`, where option
/// `0` is unserved and option `1 + s * T + (t - 1)` is staff `s` at `t`.
fn for_each_plan(p: &Problem, mut f: impl FnMut(&Plan)) {
    let n = p.jobs.len();
    let t = p.horizon as usize;
    let options = p.staff.len() * t + 1;
    let decode = |o: usize| -> Option<(usize, u32)> {
        if o == 0 {
            None
        } else {
            Some(((o - 1) / t, ((o - 1) % t) as u32 + 1))
        }
    };
    let mut digits = vec![0usize; n];
    let mut plan: Plan = vec![None; n];
    loop {
        f(&plan);
        let mut k = 0;
        loop {
            if k == n {
                return;
            }
            digits[k] += 1;
            if digits[k] == options {
                digits[k] = 0;
                plan[k] = None;
                k += 1;
            } else {
                plan[k] = decode(digits[k]);
                break;
            }
        }
    }
}

/// Minimum second-stage cost of one scenario for fixed hiring bits.
pub(crate) fn brute_force_plan(p: &Problem, bits: &[bool]) -> f64 {
    let mut best = f64::INFINITY;
    for_each_plan(p, |plan| {
        if plan_is_feasible(p, bits, plan) {
            best = best.min(cost_plan(p, bits, plan).second_stage());
        }
    });
    best
}

fn fixed_cost(p: &Problem, bits: &[bool]) -> f64 {
    p.fixed_cost(bits)
}

/// Minimum over all hiring vectors (natural binary order) of fixed cost
/// plus the probability-weighted per-scenario brute-force optimum.
/// Returns the lexicographically smallest minimizing vector.
pub fn brute_force_saa(instance: &ProblemInstance, scenarios: &[Scenario]) -> Result<(Vec<bool>, f64)> {
    let layout = group_part_timers(instance);
    let problems = scenarios
        .iter()
        .map(|s| Problem::new(instance, &layout, s))
        .collect::<Result<Vec<_>>>()?;
    let j = layout.len();
    let mut best: Option<(Vec<bool>, f64)> = None;
    for code in 0u64..1 << j {
        // most significant bit first, so numeric order is lexicographic order
        let bits: Vec<bool> = (0..j).map(|b| code >> (j - 1 - b) & 1 == 1).collect();
        let mut second = 0.0;
        for (p, s) in problems.iter().zip(scenarios) {
            second += s.probability * brute_force_plan(p, &bits);
        }
        let fixed = match problems.first() {
            Some(p) => fixed_cost(p, &bits),
            None => layout.with_bits(bits.clone())?.fixed_cost(instance),
        };
        let value = fixed + second;
        if best.as_ref().is_none_or(|(_, v)| value < *v - 1e-9) {
            best = Some((bits, value));
        }
    }
    Ok(best.expect("at least one hiring vector"))
}

/// Joint enumeration over the product of all scenarios' plans, without
/// assuming the scenarios decouple. Exponential in the total patient
/// count; meant for two or three patients overall.
pub fn brute_force_joint(instance: &ProblemInstance, scenarios: &[Scenario]) -> Result<f64> {
    let layout = group_part_timers(instance);
    let problems = scenarios
        .iter()
        .map(|s| Problem::new(instance, &layout, s))
        .collect::<Result<Vec<_>>>()?;
    let j = layout.len();
    let mut best = f64::INFINITY;
    for code in 0u64..1 << j {
        let bits: Vec<bool> = (0..j).map(|b| code >> (j - 1 - b) & 1 == 1).collect();
        let fixed = layout.with_bits(bits.clone())?.fixed_cost(instance);
        joint(&problems, scenarios, &bits, 0, fixed, &mut best);
    }
    Ok(best)
}

fn joint(problems: &[Problem], scenarios: &[Scenario], bits: &[bool], k: usize, acc: f64, best: &mut f64) {
    if k == problems.len() {
        *best = best.min(acc);
        return;
    }
    let p = &problems[k];
    for_each_plan(p, |plan| {
        if plan_is_feasible(p, bits, plan) {
            let c = scenarios[k].probability * cost_plan(p, bits, plan).second_stage();
            joint(problems, scenarios, bits, k + 1, acc + c, best);
        }
    });
}

/// Hex SHA-256 of this module's source, stored next to precomputed optima
/// so that a change to the oracle is detectable.
pub fn oracle_version() -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(include_str!("oracle.rs").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;
    use crate::scenario::expected_scenario;

    #[test]
    fn t1_brute_force() {
        let inst = t1();
        let sc = vec![expected_scenario(&inst)];
        assert_eq!(brute_force_saa(&inst, &sc).unwrap(), (vec![true, false], 20.0));
        assert_eq!(brute_force_joint(&inst, &sc).unwrap(), 20.0);
        let layout = group_part_timers(&inst);
        let p = Problem::new(&inst, &layout, &sc[0]).unwrap();
        assert_eq!(brute_force_plan(&p, &[false, false]), 25.0);
        assert_eq!(brute_force_plan(&p, &[false, true]), 0.0);
    }

    #[test]
    fn enumerates_all_tuples() {
        let inst = t1();
        let sc = expected_scenario(&inst);
        let layout = group_part_timers(&inst);
        let p = Problem::new(&inst, &layout, &sc).unwrap();
        let mut count = 0;
        for_each_plan(&p, |_| count += 1);
        assert_eq!(count, (3 * 4 + 1) * (3 * 4 + 1));
    }
}
