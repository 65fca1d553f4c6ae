#![allow(dead_code)]

use coopd2d::chanmodel::{EmpiricalStateSet, RateState};
use rand::Rng;

/// Best `E{π·r_d}` subject to `E{(1−π)·r_c} ≥ r_th` over arbitrary per-state
/// shares `π_k ∈ [0, 1]`, by enumerating linear-program vertices: every
/// vertex has at most one fractional share. `None` when infeasible.
pub fn brute_force_policy_value(set: &EmpiricalStateSet, r_th: f64) -> Option<f64> {
    let states = set.states();
    let w = set.weights();
    let k = states.len();
    assert!(k <= 12, "enumeration is exponential");
    let mut best: Option<f64> = None;
    let mut consider = |d2d: f64, cu: f64| {
        if cu >= r_th - 1e-12 {
            best = Some(best.map_or(d2d, |b: f64| b.max(d2d)));
        }
    };
    for mask in 0u32..(1 << k) {
        let share = |i: usize| if mask & (1 << i) != 0 { 1.0 } else { 0.0 };
        let d2d: f64 = (0..k).map(|i| w[i] * share(i) * states[i].r_d).sum();
        let cu: f64 = (0..k)
            .map(|i| w[i] * (1.0 - share(i)) * states[i].r_c)
            .sum();
        consider(d2d, cu);
        // One fractional state `f` (taken from the mask's zero positions)
        // sized so the CU constraint binds.
        for f in 0..k {
            if mask & (1 << f) != 0 || states[f].r_c <= 0.0 {
                continue;
            }
            let cu_others = cu - w[f] * states[f].r_c;
            let pi_f = 1.0 - (r_th - cu_others) / (w[f] * states[f].r_c);
            if (0.0..=1.0).contains(&pi_f) {
                let d = d2d + w[f] * pi_f * states[f].r_d;
                consider(d, r_th);
            }
        }
    }
    best
}

/// Random state set with `1..=max` states and random positive weights.
pub fn random_state_set<R: Rng>(rng: &mut R, max: usize) -> EmpiricalStateSet {
    let k = rng.random_range(1..=max);
    let states: Vec<RateState> = (0..k)
        .map(|_| {
            let r_c = if rng.random_bool(0.05) {
                0.0
            } else {
                rng.random_range(0.0..5.0)
            };
            let r_d = if rng.random_bool(0.05) {
                0.0
            } else {
                rng.random_range(0.0..12.0)
            };
            RateState::new(r_c, r_d)
        })
        .collect();
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    EmpiricalStateSet::weighted(states, weights).unwrap()
}
