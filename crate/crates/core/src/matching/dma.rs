//! Distributed matching by ascending price requirements.
//!
//! Each round, every unmatched D2D pair proposes to the CU maximising its
//! surplus `v_mn − β_m` (if non-negative). A CU then
//!
//! 1. accepts, at the previous requirement, one of last round's proposers if
//!    it is unmatched and this round brought no proposal after a raise;
//! 2. accepts a single proposer at `β_m` when unmatched or when its current
//!    price is below `β_m`;
//! 3. raises `β_m` by ε and drops its partner when several pairs (counting a
//!    partner already paying `β_m`) want it;
//! 4. otherwise does nothing.
//!
//! The auction stops after a round with no proposals. Prices and
//! requirements are integer multiples of ε.

use std::io::Write;

use rand::seq::IndexedRandom;
use serde::Serialize;

use super::{Matching, PayoffMatrix};
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Picks one of several stale proposers in case 1.
#[derive(Debug, Clone)]
pub enum Selector {
    /// Lowest D2D index.
    Lowest,
    /// Uniformly at random from a seeded stream.
    Seeded(Stream),
}

impl Selector {
    pub fn seeded(seed: u64) -> Self {
        Selector::Seeded(crate::rng::stream(seed))
    }

    pub(crate) fn pick(&mut self, candidates: &[usize]) -> usize {
        debug_assert!(!candidates.is_empty());
        match self {
            Selector::Lowest => *candidates.iter().min().expect("non-empty"),
            Selector::Seeded(rng) => *candidates.choose(rng).expect("non-empty"),
        }
    }
}

/// State broadcast and proposals received in one round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmaRound {
    /// `β^t` in ticks of ε.
    pub beta: Vec<u64>,
    /// Proposals standing at each CU when the round closed.
    pub proposers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DmaTrace {
    pub iterations: usize,
    pub rounds: Vec<DmaRound>,
    pub eps: f64,
}

impl DmaTrace {
    /// Upper bound on rounds: `⌈M·N·V_max/ε⌉ + M·N`.
    pub fn iteration_cap(values: &PayoffMatrix, eps: f64) -> usize {
        let mn = values.cus() * values.dps();
        let vmax = values.v_max().max(0.0);
        (mn as f64 * vmax / eps).ceil() as usize + mn
    }

    /// `β^t_m` never decreases.
    pub fn beta_monotone(&self) -> bool {
        self.rounds
            .windows(2)
            .all(|w| w[0].beta.iter().zip(&w[1].beta).all(|(a, b)| a <= b))
    }

    /// One row per `(round, cu)`: `iteration,cu,beta,proposer_count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "cu", "beta", "proposer_count"])?;
        for (t, round) in self.rounds.iter().enumerate() {
            for (m, (&b, &g)) in round.beta.iter().zip(&round.proposers).enumerate() {
                w.write_record([
                    (t + 1).to_string(),
                    (m + 1).to_string(),
                    (b as f64 * self.eps).to_string(),
                    g.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// CU maximising `v_mn − β_m` if that surplus is non-negative; ties go to
/// the lowest CU index. `beta` is in value units.
pub fn demand(n: usize, beta: &[f64], values: &PayoffMatrix) -> Option<usize> {
    best_surplus(n, values, |m| beta[m])
}

#[inline]
fn best_surplus(n: usize, values: &PayoffMatrix, beta: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for m in 0..values.cus() {
        let s = values.get(m, n) - beta(m);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((m, s));
        }
    }
    best.filter(|&(_, s)| s >= 0.0).map(|(m, _)| m)
}

/// Runs the auction to completion.
pub fn run_dma(
    values: &PayoffMatrix,
    eps: f64,
    selector: &mut Selector,
) -> Result<(Matching, DmaTrace)> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(format!(
            "price step must be positive, got {eps}"
        )));
    }
    let (cus, dps) = (values.cus(), values.dps());
    let mut trace = DmaTrace {
        eps,
        ..DmaTrace::default()
    };
    if values.v_max() <= 0.0 {
        let mut m = Matching::empty(cus, dps);
        m.tick = eps;
        return Ok((m, trace));
    }

    let mut beta = vec![0u64; cus];
    let mut beta_prev = vec![0u64; cus];
    let mut price = vec![0u64; cus];
    let mut cu_partner: Vec<Option<usize>> = vec![None; cus];
    let mut dp_partner: Vec<Option<usize>> = vec![None; dps];
    let mut prev: Vec<Vec<usize>> = vec![Vec::new(); cus];
    let mut demand_of: Vec<Option<usize>> = vec![None; dps];

    loop {
        trace.iterations += 1;
        let mut cur: Vec<Vec<usize>> = vec![Vec::new(); cus];

        // Proposals.
        for n in 0..dps {
            demand_of[n] = None;
            if dp_partner[n].is_some() {
                continue;
            }
            if let Some(m) = best_surplus(n, values, |m| beta[m] as f64 * eps) {
                cur[m].push(n);
                demand_of[n] = Some(m);
            }
        }

        // Case 1: accept a stale proposer at the previous requirement. A
        // cancellation can silence another CU, so repeat until settled.
        let mut changed = true;
        while changed {
            changed = false;
            for m in 0..cus {
                if cur[m].is_empty() && !prev[m].is_empty() && cu_partner[m].is_none() {
                    let n = selector.pick(&prev[m]);
                    debug_assert!(dp_partner[n].is_none());
                    cu_partner[m] = Some(n);
                    dp_partner[n] = Some(m);
                    price[m] = beta_prev[m];
                    prev[m].clear();
                    if let Some(target) = demand_of[n].take() {
                        cur[target].retain(|&x| x != n);
                    }
                    changed = true;
                }
            }
        }

        // Cases 2–4.
        let mut beta_next = beta.clone();
        for m in 0..cus {
            let k = cur[m].len();
            if k == 0 {
                continue;
            }
            let incumbent = cu_partner[m];
            if k == 1 && (incumbent.is_none() || price[m] < beta[m]) {
                if let Some(old) = incumbent {
                    dp_partner[old] = None;
                }
                let n = cur[m][0];
                cu_partner[m] = Some(n);
                dp_partner[n] = Some(m);
                price[m] = beta[m];
            } else {
                if let Some(old) = incumbent {
                    dp_partner[old] = None;
                    cu_partner[m] = None;
                    if price[m] == beta[m] {
                        cur[m].push(old);
                    }
                    price[m] = 0;
                }
                beta_next[m] = beta[m] + 1;
            }
        }

        trace.rounds.push(DmaRound {
            beta: beta.clone(),
            proposers: cur.iter().map(|g| g.len() as u32).collect(),
        });

        let silent = cur.iter().all(Vec::is_empty);
        beta_prev = std::mem::replace(&mut beta, beta_next);
        prev = cur;
        if silent {
            break;
        }
    }

    Ok((
        Matching::from_parts(cu_partner, dp_partner, price, eps),
        trace,
    ))
}
