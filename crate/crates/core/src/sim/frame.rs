//! Two-timescale frames: pairing once per frame, threshold policy per subframe.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::metrics::{is_outage, FrameMetrics};
use super::scenario::{Evaluation, Scenario, ScenarioConfig, Streams};
use crate::chanmodel::{direct_rate, link_gain, EmpiricalStateSet, PairChannel};
use crate::error::{Error, Result};
use crate::matching::{
    matching_without_transfer, optimal_assignment, random_matching, run_dma, verify_eps_stable,
    Matching, PayoffMatrix, Selector,
};
use crate::policy::{evaluate_policy, infeasible_outcome, pair_payoff, PolicySolution};

/// Frame-level pairing schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    Dma,
    Optimal,
    NoTransfer,
    Random,
}

impl Pairing {
    pub const ALL: [Pairing; 4] = [
        Pairing::Dma,
        Pairing::Optimal,
        Pairing::NoTransfer,
        Pairing::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pairing::Dma => "dma",
            Pairing::Optimal => "optimal",
            Pairing::NoTransfer => "no_transfer",
            Pairing::Random => "random",
        }
    }
}

/// Statistical-CSI view of every CU–D2D pair.
#[derive(Debug, Clone)]
pub struct PairTable {
    pub payoffs: PayoffMatrix,
    solutions: Vec<PolicySolution>,
}

impl PairTable {
    pub fn solution(&self, m: usize, n: usize) -> &PolicySolution {
        &self.solutions[m * self.payoffs.dps() + n]
    }
}

/// The `K` training draws of pair `(m, n)`. Deterministic, so callers can
/// regenerate them instead of storing every pair's samples.
pub fn training_states(
    scn: &Scenario,
    cfg: &ScenarioConfig,
    streams: &Streams,
    m: usize,
    n: usize,
) -> Result<EmpiricalStateSet> {
    let channel = PairChannel::new(&scn.pair_geometry(m, n), &cfg.radio)?;
    let mut rng = streams.training(m, n);
    let k = cfg.effective_training_samples();
    EmpiricalStateSet::uniform((0..k).map(|_| channel.sample(&mut rng)).collect())
}

fn evaluation_states(
    scn: &Scenario,
    cfg: &ScenarioConfig,
    streams: &Streams,
    m: usize,
    n: usize,
) -> Result<EmpiricalStateSet> {
    match cfg.evaluation {
        Evaluation::Reuse => training_states(scn, cfg, streams, m, n),
        Evaluation::Fresh => {
            let channel = PairChannel::new(&scn.pair_geometry(m, n), &cfg.radio)?;
            let mut rng = streams.evaluation(m, n);
            EmpiricalStateSet::uniform(
                (0..cfg.subframes_per_frame)
                    .map(|_| channel.sample(&mut rng))
                    .collect(),
            )
        }
    }
}

pub fn build_pair_table(
    scn: &Scenario,
    cfg: &ScenarioConfig,
    streams: &Streams,
) -> Result<PairTable> {
    let (cus, dps) = (scn.cus(), scn.dps());
    let mut values = Vec::with_capacity(cus * dps);
    let mut solutions = Vec::with_capacity(cus * dps);
    for m in 0..cus {
        for n in 0..dps {
            let states = training_states(scn, cfg, streams, m, n)?;
            let payoff = pair_payoff(&states, cfg.r_th, cfg.weight(n))?;
            values.push(payoff.v);
            solutions.push(payoff.solution);
        }
    }
    let weights = (0..dps).map(|n| cfg.weight(n)).collect();
    Ok(PairTable {
        payoffs: PayoffMatrix::new(cus, dps, values, weights)?,
        solutions,
    })
}

/// Average direct-link rate of CU `m` transmitting alone for a frame.
pub fn solo_rate(scn: &Scenario, cfg: &ScenarioConfig, streams: &Streams, m: usize) -> Result<f64> {
    let d = scn.cu_positions[m].distance(&scn.bs);
    let mut rng = streams.solo(m);
    let mut total = 0.0;
    for _ in 0..cfg.subframes_per_frame {
        let h = link_gain(d, cfg.radio.gamma, rng.sample(Exp1))?;
        total += direct_rate(h, &cfg.radio);
    }
    Ok(total / cfg.subframes_per_frame as f64)
}

/// Pairs the frame with `scheme`. Returns the matching and the number of
/// DMA rounds (zero for other schemes).
pub fn pair(
    table: &PairTable,
    cfg: &ScenarioConfig,
    streams: &Streams,
    scheme: Pairing,
) -> Result<(Matching, usize)> {
    let values = &table.payoffs;
    Ok(match scheme {
        Pairing::Dma => {
            let mut selector = Selector::seeded(streams.selector_seed());
            let (matching, trace) = run_dma(values, cfg.eps, &mut selector)?;
            if !verify_eps_stable(values, &matching, cfg.eps).is_stable() {
                return Err(Error::Invariant("DMA output is not ε-stable".into()));
            }
            (matching, trace.iterations)
        }
        Pairing::Optimal => (
            optimal_assignment(values).to_matching(values.cus(), values.dps()),
            0,
        ),
        Pairing::NoTransfer => {
            let mut selector = Selector::seeded(streams.no_transfer_seed());
            (matching_without_transfer(values, &mut selector), 0)
        }
        Pairing::Random => (
            random_matching(values.cus(), values.dps(), &mut streams.random_pairing()),
            0,
        ),
    })
}

/// Plays the frame with a fixed matching and each matched pair's policy.
/// Infeasible matched pairs leave every subframe to the CU; unmatched CUs
/// transmit alone and unmatched D2D pairs stay silent.
pub fn realize(
    scn: &Scenario,
    cfg: &ScenarioConfig,
    streams: &Streams,
    table: &PairTable,
    matching: &Matching,
    iterations: usize,
) -> Result<FrameMetrics> {
    let (cus, dps) = (scn.cus(), scn.dps());
    let mut d2d_rates = vec![0.0; dps];
    let mut cu_rates = vec![0.0; cus];
    for m in 0..cus {
        match matching.cu_partner(m) {
            Some(n) => {
                let states = evaluation_states(scn, cfg, streams, m, n)?;
                let outcome = match table.solution(m, n) {
                    PolicySolution::Feasible(p) => evaluate_policy(&states, p),
                    PolicySolution::Infeasible => infeasible_outcome(&states),
                };
                d2d_rates[n] = outcome.d2d_rate;
                cu_rates[m] = outcome.cu_rate;
            }
            None => cu_rates[m] = solo_rate(scn, cfg, streams, m)?,
        }
    }

    let pairs: Vec<(usize, usize)> = matching.pairs().collect();
    let matched = pairs.len();
    let (mut theta, mut delta) = (0.0, 0.0);
    for &(m, n) in &pairs {
        theta += matching.cu_utility(m);
        delta += matching.dp_utility(&table.payoffs, n);
    }
    let per = |x: f64| {
        if matched == 0 {
            0.0
        } else {
            x / matched as f64
        }
    };

    let metrics = FrameMetrics {
        weighted_sum_rate: (0..dps).map(|n| cfg.weight(n) * d2d_rates[n]).sum(),
        outage: cu_rates.iter().map(|&r| is_outage(r, cfg.r_th)).collect(),
        d2d_rates,
        cu_rates,
        eau_cu: per(theta),
        eau_d2d: per(delta),
        switch_count: 0,
        csi_count: matched * cfg.subframes_per_frame,
        subframes: cfg.subframes_per_frame,
        iterations,
        pairs,
    };
    metrics.check(cfg.r_th)?;
    Ok(metrics)
}

/// Full two-timescale frame with DMA pairing.
pub fn run_frame_two_timescale(
    scn: &Scenario,
    cfg: &ScenarioConfig,
    streams: &Streams,
) -> Result<FrameMetrics> {
    let table = build_pair_table(scn, cfg, streams)?;
    let (matching, iterations) = pair(&table, cfg, streams, Pairing::Dma)?;
    realize(scn, cfg, streams, &table, &matching, iterations)
}
