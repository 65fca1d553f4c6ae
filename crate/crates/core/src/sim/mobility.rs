//! Mobility study: pairing and policies fixed at time zero while users move.
//!
//! Each CU and each D2D pair draws one heading and moves at constant speed;
//! a D2D transmitter and its receiver move together, so the D2D link length
//! is preserved. Users leaving the cell are reflected back specularly.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::frame::{build_pair_table, pair, Pairing};
use super::metrics::{is_outage, FrameMetrics};
use super::scenario::{Evaluation, Scenario, ScenarioConfig, Streams};
use crate::chanmodel::{direct_rate, draw_fading, link_gain, PairChannel, PairGeometry, Position};
use crate::error::{Error, Result};
use crate::policy::PolicySolution;
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityConfig {
    /// m/s
    pub speed: f64,
    /// Seconds simulated.
    pub duration: f64,
    pub subframe_len: f64,
    pub bucket_len: f64,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        MobilityConfig {
            speed: 20.0,
            duration: 2.0,
            subframe_len: 1e-3,
            bucket_len: 0.5,
        }
    }
}

impl MobilityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            return Err(Error::domain(format!(
                "speed must be >= 0, got {}",
                self.speed
            )));
        }
        if !(self.subframe_len.is_finite() && self.subframe_len > 0.0) {
            return Err(Error::domain("subframe length must be positive"));
        }
        if !(self.bucket_len >= self.subframe_len && self.duration >= self.bucket_len) {
            return Err(Error::domain("need subframe_len <= bucket_len <= duration"));
        }
        Ok(())
    }

    pub fn subframes_per_bucket(&self) -> usize {
        (self.bucket_len / self.subframe_len).round() as usize
    }

    pub fn buckets(&self) -> usize {
        (self.duration / self.bucket_len).round() as usize
    }
}

/// Advances `pos` by `step` along `dir` inside a disc of radius `radius`,
/// reflecting off the boundary. Returns the new position and direction.
fn advance(pos: Position, dir: (f64, f64), step: f64, radius: f64) -> (Position, (f64, f64)) {
    let p = Position::new(pos.x + dir.0 * step, pos.y + dir.1 * step);
    let r = p.norm();
    if r <= radius {
        return (p, dir);
    }
    let (nx, ny) = (p.x / r, p.y / r);
    let dot = dir.0 * nx + dir.1 * ny;
    let reflected = (dir.0 - 2.0 * dot * nx, dir.1 - 2.0 * dot * ny);
    let back = (2.0 * radius - r).max(0.0);
    (Position::new(nx * back, ny * back), reflected)
}

/// Fading per subframe, either cycling through stored draws or live.
enum Fading<T> {
    Cycle(Vec<T>),
    Live(Stream),
}

impl<T: Copy> Fading<T> {
    fn at(&mut self, t: usize, draw: impl Fn(&mut Stream) -> T) -> T {
        match self {
            Fading::Cycle(v) => v[t % v.len()],
            Fading::Live(rng) => draw(rng),
        }
    }
}

/// Runs the study; one [`FrameMetrics`] per time bucket.
pub fn run_mobility(
    scn: &Scenario,
    cfg: &ScenarioConfig,
    mob: &MobilityConfig,
    streams: &Streams,
) -> Result<Vec<FrameMetrics>> {
    mob.validate()?;
    let (cus, dps) = (scn.cus(), scn.dps());
    let table = build_pair_table(scn, cfg, streams)?;
    let (matching, iterations) = pair(&table, cfg, streams, Pairing::Dma)?;
    let pairs: Vec<(usize, usize)> = matching.pairs().collect();

    let mut rng = streams.mobility();
    let heading = |rng: &mut Stream| {
        let a = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        (a.cos(), a.sin())
    };
    let mut cu_pos = scn.cu_positions.clone();
    let mut cu_dir: Vec<(f64, f64)> = (0..cus).map(|_| heading(&mut rng)).collect();
    let mut dt_pos = scn.dt_positions.clone();
    let mut dt_dir: Vec<(f64, f64)> = (0..dps).map(|_| heading(&mut rng)).collect();
    let dr_offset: Vec<(f64, f64)> = (0..dps)
        .map(|n| {
            (
                scn.dr_positions[n].x - dt_pos[n].x,
                scn.dr_positions[n].y - dt_pos[n].y,
            )
        })
        .collect();

    // Matched pairs replay their training fading (reuse) or draw fresh.
    let k = cfg.effective_training_samples();
    let mut pair_fading: Vec<Fading<[f64; 4]>> = pairs
        .iter()
        .map(|&(m, n)| match cfg.evaluation {
            Evaluation::Reuse => {
                let mut r = streams.training(m, n);
                Fading::Cycle((0..k).map(|_| draw_fading(&mut r)).collect())
            }
            Evaluation::Fresh => Fading::Live(streams.evaluation(m, n)),
        })
        .collect();
    let mut solo_fading: Vec<Fading<f64>> = (0..cus)
        .map(|m| match cfg.evaluation {
            Evaluation::Reuse => {
                let mut r = streams.solo(m);
                Fading::Cycle(
                    (0..cfg.subframes_per_frame)
                        .map(|_| r.sample(Exp1))
                        .collect(),
                )
            }
            Evaluation::Fresh => Fading::Live(streams.solo(m)),
        })
        .collect();

    let (mut theta, mut delta) = (0.0, 0.0);
    for &(m, n) in &pairs {
        theta += matching.cu_utility(m);
        delta += matching.dp_utility(&table.payoffs, n);
    }
    let per = |x: f64| {
        if pairs.is_empty() {
            0.0
        } else {
            x / pairs.len() as f64
        }
    };
    let (eau_cu, eau_d2d) = (per(theta), per(delta));

    let step = mob.speed * mob.subframe_len;
    let per_bucket = mob.subframes_per_bucket();
    let mut out = Vec::with_capacity(mob.buckets());
    let mut t = 0usize;
    for _ in 0..mob.buckets() {
        let mut d2d_sum = vec![0.0; dps];
        let mut cu_sum = vec![0.0; cus];
        for _ in 0..per_bucket {
            let mut matched = vec![false; cus];
            for (i, &(m, n)) in pairs.iter().enumerate() {
                matched[m] = true;
                let dr = Position::new(dt_pos[n].x + dr_offset[n].0, dt_pos[n].y + dr_offset[n].1);
                let geom = PairGeometry::from_positions(scn.bs, cu_pos[m], dt_pos[n], dr);
                let s = PairChannel::new(&geom, &cfg.radio)?
                    .rates(pair_fading[i].at(t, draw_fading));
                match table.solution(m, n) {
                    PolicySolution::Feasible(p) => {
                        let (d, c) = p.realize(&s);
                        d2d_sum[n] += d;
                        cu_sum[m] += c;
                    }
                    PolicySolution::Infeasible => cu_sum[m] += s.r_c,
                }
            }
            for m in 0..cus {
                if !matched[m] {
                    let xi = solo_fading[m].at(t, |r| r.sample(Exp1));
                    let h = link_gain(cu_pos[m].distance(&scn.bs), cfg.radio.gamma, xi)?;
                    cu_sum[m] += direct_rate(h, &cfg.radio);
                }
            }
            if step > 0.0 {
                for m in 0..cus {
                    (cu_pos[m], cu_dir[m]) = advance(cu_pos[m], cu_dir[m], step, cfg.cell_radius);
                }
                for n in 0..dps {
                    (dt_pos[n], dt_dir[n]) = advance(dt_pos[n], dt_dir[n], step, cfg.cell_radius);
                }
            }
            t += 1;
        }
        let len = per_bucket as f64;
        let d2d_rates: Vec<f64> = d2d_sum.iter().map(|x| x / len).collect();
        let cu_rates: Vec<f64> = cu_sum.iter().map(|x| x / len).collect();
        let metrics = FrameMetrics {
            weighted_sum_rate: (0..dps).map(|n| cfg.weight(n) * d2d_rates[n]).sum(),
            outage: cu_rates.iter().map(|&r| is_outage(r, cfg.r_th)).collect(),
            d2d_rates,
            cu_rates,
            pairs: pairs.clone(),
            eau_cu,
            eau_d2d,
            switch_count: 0,
            csi_count: pairs.len() * per_bucket,
            subframes: per_bucket,
            iterations,
        };
        metrics.check(cfg.r_th)?;
        out.push(metrics);
    }
    Ok(out)
}
