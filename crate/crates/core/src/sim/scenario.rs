use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chanmodel::{PairGeometry, Position, RadioParams};
use crate::error::{Error, Result};
use crate::rng::{substream, Stream};

/// How realised subframes relate to the samples used to build payoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluation {
    /// The frame's subframes are the training draws (`K = T_s`): the policy
    /// is solved on exactly the fading the frame experiences.
    #[default]
    Reuse,
    /// `K` training draws, then `T_s` independent subframe draws.
    Fresh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub m_count: usize,
    pub n_count: usize,
    pub cell_radius: f64,
    /// Inner and outer radius of the annulus holding D2D transmitters.
    pub d2d_ring: (f64, f64),
    /// Range of the DT–DR distance.
    pub d2d_link_range: (f64, f64),
    pub radio: RadioParams,
    /// CU rate requirement in nats/s/Hz.
    pub r_th: f64,
    /// Per-D2D weights; empty means all ones.
    pub weights: Vec<f64>,
    pub subframes_per_frame: usize,
    pub training_samples: usize,
    pub eps: f64,
    pub seed: u64,
    pub evaluation: Evaluation,
}

/// 1.8 bps/Hz in nats.
pub fn default_r_th() -> f64 {
    1.8 * std::f64::consts::LN_2
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            m_count: 15,
            n_count: 15,
            cell_radius: 500.0,
            d2d_ring: (200.0, 400.0),
            d2d_link_range: (10.0, 30.0),
            radio: RadioParams::default(),
            r_th: default_r_th(),
            weights: Vec::new(),
            subframes_per_frame: 1000,
            training_samples: 10_000,
            eps: 1.0,
            seed: 0,
            evaluation: Evaluation::Reuse,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::config(field, msg));
        if self.m_count == 0 {
            return bad("m_count", "at least one CU required".into());
        }
        if self.n_count == 0 {
            return bad("n_count", "at least one D2D pair required".into());
        }
        if !(self.cell_radius.is_finite() && self.cell_radius > 0.0) {
            return bad(
                "cell_radius",
                format!("must be positive, got {}", self.cell_radius),
            );
        }
        let (lo, hi) = self.d2d_ring;
        if !(lo > 0.0 && lo <= hi && hi <= self.cell_radius) {
            return bad(
                "d2d_ring",
                format!("need 0 < inner <= outer <= cell_radius, got [{lo}, {hi}]"),
            );
        }
        let (lo, hi) = self.d2d_link_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(
                "d2d_link_range",
                format!("need 0 < min <= max, got [{lo}, {hi}]"),
            );
        }
        self.radio
            .validate()
            .map_err(|e| Error::config("radio", e.to_string()))?;
        if !(self.r_th.is_finite() && self.r_th >= 0.0) {
            return bad("r_th", format!("must be >= 0, got {}", self.r_th));
        }
        if !self.weights.is_empty() {
            if self.weights.len() != self.n_count {
                return bad(
                    "weights",
                    format!(
                        "expected {} weights, got {}",
                        self.n_count,
                        self.weights.len()
                    ),
                );
            }
            if self.weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
                return bad("weights", "weights must be positive".into());
            }
        }
        if self.subframes_per_frame == 0 {
            return bad("subframes_per_frame", "must be >= 1".into());
        }
        if self.training_samples == 0 {
            return bad("training_samples", "must be >= 1".into());
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return bad("eps", format!("price step must be > 0, got {}", self.eps));
        }
        Ok(())
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights.get(n).copied().unwrap_or(1.0)
    }

    pub fn weight_vector(&self) -> Vec<f64> {
        (0..self.n_count).map(|n| self.weight(n)).collect()
    }

    /// Samples behind each pair's payoff.
    pub fn effective_training_samples(&self) -> usize {
        match self.evaluation {
            Evaluation::Reuse => self.subframes_per_frame,
            Evaluation::Fresh => self.training_samples,
        }
    }

    /// Same config with different population sizes; weights reset to ones.
    pub fn with_sizes(&self, m_count: usize, n_count: usize) -> Self {
        ScenarioConfig {
            m_count,
            n_count,
            weights: Vec::new(),
            ..self.clone()
        }
    }
}

/// Node placement for one frame. The BS sits at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub bs: Position,
    pub cu_positions: Vec<Position>,
    pub dt_positions: Vec<Position>,
    pub dr_positions: Vec<Position>,
}

impl Scenario {
    pub fn cus(&self) -> usize {
        self.cu_positions.len()
    }

    pub fn dps(&self) -> usize {
        self.dt_positions.len()
    }

    pub fn pair_geometry(&self, m: usize, n: usize) -> PairGeometry {
        PairGeometry::from_positions(
            self.bs,
            self.cu_positions[m],
            self.dt_positions[n],
            self.dr_positions[n],
        )
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("scenario", e.to_string()))
    }
}

/// CUs uniform on the cell edge, DTs uniform over the annulus area, each DR
/// at a uniform distance and angle from its DT.
pub fn generate_scenario<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    cfg.validate()?;
    let cu_positions = (0..cfg.m_count)
        .map(|_| Position::from_polar(cfg.cell_radius, rng.random_range(0.0..2.0 * PI)))
        .collect();
    let (r_in, r_out) = cfg.d2d_ring;
    let (l_min, l_max) = cfg.d2d_link_range;
    let mut dt_positions = Vec::with_capacity(cfg.n_count);
    let mut dr_positions = Vec::with_capacity(cfg.n_count);
    for _ in 0..cfg.n_count {
        let u: f64 = rng.random();
        let radius = (r_in * r_in + u * (r_out * r_out - r_in * r_in)).sqrt();
        let dt = Position::from_polar(radius, rng.random_range(0.0..2.0 * PI));
        let len = if l_max > l_min {
            rng.random_range(l_min..=l_max)
        } else {
            l_min
        };
        let off = Position::from_polar(len, rng.random_range(0.0..2.0 * PI));
        dt_positions.push(dt);
        dr_positions.push(Position::new(dt.x + off.x, dt.y + off.y));
    }
    Ok(Scenario {
        bs: Position::ORIGIN,
        cu_positions,
        dt_positions,
        dr_positions,
    })
}

// Stream labels.
const GEOMETRY: u64 = 1;
const TRAINING: u64 = 2;
const EVALUATION: u64 = 3;
const SOLO: u64 = 4;
const SELECTOR: u64 = 5;
const RANDOM_PAIRING: u64 = 6;
const MOBILITY: u64 = 7;
const ONE_TIMESCALE: u64 = 8;
const NO_TRANSFER: u64 = 9;

/// Random streams of one replication, keyed by `(seed, replication)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    pub seed: u64,
    pub replication: u64,
}

impl Streams {
    pub fn new(seed: u64, replication: u64) -> Self {
        Streams { seed, replication }
    }

    fn get(&self, labels: &[u64]) -> Stream {
        let mut path = Vec::with_capacity(labels.len() + 1);
        path.push(self.replication);
        path.extend_from_slice(labels);
        substream(self.seed, &path)
    }

    pub fn geometry(&self) -> Stream {
        self.get(&[GEOMETRY])
    }
    pub fn training(&self, m: usize, n: usize) -> Stream {
        self.get(&[TRAINING, m as u64, n as u64])
    }
    pub fn evaluation(&self, m: usize, n: usize) -> Stream {
        self.get(&[EVALUATION, m as u64, n as u64])
    }
    pub fn solo(&self, m: usize) -> Stream {
        self.get(&[SOLO, m as u64])
    }
    pub fn selector_seed(&self) -> u64 {
        crate::rng::derive_key(self.seed, &[self.replication, SELECTOR])
    }
    pub fn no_transfer_seed(&self) -> u64 {
        crate::rng::derive_key(self.seed, &[self.replication, NO_TRANSFER])
    }
    pub fn random_pairing(&self) -> Stream {
        self.get(&[RANDOM_PAIRING])
    }
    pub fn mobility(&self) -> Stream {
        self.get(&[MOBILITY])
    }
    pub fn one_timescale(&self) -> Stream {
        self.get(&[ONE_TIMESCALE])
    }
}
