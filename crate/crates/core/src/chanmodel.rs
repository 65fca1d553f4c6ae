//! Link gains and instantaneous achievable rates.
//!
//! Gains follow `h = ξ·L^{-γ}` with unit-mean exponential fading `ξ`,
//! independent across links and subframes. Rates are in nats/s/Hz.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gains are floored here before entering a rate expression.
pub const MIN_GAIN: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Position {
            x: radius * angle.cos(),
            y: radius * angle.sin(),
        }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Transmit powers and noise in watts, plus the pathloss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub p_c: f64,
    pub p_d: f64,
    pub n0: f64,
    pub gamma: f64,
}

impl Default for RadioParams {
    /// 20 mW for both transmitters, −100 dBm noise, γ = 4.
    fn default() -> Self {
        RadioParams {
            p_c: 0.02,
            p_d: 0.02,
            n0: dbm_to_watts(-100.0),
            gamma: 4.0,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_c", self.p_c), ("p_d", self.p_d), ("n0", self.n0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma.is_finite() && self.gamma >= 2.0) {
            return Err(Error::domain(format!(
                "pathloss exponent must be >= 2, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Linear gains of the four links involved when DT_n relays CU_m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairGains {
    /// CU_m → BS
    pub h_mb: f64,
    /// CU_m → DT_n
    pub h_mn: f64,
    /// DT_n → BS
    pub h_nb: f64,
    /// DT_n → DR_n
    pub h_nn: f64,
}

/// Link distances for a CU–D2D pair, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub d_mb: f64,
    pub d_mn: f64,
    pub d_nb: f64,
    pub d_nn: f64,
}

impl PairGeometry {
    pub fn from_positions(bs: Position, cu: Position, dt: Position, dr: Position) -> Self {
        PairGeometry {
            d_mb: cu.distance(&bs),
            d_mn: cu.distance(&dt),
            d_nb: dt.distance(&bs),
            d_nn: dt.distance(&dr),
        }
    }

    /// Pathloss-only gains (unit fading) of the four links.
    pub fn mean_gains(&self, gamma: f64) -> Result<PairGains> {
        Ok(PairGains {
            h_mb: link_gain(self.d_mb, gamma, 1.0)?,
            h_mn: link_gain(self.d_mn, gamma, 1.0)?,
            h_nb: link_gain(self.d_nb, gamma, 1.0)?,
            h_nn: link_gain(self.d_nn, gamma, 1.0)?,
        })
    }
}

/// One subframe's rate pair: `r_c` is the best CU rate over the whole
/// subframe (direct or relayed), `r_d` the D2D rate over the whole subframe.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateState {
    pub r_c: f64,
    pub r_d: f64,
}

impl RateState {
    pub fn new(r_c: f64, r_d: f64) -> Self {
        RateState { r_c, r_d }
    }
}

/// Weighted sample standing in for the joint distribution of `(r_c, r_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStateSet {
    states: Vec<RateState>,
    weights: Vec<f64>,
}

impl EmpiricalStateSet {
    /// Equal weights `1/K`.
    pub fn uniform(states: Vec<RateState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::domain("state set must be non-empty"));
        }
        let w = 1.0 / states.len() as f64;
        let weights = vec![w; states.len()];
        Self::weighted(states, weights)
    }

    /// Explicit weights; they are renormalised so that they sum to one.
    pub fn weighted(states: Vec<RateState>, weights: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::domain("state set must be non-empty"));
        }
        if states.len() != weights.len() {
            return Err(Error::domain("states and weights differ in length"));
        }
        for s in &states {
            if !(s.r_c.is_finite() && s.r_d.is_finite() && s.r_c >= 0.0 && s.r_d >= 0.0) {
                return Err(Error::domain(format!("invalid rate state {s:?}")));
            }
        }
        if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::domain("weights must be positive and finite"));
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(EmpiricalStateSet { states, weights })
    }

    pub fn states(&self) -> &[RateState] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &RateState)> + '_ {
        self.weights.iter().copied().zip(self.states.iter())
    }

    /// Weighted mean of an arbitrary state function.
    pub fn expect(&self, f: impl Fn(&RateState) -> f64) -> f64 {
        self.iter().map(|(w, s)| w * f(s)).sum()
    }

    pub fn mean_r_c(&self) -> f64 {
        self.expect(|s| s.r_c)
    }

    pub fn mean_r_d(&self) -> f64 {
        self.expect(|s| s.r_d)
    }
}

/// `ξ·L^{-γ}`, floored at [`MIN_GAIN`].
pub fn link_gain(distance: f64, gamma: f64, fading: f64) -> Result<f64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::domain(format!(
            "distance must be positive, got {distance}"
        )));
    }
    if !(fading.is_finite() && fading >= 0.0) {
        return Err(Error::domain(format!(
            "fading must be non-negative, got {fading}"
        )));
    }
    Ok((fading * distance.powf(-gamma)).max(MIN_GAIN))
}

/// Direct uplink rate `ln(1 + P_c·h_mb/N_0)`.
pub fn direct_rate(h_mb: f64, params: &RadioParams) -> f64 {
    (params.p_c * h_mb / params.n0).ln_1p()
}

/// Rates of one subframe under decode-and-forward relaying.
pub fn instantaneous_rates(gains: &PairGains, params: &RadioParams) -> RateState {
    let snr_mb = params.p_c * gains.h_mb / params.n0;
    let snr_mn = params.p_c * gains.h_mn / params.n0;
    let snr_nb = params.p_d * gains.h_nb / params.n0;
    let snr_nn = params.p_d * gains.h_nn / params.n0;

    let direct = snr_mb.ln_1p();
    let relay = 0.5 * snr_mn.ln_1p().min((snr_mb + snr_nb).ln_1p());
    RateState {
        r_c: direct.max(relay),
        r_d: snr_nn.ln_1p(),
    }
}

/// Pathloss of each link precomputed so repeated draws only pay for fading.
#[derive(Debug, Clone, Copy)]
pub struct PairChannel {
    mean: PairGains,
    params: RadioParams,
}

impl PairChannel {
    pub fn new(geom: &PairGeometry, params: &RadioParams) -> Result<Self> {
        params.validate()?;
        Ok(PairChannel {
            mean: geom.mean_gains(params.gamma)?,
            params: *params,
        })
    }

    /// Gains for one subframe given the four fading draws
    /// `[ξ_mb, ξ_mn, ξ_nb, ξ_nn]`.
    pub fn gains(&self, fading: [f64; 4]) -> PairGains {
        PairGains {
            h_mb: (fading[0] * self.mean.h_mb).max(MIN_GAIN),
            h_mn: (fading[1] * self.mean.h_mn).max(MIN_GAIN),
            h_nb: (fading[2] * self.mean.h_nb).max(MIN_GAIN),
            h_nn: (fading[3] * self.mean.h_nn).max(MIN_GAIN),
        }
    }

    pub fn rates(&self, fading: [f64; 4]) -> RateState {
        instantaneous_rates(&self.gains(fading), &self.params)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RateState {
        self.rates(draw_fading(rng))
    }
}

/// Four i.i.d. unit-mean exponential fading draws, in link order
/// `mb, mn, nb, nn`.
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    [
        rng.sample(Exp1),
        rng.sample(Exp1),
        rng.sample(Exp1),
        rng.sample(Exp1),
    ]
}

/// `count` i.i.d. subframe states for one pair, uniformly weighted.
pub fn sample_state_set<R: Rng + ?Sized>(
    geom: &PairGeometry,
    params: &RadioParams,
    count: usize,
    rng: &mut R,
) -> Result<EmpiricalStateSet> {
    if count == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let channel = PairChannel::new(geom, params)?;
    let states = (0..count).map(|_| channel.sample(rng)).collect();
    EmpiricalStateSet::uniform(states)
}
