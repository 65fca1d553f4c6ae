use serde::Serialize;

use crate::error::{Error, Result};

/// Rates are judged against `r_th` with this absolute slack so that a
/// constraint met with equality in floating point is not an outage.
pub const OUTAGE_TOL: f64 = 1e-9;

/// Outcome of one frame (or one time bucket).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameMetrics {
    /// Realised average rate of each D2D pair.
    pub d2d_rates: Vec<f64>,
    /// Realised average rate of each CU.
    pub cu_rates: Vec<f64>,
    /// `(cu, dp)` pairs in use (at the end of the frame for schemes that
    /// re-pair).
    pub pairs: Vec<(usize, usize)>,
    pub weighted_sum_rate: f64,
    pub outage: Vec<bool>,
    pub eau_cu: f64,
    pub eau_d2d: f64,
    pub switch_count: usize,
    /// Instantaneous CSI acquisitions over the whole frame.
    pub csi_count: usize,
    pub subframes: usize,
    /// DMA rounds, zero for schemes that do not run it.
    pub iterations: usize,
}

impl FrameMetrics {
    pub fn outage_fraction(&self) -> f64 {
        if self.outage.is_empty() {
            return 0.0;
        }
        self.outage.iter().filter(|&&o| o).count() as f64 / self.outage.len() as f64
    }

    pub fn csi_per_subframe(&self) -> f64 {
        self.csi_count as f64 / self.subframes.max(1) as f64
    }

    pub fn check(&self, r_th: f64) -> Result<()> {
        let bad = |what: &str| Err(Error::Invariant(what.to_string()));
        if self
            .d2d_rates
            .iter()
            .chain(&self.cu_rates)
            .any(|r| !(r.is_finite() && *r >= 0.0))
        {
            return bad("realised rates must be finite and non-negative");
        }
        for (rate, &flag) in self.cu_rates.iter().zip(&self.outage) {
            if flag != is_outage(*rate, r_th) {
                return bad("outage flag disagrees with the realised CU rate");
            }
        }
        Ok(())
    }
}

pub fn is_outage(rate: f64, r_th: f64) -> bool {
    rate < r_th - OUTAGE_TOL
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

impl Stat {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Stat::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Stat { mean, stderr: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Stat {
            mean,
            stderr: (var / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub frames: usize,
    pub weighted_sum_rate: Stat,
    /// Fraction of CUs in outage.
    pub outage_fraction: Stat,
    pub eau_cu: Stat,
    pub eau_d2d: Stat,
    pub switch_count: Stat,
    pub csi_per_subframe: Stat,
    pub iterations: Stat,
}

pub fn aggregate_metrics(frames: &[FrameMetrics]) -> Result<Summary> {
    if frames.is_empty() {
        return Err(Error::domain("cannot aggregate an empty list of frames"));
    }
    let stat =
        |f: fn(&FrameMetrics) -> f64| Stat::from_samples(&frames.iter().map(f).collect::<Vec<_>>());
    Ok(Summary {
        frames: frames.len(),
        weighted_sum_rate: stat(|f| f.weighted_sum_rate),
        outage_fraction: stat(FrameMetrics::outage_fraction),
        eau_cu: stat(|f| f.eau_cu),
        eau_d2d: stat(|f| f.eau_d2d),
        switch_count: stat(|f| f.switch_count as f64),
        csi_per_subframe: stat(FrameMetrics::csi_per_subframe),
        iterations: stat(|f| f.iterations as f64),
    })
}
