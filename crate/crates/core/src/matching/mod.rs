//! Long-timescale pairing of CUs and D2D pairs as an assignment game.
//!
//! Rows of a [`PayoffMatrix`] are CUs (`m`), columns are D2D pairs (`n`).
//! A [`Matching`] carries the one-to-one pairing plus per-CU prices; the CU's
//! utility is its price and the D2D pair's utility is its value minus the
//! price it pays.

mod assignment;
mod baselines;
mod dma;
mod robustness;

pub use assignment::{optimal_assignment, optimal_value, Assignment};
pub use baselines::{matching_without_transfer, random_matching};
pub use dma::{demand, run_dma, DmaRound, DmaTrace, Selector};
pub use robustness::{
    deviation_bound, deviation_gain, marginal_gap, marginal_gap_bound, price_bounds, PriceBound,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `v_mn = w_n·u_mn` for every CU–D2D pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    cus: usize,
    dps: usize,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl PayoffMatrix {
    /// Builds from CU rows of weighted values; weights are recorded as 1.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cus = rows.len();
        let dps = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dps) {
            return Err(Error::domain("payoff rows differ in length"));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(cus, dps, values, vec![1.0; dps])
    }

    /// Builds `v_mn = w_n·u_mn` from unweighted payoffs.
    pub fn from_payoffs(rows: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        let mut pm = Self::from_rows(rows)?;
        if weights.len() != pm.dps {
            return Err(Error::domain("one weight per D2D pair required"));
        }
        for m in 0..pm.cus {
            for n in 0..pm.dps {
                pm.values[m * pm.dps + n] *= weights[n];
            }
        }
        pm.weights = weights.to_vec();
        Ok(pm)
    }

    pub fn new(cus: usize, dps: usize, values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if cus == 0 || dps == 0 {
            return Err(Error::domain(
                "payoff matrix needs at least one CU and one D2D pair",
            ));
        }
        if values.len() != cus * dps || weights.len() != dps {
            return Err(Error::domain("payoff matrix dimensions mismatch"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("payoff values must be finite"));
        }
        Ok(PayoffMatrix {
            cus,
            dps,
            values,
            weights,
        })
    }

    pub fn cus(&self) -> usize {
        self.cus
    }

    pub fn dps(&self) -> usize {
        self.dps
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.dps + n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `max_mn v_mn`.
    pub fn v_max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value vector `(v_1n, …, v_Mn)` of D2D pair `n`.
    pub fn value_vector(&self, n: usize) -> Vec<f64> {
        (0..self.cus).map(|m| self.get(m, n)).collect()
    }

    /// Copy with D2D pair `n`'s value vector replaced.
    pub fn with_value_vector(&self, n: usize, vector: &[f64]) -> Result<Self> {
        if n >= self.dps || vector.len() != self.cus {
            return Err(Error::domain("bad value vector replacement"));
        }
        let mut out = self.clone();
        for (m, &v) in vector.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::domain("payoff values must be finite"));
            }
            out.values[m * self.dps + n] = v;
        }
        Ok(out)
    }

    /// Copy with every value (not weight) multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }
}

/// One-to-one partial pairing with per-CU prices in integer ticks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    cu_partner: Vec<Option<usize>>,
    dp_partner: Vec<Option<usize>>,
    price_ticks: Vec<u64>,
    tick: f64,
}

impl Matching {
    pub fn empty(cus: usize, dps: usize) -> Self {
        Matching {
            cu_partner: vec![None; cus],
            dp_partner: vec![None; dps],
            price_ticks: vec![0; cus],
            tick: 0.0,
        }
    }

    /// Zero-price matching from `(m, n)` pairs.
    pub fn from_pairs(cus: usize, dps: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut out = Self::empty(cus, dps);
        for &(m, n) in pairs {
            if m >= cus || n >= dps {
                return Err(Error::domain(format!("pair ({m}, {n}) out of range")));
            }
            if out.cu_partner[m].is_some() || out.dp_partner[n].is_some() {
                return Err(Error::domain(format!("pair ({m}, {n}) is not one-to-one")));
            }
            out.cu_partner[m] = Some(n);
            out.dp_partner[n] = Some(m);
        }
        Ok(out)
    }

    pub(crate) fn from_parts(
        cu_partner: Vec<Option<usize>>,
        dp_partner: Vec<Option<usize>>,
        price_ticks: Vec<u64>,
        tick: f64,
    ) -> Self {
        let m = Matching {
            cu_partner,
            dp_partner,
            price_ticks,
            tick,
        };
        debug_assert!(m.check().is_ok(), "{:?}", m.check());
        m
    }

    /// Mutual consistency and the unmatched-CU-pays-nothing rule.
    pub fn check(&self) -> Result<()> {
        for (m, p) in self.cu_partner.iter().enumerate() {
            match p {
                Some(n) if self.dp_partner.get(*n) != Some(&Some(m)) => {
                    return Err(Error::Invariant(format!("CU {m} and DP {n} disagree")));
                }
                None if self.price_ticks[m] != 0 => {
                    return Err(Error::Invariant(format!("unmatched CU {m} has a price")));
                }
                _ => {}
            }
        }
        for (n, p) in self.dp_partner.iter().enumerate() {
            if let Some(m) = p {
                if self.cu_partner.get(*m) != Some(&Some(n)) {
                    return Err(Error::Invariant(format!("DP {n} and CU {m} disagree")));
                }
            }
        }
        Ok(())
    }

    pub fn cus(&self) -> usize {
        self.cu_partner.len()
    }

    pub fn dps(&self) -> usize {
        self.dp_partner.len()
    }

    pub fn cu_partner(&self, m: usize) -> Option<usize> {
        self.cu_partner[m]
    }

    pub fn dp_partner(&self, n: usize) -> Option<usize> {
        self.dp_partner[n]
    }

    pub fn price_ticks(&self, m: usize) -> u64 {
        self.price_ticks[m]
    }

    /// Price step the ticks are counted in.
    pub fn tick(&self) -> f64 {
        self.tick
    }

    pub fn price(&self, m: usize) -> f64 {
        self.price_ticks[m] as f64 * self.tick
    }

    /// Matched `(cu, dp)` pairs in CU order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cu_partner
            .iter()
            .enumerate()
            .filter_map(|(m, p)| p.map(|n| (m, n)))
    }

    pub fn matched_count(&self) -> usize {
        self.pairs().count()
    }

    /// `θ_m = p_m`.
    pub fn cu_utility(&self, m: usize) -> f64 {
        self.price(m)
    }

    /// `δ_n = v_{μ(n)n} − p_{μ(n)}`, zero when unmatched.
    pub fn dp_utility(&self, values: &PayoffMatrix, n: usize) -> f64 {
        match self.dp_partner[n] {
            Some(m) => values.get(m, n) - self.price(m),
            None => 0.0,
        }
    }
}

/// `Σ v_mn` over matched pairs.
pub fn assignment_value(values: &PayoffMatrix, matching: &Matching) -> f64 {
    matching.pairs().map(|(m, n)| values.get(m, n)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeCuUtility {
        cu: usize,
        utility: f64,
    },
    NegativeDpUtility {
        dp: usize,
        utility: f64,
    },
    /// `θ_m + δ_n < v_mn − ε`.
    Blocking {
        cu: usize,
        dp: usize,
        shortfall: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub violations: Vec<Violation>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks individual rationality and the ε-blocking condition for every pair.
pub fn verify_eps_stable(values: &PayoffMatrix, matching: &Matching, eps: f64) -> StabilityReport {
    let mut violations = Vec::new();
    let theta: Vec<f64> = (0..values.cus()).map(|m| matching.cu_utility(m)).collect();
    let delta: Vec<f64> = (0..values.dps())
        .map(|n| matching.dp_utility(values, n))
        .collect();
    for (m, &t) in theta.iter().enumerate() {
        if t < 0.0 {
            violations.push(Violation::NegativeCuUtility { cu: m, utility: t });
        }
    }
    for (n, &d) in delta.iter().enumerate() {
        if d < 0.0 {
            violations.push(Violation::NegativeDpUtility { dp: n, utility: d });
        }
    }
    for m in 0..values.cus() {
        for n in 0..values.dps() {
            if matching.cu_partner(m) == Some(n) {
                // θ_m + δ_n = v_mn by construction.
                continue;
            }
            let need = values.get(m, n) - eps;
            let have = theta[m] + delta[n];
            if have < need {
                violations.push(Violation::Blocking {
                    cu: m,
                    dp: n,
                    shortfall: need - have,
                });
            }
        }
    }
    StabilityReport { violations }
}
