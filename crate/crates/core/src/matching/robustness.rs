//! Marginal-contribution gaps, price bounds and unilateral deviations.

use super::{assignment::optimal_value, run_dma, Matching, PayoffMatrix, Selector};
use crate::error::{Error, Result};

fn all_but(count: usize, skip: usize) -> Vec<usize> {
    (0..count).filter(|&i| i != skip).collect()
}

fn c1_c2(cus: usize, dps: usize) -> (f64, f64) {
    (cus.min(dps.saturating_sub(1)) as f64, cus.min(dps) as f64)
}

/// `|V(M,N) − V(M,N∖{n}) − δ_n|`.
pub fn marginal_gap(values: &PayoffMatrix, matching: &Matching, n: usize) -> f64 {
    let cus: Vec<usize> = (0..values.cus()).collect();
    let dps: Vec<usize> = (0..values.dps()).collect();
    let full = optimal_value(values, &cus, &dps);
    let without = optimal_value(values, &cus, &all_but(values.dps(), n));
    (full - without - matching.dp_utility(values, n)).abs()
}

/// Largest gap the D2D utility bounds allow, in units of ε:
/// `max(4·C₁, C₁ + C₂ + 1)` with `C₁ = min{M, N−1}`, `C₂ = min{M, N}`.
pub fn marginal_gap_bound(cus: usize, dps: usize) -> f64 {
    let (c1, c2) = c1_c2(cus, dps);
    (4.0 * c1).max(c1 + c2 + 1.0)
}

/// Largest utility gain from a unilateral deviation, in units of ε.
pub fn deviation_bound(cus: usize, dps: usize) -> f64 {
    8.0 * cus.min(dps) as f64 + 1.0
}

/// Bracket for the price of a matched CU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceBound {
    pub cu: usize,
    pub dp: usize,
    pub price: f64,
    pub lower: f64,
    pub upper: f64,
}

impl PriceBound {
    pub fn holds(&self) -> bool {
        self.lower <= self.price && self.price <= self.upper
    }
}

/// For every matched pair `(m, n)`:
/// `p_m ∈ [B − (4C₁+C₂)ε, B + (C₁+C₂+1)ε]` with
/// `B = V(M, N∖{n}) − V(M∖{m}, N∖{n})`.
pub fn price_bounds(values: &PayoffMatrix, matching: &Matching, eps: f64) -> Vec<PriceBound> {
    let (c1, c2) = c1_c2(values.cus(), values.dps());
    let all_cus: Vec<usize> = (0..values.cus()).collect();
    matching
        .pairs()
        .map(|(m, n)| {
            let dps = all_but(values.dps(), n);
            let base = optimal_value(values, &all_cus, &dps)
                - optimal_value(values, &all_but(values.cus(), m), &dps);
            PriceBound {
                cu: m,
                dp: n,
                price: matching.price(m),
                lower: base - (4.0 * c1 + c2) * eps,
                upper: base + (c1 + c2 + 1.0) * eps,
            }
        })
        .collect()
}

/// Utility gain (true values) for D2D pair `n` from announcing `fake`
/// instead of its true value vector. Both runs use clones of `selector`.
pub fn deviation_gain(
    values: &PayoffMatrix,
    n: usize,
    fake: &[f64],
    eps: f64,
    selector: &Selector,
) -> Result<f64> {
    if n >= values.dps() {
        return Err(Error::domain(format!("no D2D pair {n}")));
    }
    let (truthful, _) = run_dma(values, eps, &mut selector.clone())?;
    let deviated_values = values.with_value_vector(n, fake)?;
    let (deviated, _) = run_dma(&deviated_values, eps, &mut selector.clone())?;
    // Utility is always judged with the true values.
    Ok(deviated.dp_utility(values, n) - truthful.dp_utility(values, n))
}
