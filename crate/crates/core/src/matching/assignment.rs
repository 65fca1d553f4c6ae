//! Exact optimal assignment (Hungarian algorithm).
//!
//! Rectangular instances are padded to a square; negative values are treated
//! as "leave unmatched" and never appear in the result.

use super::{Matching, PayoffMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Matched `(cu, dp)` pairs, all with `v_mn ≥ 0`.
    pub pairs: Vec<(usize, usize)>,
    pub value: f64,
}

impl Assignment {
    pub fn to_matching(&self, cus: usize, dps: usize) -> Matching {
        Matching::from_pairs(cus, dps, &self.pairs).expect("assignment is one-to-one")
    }
}

/// Min-cost perfect assignment on a square matrix, O(n³).
/// Returns `col_of_row`.
fn hungarian_min(cost: &[f64], n: usize) -> Vec<usize> {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            col_of_row[p[j] - 1] = j - 1;
        }
    }
    col_of_row
}

/// Optimal assignment restricted to the given CU and D2D index sets.
fn solve_subset(values: &PayoffMatrix, cus: &[usize], dps: &[usize]) -> Assignment {
    let size = cus.len().max(dps.len());
    if size == 0 || cus.is_empty() || dps.is_empty() {
        return Assignment {
            pairs: Vec::new(),
            value: 0.0,
        };
    }
    let mut cost = vec![0.0; size * size];
    for (i, &m) in cus.iter().enumerate() {
        for (j, &n) in dps.iter().enumerate() {
            cost[i * size + j] = -values.get(m, n).max(0.0);
        }
    }
    let col_of_row = hungarian_min(&cost, size);
    let mut pairs: Vec<(usize, usize)> = col_of_row
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < cus.len() && j < dps.len())
        .map(|(i, &j)| (cus[i], dps[j]))
        .filter(|&(m, n)| values.get(m, n) >= 0.0)
        .collect();
    pairs.sort_unstable();
    let value = pairs.iter().map(|&(m, n)| values.get(m, n)).sum();
    Assignment { pairs, value }
}

/// Maximum-value one-to-one partial assignment.
pub fn optimal_assignment(values: &PayoffMatrix) -> Assignment {
    let cus: Vec<usize> = (0..values.cus()).collect();
    let dps: Vec<usize> = (0..values.dps()).collect();
    solve_subset(values, &cus, &dps)
}

/// `V(M₁, N₁)`: optimal value with only the listed CUs and D2D pairs.
pub fn optimal_value(values: &PayoffMatrix, cus: &[usize], dps: &[usize]) -> f64 {
    solve_subset(values, cus, dps).value
}
