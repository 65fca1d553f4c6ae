//! Short-timescale cooperation policy for one CU–D2D pair.
//!
//! The policy maps a subframe's rate state `(r_c, r_d)` to the D2D share
//! `π ∈ [0, 1]` of that subframe. The optimum that maximises `E{π·r_d}`
//! subject to `E{(1−π)·r_c} ≥ r_th` is a threshold rule on the ratio
//! `r_d / r_c`: states above `λ*` go to the D2D link, states below stay with
//! the CU, and the tie group at exactly `λ*` is split so the CU constraint
//! binds with equality.

use crate::chanmodel::{EmpiricalStateSet, RateState};
use crate::error::{Error, Result};

/// Relative tolerance used when grouping equal ratios into one tie group.
pub const TIE_RTOL: f64 = 1e-12;

pub const DEFAULT_EPS0: f64 = 1e-9;

/// Optimal threshold policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy {
    pub lambda_star: f64,
    /// D2D share on tie states.
    pub alpha_tie: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SolveMethod {
    /// Sort states by ratio and accumulate CU coverage.
    #[default]
    Exact,
    /// Binary search on λ with stopping width `eps0`.
    Bisection { eps0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySolution {
    Feasible(ThresholdPolicy),
    /// `E{r_c} < r_th`: no policy can serve the CU.
    Infeasible,
}

impl PolicySolution {
    pub fn policy(&self) -> Option<ThresholdPolicy> {
        match self {
            PolicySolution::Feasible(p) => Some(*p),
            PolicySolution::Infeasible => None,
        }
    }
}

/// Expected D2D and CU rates achieved by a policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyOutcome {
    pub d2d_rate: f64,
    pub cu_rate: f64,
    pub feasible: bool,
}

/// Long-term payoff of a pair and its weighted value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPayoff {
    pub u: f64,
    pub v: f64,
    pub solution: PolicySolution,
}

/// Ratio `r_d / r_c`; `+∞` when the CU rate is zero.
fn ratio(s: &RateState) -> f64 {
    if s.r_c > 0.0 {
        s.r_d / s.r_c
    } else {
        f64::INFINITY
    }
}

impl ThresholdPolicy {
    /// Whole subframe to the D2D link.
    pub fn all_d2d() -> Self {
        ThresholdPolicy {
            lambda_star: 0.0,
            alpha_tie: 1.0,
        }
    }

    /// D2D share `π(s)` for a single state.
    pub fn allocation(&self, s: &RateState) -> f64 {
        if s.r_c <= 0.0 {
            return if s.r_d > 0.0 { 1.0 } else { 0.0 };
        }
        let rho = s.r_d / s.r_c;
        let lam = self.lambda_star;
        if rho < lam {
            0.0
        } else if rho <= lam * (1.0 + TIE_RTOL) {
            self.alpha_tie
        } else {
            1.0
        }
    }

    /// `(D2D rate, CU rate)` realised on one subframe.
    pub fn realize(&self, s: &RateState) -> (f64, f64) {
        let pi = self.allocation(s);
        (pi * s.r_d, (1.0 - pi) * s.r_c)
    }
}

/// `E{r_c · I(λ·r_c ≥ r_d)}`, nondecreasing in `λ`.
pub fn coverage_value(states: &EmpiricalStateSet, lambda: f64) -> f64 {
    states.expect(|s| if ratio(s) <= lambda { s.r_c } else { 0.0 })
}

/// `(ratio, w·r_c)` for states with a positive CU rate, sorted by ratio.
fn sorted_breakpoints(states: &EmpiricalStateSet) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = states
        .iter()
        .filter(|(_, s)| s.r_c > 0.0)
        .map(|(w, s)| (s.r_d / s.r_c, w * s.r_c))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// Walks tie groups of `pts` starting from accumulated coverage `below`
/// until the running sum reaches `r_th`.
fn crossing(pts: &[(f64, f64)], mut below: f64, r_th: f64) -> Option<ThresholdPolicy> {
    let mut i = 0;
    let mut last = None;
    while i < pts.len() {
        let rep = pts[i].0;
        let limit = rep * (1.0 + TIE_RTOL);
        let mut group = 0.0;
        let mut j = i;
        while j < pts.len() && pts[j].0 <= limit {
            group += pts[j].1;
            j += 1;
        }
        let policy = tie_split(rep, below, group, r_th);
        if below + group >= r_th {
            return Some(policy);
        }
        last = Some(policy);
        below += group;
        i = j;
    }
    // Summation order can leave the total a hair under r_th; the last group
    // is then the crossing.
    last
}

fn tie_split(lambda: f64, below: f64, group: f64, r_th: f64) -> ThresholdPolicy {
    let alpha = if group > 0.0 {
        ((below + group - r_th) / group).clamp(0.0, 1.0)
    } else {
        1.0
    };
    ThresholdPolicy {
        lambda_star: lambda,
        alpha_tie: alpha,
    }
}

/// Optimal threshold policy for the pair, or `Infeasible`.
pub fn solve_policy(
    states: &EmpiricalStateSet,
    r_th: f64,
    method: SolveMethod,
) -> Result<PolicySolution> {
    if !(r_th.is_finite() && r_th >= 0.0) {
        return Err(Error::domain(format!("r_th must be >= 0, got {r_th}")));
    }
    if states.mean_r_c() < r_th {
        return Ok(PolicySolution::Infeasible);
    }
    if r_th == 0.0 {
        return Ok(PolicySolution::Feasible(ThresholdPolicy::all_d2d()));
    }
    let pts = sorted_breakpoints(states);
    let policy = match method {
        SolveMethod::Exact => crossing(&pts, 0.0, r_th),
        SolveMethod::Bisection { eps0 } => {
            if !(eps0.is_finite() && eps0 > 0.0) {
                return Err(Error::domain(format!("eps0 must be positive, got {eps0}")));
            }
            bisection(states, &pts, r_th, eps0)
        }
    };
    policy
        .map(PolicySolution::Feasible)
        .ok_or_else(|| Error::Invariant("feasible policy without a crossing".into()))
}

fn bisection(
    states: &EmpiricalStateSet,
    pts: &[(f64, f64)],
    r_th: f64,
    eps0: f64,
) -> Option<ThresholdPolicy> {
    let lambda_max = pts.last()?.0 + 1.0;
    let (mut lo, mut hi) = (0.0f64, lambda_max);
    // Coverage at `lo` is known to be short of `r_th` only once lo has moved.
    let mut lo_short = false;
    while hi - lo > eps0 {
        let mid = 0.5 * (lo + hi);
        if coverage_value(states, mid) < r_th {
            lo = mid;
            lo_short = true;
        } else {
            hi = mid;
        }
    }
    // The tie share needs λ* on a breakpoint: snap to the crossing inside
    // the final bracket (lo, hi].
    let start = if lo_short {
        pts.partition_point(|p| p.0 <= lo)
    } else {
        0
    };
    let below: f64 = pts[..start].iter().map(|p| p.1).sum();
    crossing(&pts[start..], below, r_th)
}

/// Exact expectations of `π·r_d` and `(1−π)·r_c` under `policy`.
pub fn evaluate_policy(states: &EmpiricalStateSet, policy: &ThresholdPolicy) -> PolicyOutcome {
    let (mut d2d, mut cu) = (0.0, 0.0);
    for (w, s) in states.iter() {
        let (d, c) = policy.realize(s);
        d2d += w * d;
        cu += w * c;
    }
    PolicyOutcome {
        d2d_rate: d2d,
        cu_rate: cu,
        feasible: true,
    }
}

/// Outcome when the pair is infeasible: the CU keeps every subframe.
pub fn infeasible_outcome(states: &EmpiricalStateSet) -> PolicyOutcome {
    PolicyOutcome {
        d2d_rate: 0.0,
        cu_rate: states.mean_r_c(),
        feasible: false,
    }
}

/// `u = E{π*·r_d}` (or −1 when infeasible) and `v = w·u`.
pub fn pair_payoff(states: &EmpiricalStateSet, r_th: f64, w: f64) -> Result<PairPayoff> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::domain(format!("weight must be positive, got {w}")));
    }
    let solution = solve_policy(states, r_th, SolveMethod::Exact)?;
    let u = match &solution {
        PolicySolution::Feasible(p) => evaluate_policy(states, p).d2d_rate,
        PolicySolution::Infeasible => -1.0,
    };
    Ok(PairPayoff {
        u,
        v: w * u,
        solution,
    })
}

/// Sufficient condition under which the threshold policy also maximises
/// `E{π·r_d + η(1−π)·r_c}`: `Pr{r_d > η·r_c} > 1 − r_th² / E{r_c²}`.
pub fn weighted_sum_condition(states: &EmpiricalStateSet, eta: f64, r_th: f64) -> bool {
    let pr = states.expect(|s| if s.r_d > eta * s.r_c { 1.0 } else { 0.0 });
    let second = states.expect(|s| s.r_c * s.r_c);
    let rhs = if second > 0.0 {
        1.0 - r_th * r_th / second
    } else if r_th > 0.0 {
        f64::NEG_INFINITY
    } else {
        1.0
    };
    pr > rhs
}
