//! Bernoulli large-deviation tools: relative entropy, Chernoff bounds,
//! the frozen-weight visit predictor, and the block concentration check.
//!
//! Logarithms are natural throughout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdError {
    #[error("{name} = {value} is outside (0, 1)")]
    OutOfUnitInterval { name: &'static str, value: f64 },
    #[error("threshold a = {a} is on the wrong side of p = {p} for the {side:?} tail")]
    WrongSide { a: f64, p: f64, side: Tail },
    #[error("frozen shares are undefined: every alpha is 0 or 1")]
    ZeroDenominator,
    #[error("alphas must be positive with sum at most 1")]
    InvalidAlpha,
    #[error("vector lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("concentration check needs m > 1 and nu > 0")]
    InvalidScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Upper,
    Lower,
}

fn open_unit(name: &'static str, value: f64) -> Result<f64, LdError> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(LdError::OutOfUnitInterval { name, value })
    }
}

/// `H(a, p) = a ln(a/p) + (1-a) ln((1-a)/(1-p))`.
pub fn entropy(a: f64, p: f64) -> Result<f64, LdError> {
    let a = open_unit("a", a)?;
    let p = open_unit("p", p)?;
    Ok(a * (a / p).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - p)).ln())
}

/// `exp(-n H(a, p))`, which bounds `P(mean >= a)` for `a` in `[p, 1)` and
/// `P(mean <= a)` for `a` in `(0, p]`.
pub fn chernoff_bound(n: u64, p: f64, a: f64, side: Tail) -> Result<f64, LdError> {
    let h = entropy(a, p)?;
    let valid = match side {
        Tail::Upper => a >= p,
        Tail::Lower => a <= p,
    };
    if !valid {
        return Err(LdError::WrongSide { a, p, side });
    }
    Ok((-(n as f64) * h).exp())
}

/// Relative gap above which [`EntropyApprox::in_small_delta_regime`] is false.
pub const SMALL_DELTA_REL_GAP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyApprox {
    pub exact: f64,
    /// `delta^2 / (2 p (1-p))` with `delta = a - p`.
    pub quadratic: f64,
    /// `|exact - quadratic| / exact`; 0 when both vanish.
    pub relative_gap: f64,
    pub in_small_delta_regime: bool,
}

/// Exact entropy against its quadratic expansion around `a = p`.
pub fn entropy_approx_check(a: f64, p: f64) -> Result<EntropyApprox, LdError> {
    let exact = entropy(a, p)?;
    let delta = a - p;
    let quadratic = delta * delta / (2.0 * p * (1.0 - p));
    let relative_gap = if exact == 0.0 { 0.0 } else { (exact - quadratic).abs() / exact };
    Ok(EntropyApprox { exact, quadratic, relative_gap, in_small_delta_regime: relative_gap <= SMALL_DELTA_REL_GAP })
}

/// Small-`p` expansion `p (r ln r - r + 1)` for `a = r p`.
pub fn entropy_small_p_approx(a: f64, p: f64) -> Result<f64, LdError> {
    open_unit("a", a)?;
    let p = open_unit("p", p)?;
    let r = a / p;
    Ok(p * (r * r.ln() - r + 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrozenPrediction {
    pub shares: Vec<f64>,
    pub expected_counts: Vec<f64>,
}

/// Visit shares `alpha_i (1 - alpha_i) / sum_j alpha_j (1 - alpha_j)` of a
/// walk whose interior weights are frozen at proportions `alpha`, and the
/// expected visit counts over a block of `block_len` steps.
pub fn frozen_prediction(alpha: &[f64], block_len: f64) -> Result<FrozenPrediction, LdError> {
    if alpha.iter().any(|&a| !(a > 0.0)) || alpha.iter().sum::<f64>() > 1.0 + 1e-12 {
        return Err(LdError::InvalidAlpha);
    }
    let raw: Vec<f64> = alpha.iter().map(|&a| a * (1.0 - a)).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(LdError::ZeroDenominator);
    }
    let shares: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let expected_counts = shares.iter().map(|s| s * block_len).collect();
    Ok(FrozenPrediction { shares, expected_counts })
}

/// Deviation allowance `k^((m-1)/2 + nu)` for block `k`.
pub fn ek_threshold(k: u64, m: f64, nu: f64) -> f64 {
    (k as f64).powf((m - 1.0) / 2.0 + nu)
}

/// Whether every observed block count lies within [`ek_threshold`] of its prediction.
pub fn ek_check(observed: &[u64], predicted: &[f64], k: u64, m: f64, nu: f64) -> Result<bool, LdError> {
    if observed.len() != predicted.len() {
        return Err(LdError::LengthMismatch(observed.len(), predicted.len()));
    }
    if !(m > 1.0 && nu > 0.0) {
        return Err(LdError::InvalidScale);
    }
    let threshold = ek_threshold(k, m, nu);
    Ok(observed.iter().zip(predicted).all(|(&o, &p)| (o as f64 - p).abs() <= threshold))
}

/// Exact `P(Bin(n, p) >= k)`, summed in log space.
pub fn binomial_upper_tail(n: u64, p: f64, k: u64) -> f64 {
    (k..=n).map(|j| binomial_pmf(n, p, j)).sum()
}

/// Exact `P(Bin(n, p) <= k)`.
pub fn binomial_lower_tail(n: u64, p: f64, k: u64) -> f64 {
    (0..=k.min(n)).map(|j| binomial_pmf(n, p, j)).sum()
}

fn binomial_pmf(n: u64, p: f64, j: u64) -> f64 {
    let ln_choose: f64 = (1..=j).map(|i| ((n - j + i) as f64 / i as f64).ln()).sum();
    (ln_choose + j as f64 * p.ln() + (n - j) as f64 * (1.0 - p).ln()).exp()
}
