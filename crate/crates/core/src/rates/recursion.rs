//! Iteration of the distance recursion
//! `eta_{k+1} <= eta_k (1 - C (1 - eta_k) / k) + D / k^(1 + beta)`
//! and the rate function `h` that bounds `eta_k h(k)`.

use serde::{Deserialize, Serialize};

use crate::rng::SimRng;

use super::RateError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionParams {
    pub c: f64,
    pub d: f64,
    pub beta_tilde: f64,
    pub epsilon: f64,
    pub eta0: f64,
    pub k0: u64,
}

impl RecursionParams {
    pub fn validate(&self) -> Result<(), RateError> {
        if !(self.c > 0.0) {
            return Err(RateError::InvalidRecursion("C must be positive"));
        }
        if !(self.d >= 0.0) {
            return Err(RateError::InvalidRecursion("D must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.beta_tilde) {
            return Err(RateError::InvalidRecursion("beta_tilde must lie in [0, 1]"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(RateError::InvalidRecursion("epsilon must lie in (0, 1)"));
        }
        if !(self.eta0 >= 0.0 && self.eta0 <= 1.0 - self.epsilon) {
            return Err(RateError::InvalidRecursion("eta0 must lie in [0, 1 - epsilon]"));
        }
        if self.k0 < 1 {
            return Err(RateError::InvalidRecursion("k0 must be at least 1"));
        }
        Ok(())
    }

    pub fn branch(&self) -> RateBranch {
        RateBranch::select(self.c, self.beta_tilde)
    }

    /// Right-hand side of the recursion at step `k`, before clamping.
    fn forcing(&self, eta: f64, k: u64) -> f64 {
        let kf = k as f64;
        eta * (1.0 - self.c * (1.0 - eta) / kf) + self.d / kf.powf(1.0 + self.beta_tilde)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateBranch {
    /// `h(k) = k^beta` when `beta < C`.
    Power,
    /// `h(k) = k^beta / ln k` when `beta = C`.
    LogCorrected,
    /// `h(k) = k^C` when `beta > C`.
    Saturated,
}

impl RateBranch {
    pub fn select(c: f64, beta_tilde: f64) -> Self {
        if beta_tilde < c {
            RateBranch::Power
        } else if beta_tilde == c {
            RateBranch::LogCorrected
        } else {
            RateBranch::Saturated
        }
    }
}

/// `h(k)`; the log-corrected branch is undefined at `k = 1` and returns `NaN` there.
pub fn rate_function(k: u64, c: f64, beta_tilde: f64) -> f64 {
    let kf = k as f64;
    match RateBranch::select(c, beta_tilde) {
        RateBranch::Power => kf.powf(beta_tilde),
        RateBranch::LogCorrected if k < 2 => f64::NAN,
        RateBranch::LogCorrected => kf.powf(beta_tilde) / kf.ln(),
        RateBranch::Saturated => kf.powf(c),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    /// Equality in the recursion: the extremal sequence.
    Equality,
    /// Each step lands at a uniform random fraction of the right-hand side,
    /// so the sequence satisfies the inequality strictly below the extremal one.
    InequalityRandom { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursionResult {
    pub params: RecursionParams,
    pub branch: RateBranch,
    /// `eta[i]` is `eta_{k0 + i}`.
    pub eta: Vec<f64>,
    /// `sup_{k0 <= k <= K} eta_k h(k)`, skipping `k = 1` on the log branch.
    pub sup_scaled: f64,
    /// Steps at which the iterate was clamped into `[0, 1 - epsilon]`.
    pub clamped_steps: u64,
}

impl RecursionResult {
    pub fn k_end(&self) -> u64 {
        self.params.k0 + self.eta.len() as u64 - 1
    }

    pub fn eta_at(&self, k: u64) -> Option<f64> {
        k.checked_sub(self.params.k0).and_then(|i| self.eta.get(i as usize).copied())
    }

    pub fn scaled_at(&self, k: u64) -> Option<f64> {
        self.eta_at(k).map(|e| e * rate_function(k, self.params.c, self.params.beta_tilde))
    }

    /// `sup eta_k h(k)` over `k` in `[lo, hi]` intersected with the computed range.
    pub fn window_sup(&self, lo: u64, hi: u64) -> f64 {
        let lo = lo.max(self.params.k0);
        let hi = hi.min(self.k_end());
        (lo..=hi).filter_map(|k| self.scaled_at(k)).filter(|x| !x.is_nan()).fold(0.0, f64::max)
    }
}

/// Iterates the recursion from `eta_{k0} = eta0` up to `eta_K`.
pub fn recursion_iterate(params: RecursionParams, k_end: u64, forcing: Forcing) -> Result<RecursionResult, RateError> {
    params.validate()?;
    if k_end <= params.k0 {
        return Err(RateError::InvalidRecursion("K must exceed k0"));
    }
    let ceiling = 1.0 - params.epsilon;
    let mut rng = match forcing {
        Forcing::Equality => None,
        Forcing::InequalityRandom { seed } => Some(SimRng::seed_from(seed)),
    };
    let mut eta = Vec::with_capacity((k_end - params.k0 + 1) as usize);
    let mut current = params.eta0;
    let mut clamped_steps = 0;
    eta.push(current);
    for k in params.k0..k_end {
        let mut next = params.forcing(current, k);
        if let Some(rng) = rng.as_mut() {
            next *= rng.unit();
        }
        if next < 0.0 || next > ceiling {
            clamped_steps += 1;
            next = next.clamp(0.0, ceiling);
        }
        current = next;
        eta.push(current);
    }
    let mut result = RecursionResult { params, branch: params.branch(), eta, sup_scaled: 0.0, clamped_steps };
    result.sup_scaled = result.window_sup(params.k0, k_end);
    Ok(result)
}
