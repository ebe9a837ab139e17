use serde::{Deserialize, Serialize};

use super::RateError;

/// Decay exponents bracketing `||pi(t) - pi_unif||`: the distance decays at
/// least like `t^-upper`, and (with a leaf present) no faster than `t^-lower`.
/// The arbitrarily small slack in the asymptotic statements is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBand {
    pub upper: f64,
    pub lower: Option<f64>,
}

pub fn theorem2_band(d: usize, has_leaf: bool) -> Result<RateBand, RateError> {
    if d < 3 {
        return Err(RateError::DimensionTooSmall(d));
    }
    let upper = if d <= 4 { 1.0 / 3.0 } else { 1.0 / (d - 1) as f64 };
    let lower = has_leaf.then(|| (d - 2) as f64 / (d - 1) as f64);
    Ok(RateBand { upper, lower })
}

/// Growth exponent `1/(d-1)` of the total leaf weight at one interior vertex.
pub fn leaf_exponent_target(d: usize) -> Result<f64, RateError> {
    if d < 3 {
        return Err(RateError::DimensionTooSmall(d));
    }
    Ok(1.0 / (d - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandVerdict {
    /// Fitted decay is at least as fast as `t^-upper` (within slack).
    pub upper_consistent: bool,
    /// Fitted decay is no faster than `t^-lower` (within slack); absent without leaves.
    pub lower_consistent: Option<bool>,
}

/// Compares a fitted log-log slope of the distance against a band.
pub fn band_verdict(slope: f64, band: &RateBand, slack: f64) -> BandVerdict {
    BandVerdict {
        upper_consistent: slope <= -band.upper + slack,
        lower_consistent: band.lower.map(|lower| slope >= -lower - slack),
    }
}
