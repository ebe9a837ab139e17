use serde::{Deserialize, Serialize};

use super::RateError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub rms_residual: f64,
    pub points: usize,
}

/// Ordinary least squares of `ln(value)` on `ln(t)`.
pub fn fit_power_exponent(points: &[(f64, f64)]) -> Result<PowerFit, RateError> {
    if points.len() < 3 {
        return Err(RateError::TooFewPoints(points.len()));
    }
    if let Some(&(t, value)) = points.iter().find(|(t, v)| !(*t > 0.0) || !(*v > 0.0)) {
        return Err(RateError::NonPositive { t, value });
    }
    let mut ts: Vec<f64> = points.iter().map(|p| p.0).collect();
    ts.sort_by(f64::total_cmp);
    if ts.windows(2).any(|w| w[0] == w[1]) {
        return Err(RateError::DegenerateTimes);
    }

    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerFit { slope, intercept, rms_residual: (sse / n).sqrt(), points: points.len() })
}
