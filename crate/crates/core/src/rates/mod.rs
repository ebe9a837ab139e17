//! Checkpoint schedules, power-law fits, ensemble medians, the `eta`
//! recursion solver, and the theoretical rate bands.

mod bands;
mod fit;
mod record;
mod recursion;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bands::{band_verdict, leaf_exponent_target, theorem2_band, BandVerdict, RateBand};
pub use fit::{fit_power_exponent, PowerFit};
pub use record::CheckpointRecord;
pub use recursion::{rate_function, recursion_iterate, Forcing, RateBranch, RecursionParams, RecursionResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("checkpoint exponent must exceed 1, got {0}")]
    ExponentTooSmall(f64),
    #[error("k_max must be at least 1")]
    EmptySchedule,
    #[error("need at least 3 points for a fit, got {0}")]
    TooFewPoints(usize),
    #[error("fit values and times must be positive (t = {t}, value = {value})")]
    NonPositive { t: f64, value: f64 },
    #[error("fit times must be distinct")]
    DegenerateTimes,
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("replica {replica} does not share the checkpoint schedule of replica {reference}")]
    ScheduleMismatch { replica: u64, reference: u64 },
    #[error("invalid recursion parameters: {0}")]
    InvalidRecursion(&'static str),
    #[error("rate bands need d >= 3, got {0}")]
    DimensionTooSmall(usize),
}

/// One scheduled observation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: u64,
    pub t: u64,
}

/// Times `round(k^m)` for `k = 1..=k_max`, deduplicated.
pub fn checkpoint_schedule(m: f64, k_max: u64) -> Result<Vec<u64>, RateError> {
    Ok(checkpoint_plan(m, k_max)?.into_iter().map(|c| c.t).collect())
}

/// Like [`checkpoint_schedule`], keeping the first `k` that produced each time.
pub fn checkpoint_plan(m: f64, k_max: u64) -> Result<Vec<Checkpoint>, RateError> {
    if !(m > 1.0) {
        return Err(RateError::ExponentTooSmall(m));
    }
    if k_max < 1 {
        return Err(RateError::EmptySchedule);
    }
    let mut plan: Vec<Checkpoint> = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let t = (k as f64).powf(m).round() as u64;
        if plan.last().is_none_or(|c| t > c.t) {
            plan.push(Checkpoint { k, t });
        }
    }
    Ok(plan)
}

/// Largest `k` with `round(k^m) <= t_max`.
pub fn k_max_for_horizon(m: f64, t_max: u64) -> u64 {
    let mut k = (t_max as f64).powf(1.0 / m).floor() as u64;
    while ((k + 1) as f64).powf(m).round() as u64 <= t_max {
        k += 1;
    }
    while k > 0 && (k as f64).powf(m).round() as u64 > t_max {
        k -= 1;
    }
    k
}

/// Element at rank `floor(q * (n - 1))` of an ascending slice; `q = 0.5`
/// gives the lower median.
pub fn lower_quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).floor() as usize;
    sorted[idx]
}

/// Lower median of an unsorted sample. Panics on an empty sample.
pub fn lower_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    lower_quantile(&v, 0.5)
}

/// Per-checkpoint values of `metric` across replicas, checked to share one schedule.
pub fn checkpoint_columns<F>(ensemble: &[Vec<CheckpointRecord>], metric: F) -> Result<Vec<(u64, Vec<f64>)>, RateError>
where
    F: Fn(&CheckpointRecord) -> f64,
{
    let reference = ensemble.first().ok_or(RateError::EmptyEnsemble)?;
    let ref_id = reference.first().map_or(0, |r| r.replica);
    for replica in &ensemble[1..] {
        let same =
            replica.len() == reference.len() && replica.iter().zip(reference).all(|(a, b)| a.k == b.k && a.t == b.t);
        if !same {
            let id = replica.first().map_or(0, |r| r.replica);
            return Err(RateError::ScheduleMismatch { replica: id, reference: ref_id });
        }
    }
    Ok(reference.iter().enumerate().map(|(i, rec)| (rec.t, ensemble.iter().map(|r| metric(&r[i])).collect())).collect())
}

/// `(t_k, lower median of metric)` across replicas.
pub fn median_curve<F>(ensemble: &[Vec<CheckpointRecord>], metric: F) -> Result<Vec<(u64, f64)>, RateError>
where
    F: Fn(&CheckpointRecord) -> f64,
{
    Ok(checkpoint_columns(ensemble, metric)?.into_iter().map(|(t, values)| (t, lower_median(&values))).collect())
}
