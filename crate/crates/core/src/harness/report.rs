//! Ensemble summaries: checkpoint quantiles, exponent fits, band verdicts.

use serde::Serialize;

use crate::graph::Family;
use crate::rates::{
    band_verdict, checkpoint_columns, fit_power_exponent, lower_quantile, median_curve, theorem2_band, BandVerdict,
    CheckpointRecord, PowerFit, RateBand,
};
use crate::walk::ExcursionHistogram;

use super::model::{ReplicaTrace, UrnTrace, WalkTrace};
use super::{FitConfig, HarnessError};

/// Lower nearest-rank quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub q10: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q90: f64,
}

impl Quantiles {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p| lower_quantile(&v, p);
        Some(Self { q10: q(0.1), q25: q(0.25), q50: q(0.5), q75: q(0.75), q90: q(0.9) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointSummary {
    pub k: u64,
    pub t: u64,
    pub sup_dist: Quantiles,
    pub eta: Quantiles,
    pub leaf_total: Quantiles,
}

/// Fitted exponents of the median curves plus the theoretical band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatesSummary {
    pub slope_sup_dist: Option<f64>,
    pub slope_eta: Option<f64>,
    pub slope_leaf: Option<f64>,
    pub fit_window: (u64, u64),
    pub fits: FitDetails,
    pub band: Option<RateBand>,
    pub verdict: Option<BandVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDetails {
    pub sup_dist: Option<PowerFit>,
    pub eta: Option<PowerFit>,
    pub leaf: Option<PowerFit>,
}

impl RatesSummary {
    /// Fits median curves over checkpoints inside the configured window.
    /// `family` selects whether a band applies (complete-like, `d >= 3`).
    pub fn from_ensemble(
        ensemble: &[Vec<CheckpointRecord>],
        fit: &FitConfig,
        family: Option<Family>,
    ) -> Result<Self, HarnessError> {
        let last_t = ensemble.first().and_then(|r| r.last()).map_or(0, |r| r.t);
        let hi = fit.fit_t_max.unwrap_or(last_t);
        let window = (fit.burn_in, hi);
        let fit_metric = |metric: fn(&CheckpointRecord) -> f64| -> Result<Option<PowerFit>, HarnessError> {
            let points: Vec<(f64, f64)> = median_curve(ensemble, metric)?
                .into_iter()
                .filter(|&(t, _)| t >= window.0 && t <= window.1)
                .map(|(t, v)| (t as f64, v))
                .collect();
            Ok(fit_power_exponent(&points).ok())
        };
        let sup_fit = fit_metric(|r| r.sup_dist)?;
        let eta_fit = fit_metric(|r| r.eta)?;
        let has_leaf = ensemble.iter().flatten().any(|r| r.leaf_total() > 0);
        let leaf_fit = if has_leaf { fit_metric(|r| r.leaf_total() as f64)? } else { None };

        let d = ensemble.first().and_then(|r| r.first()).map_or(0, CheckpointRecord::d);
        let band = match family {
            Some(Family::CompleteLike) | None => theorem2_band(d, has_leaf).ok(),
            Some(Family::DPartite) => None,
        };
        let verdict = match (&band, &sup_fit) {
            (Some(b), Some(f)) => Some(band_verdict(f.slope, b, fit.band_slack)),
            _ => None,
        };
        Ok(Self {
            slope_sup_dist: sup_fit.map(|f| f.slope),
            slope_eta: eta_fit.map(|f| f.slope),
            slope_leaf: leaf_fit.map(|f| f.slope),
            fit_window: window,
            fits: FitDetails { sup_dist: sup_fit, eta: eta_fit, leaf: leaf_fit },
            band,
            verdict,
        })
    }
}

/// Summary of `xi_12` extremes after burn-in, per replica.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSummary {
    pub min_xi: Quantiles,
    pub max_xi: Quantiles,
    /// Fraction of replicas whose minimum stayed above 0.01.
    pub fraction_min_above_001: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrnCheckpointSummary {
    pub n: u64,
    pub fraction_x: Quantiles,
    pub stat: Option<Quantiles>,
}

/// Model-specific results that cannot be recovered from the CSV records.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportExtras {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excursions: Option<ExcursionHistogram>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub urn: Option<Vec<UrnCheckpointSummary>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub seconds: f64,
    pub total_steps: u64,
    pub steps_per_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub model: String,
    pub replicas: u64,
    pub checkpoints: Vec<CheckpointSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesSummary>,
    pub extras: ReportExtras,
    /// Wall-clock figures; excluded from [`EnsembleReport::same_results`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl EnsembleReport {
    /// Summary of walk records alone, as recoverable from CSV files.
    pub fn from_records(
        model: &str,
        ensemble: &[Vec<CheckpointRecord>],
        fit: &FitConfig,
        family: Option<Family>,
    ) -> Result<Self, HarnessError> {
        let sup = checkpoint_columns(ensemble, |r| r.sup_dist)?;
        let eta = checkpoint_columns(ensemble, |r| r.eta)?;
        let leaf = checkpoint_columns(ensemble, |r| r.leaf_total() as f64)?;
        let reference = &ensemble[0];
        let checkpoints = reference
            .iter()
            .zip(sup.iter().zip(eta.iter().zip(&leaf)))
            .map(|(rec, ((_, s), ((_, e), (_, l))))| CheckpointSummary {
                k: rec.k,
                t: rec.t,
                sup_dist: Quantiles::of(s).expect("nonempty ensemble"),
                eta: Quantiles::of(e).expect("nonempty ensemble"),
                leaf_total: Quantiles::of(l).expect("nonempty ensemble"),
            })
            .collect();
        Ok(Self {
            model: model.to_string(),
            replicas: ensemble.len() as u64,
            checkpoints,
            rates: Some(RatesSummary::from_ensemble(ensemble, fit, family)?),
            extras: ReportExtras::default(),
            timing: None,
        })
    }

    pub(crate) fn from_traces(
        model: &str,
        traces: &[ReplicaTrace],
        fit: &FitConfig,
        family: Option<Family>,
    ) -> Result<Self, HarnessError> {
        let walks: Vec<&WalkTrace> = traces
            .iter()
            .filter_map(|t| match t {
                ReplicaTrace::Walk(w) => Some(w),
                ReplicaTrace::Urn(_) => None,
            })
            .collect();
        let urns: Vec<&UrnTrace> = traces
            .iter()
            .filter_map(|t| match t {
                ReplicaTrace::Urn(u) => Some(u),
                ReplicaTrace::Walk(_) => None,
            })
            .collect();
        if !walks.is_empty() && !urns.is_empty() {
            return Err(HarnessError::Schema("mixed walk and urn traces".into()));
        }
        if !urns.is_empty() {
            return Ok(Self {
                model: model.to_string(),
                replicas: urns.len() as u64,
                checkpoints: Vec::new(),
                rates: None,
                extras: ReportExtras { urn: Some(urn_summary(&urns)?), ..ReportExtras::default() },
                timing: None,
            });
        }
        let ensemble: Vec<Vec<CheckpointRecord>> = walks.iter().map(|w| w.records.clone()).collect();
        let mut report = Self::from_records(model, &ensemble, fit, family)?;
        let ranges: Vec<(f64, f64)> = walks.iter().filter_map(|w| w.xi_range).collect();
        if !ranges.is_empty() {
            let mins: Vec<f64> = ranges.iter().map(|r| r.0).collect();
            let maxs: Vec<f64> = ranges.iter().map(|r| r.1).collect();
            report.extras.ratio = Some(RatioSummary {
                min_xi: Quantiles::of(&mins).expect("nonempty"),
                max_xi: Quantiles::of(&maxs).expect("nonempty"),
                fraction_min_above_001: mins.iter().filter(|&&m| m > 0.01).count() as f64 / mins.len() as f64,
            });
        }
        let histograms: Vec<&ExcursionHistogram> = walks.iter().filter_map(|w| w.excursions.as_ref()).collect();
        if !histograms.is_empty() {
            let mut total = ExcursionHistogram::default();
            for h in histograms {
                total.merge(h);
            }
            report.extras.excursions = Some(total);
        }
        Ok(report)
    }

    /// Equality ignoring wall-clock timing.
    pub fn same_results(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self { timing: None, ..r.clone() };
        strip(self) == strip(other)
    }

    /// Drops results that only a live run can produce.
    pub fn without_extras(&self) -> Self {
        Self { extras: ReportExtras::default(), timing: None, ..self.clone() }
    }
}

fn urn_summary(urns: &[&UrnTrace]) -> Result<Vec<UrnCheckpointSummary>, HarnessError> {
    let reference = &urns[0].records;
    for u in urns {
        let same = u.records.len() == reference.len() && u.records.iter().zip(reference).all(|(a, b)| a.n == b.n);
        if !same {
            return Err(HarnessError::Schema(format!("urn replica {} has a different schedule", u.replica)));
        }
    }
    Ok(reference
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let fractions: Vec<f64> = urns.iter().map(|u| u.records[i].x / (u.records[i].x + u.records[i].y)).collect();
            let stats: Vec<f64> = urns.iter().filter_map(|u| u.records[i].stat).collect();
            UrnCheckpointSummary {
                n: rec.n,
                fraction_x: Quantiles::of(&fractions).expect("nonempty"),
                stat: Quantiles::of(&stats),
            }
        })
        .collect())
}
