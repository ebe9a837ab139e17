//! Ensemble runs: per-replica seeding, parallel execution, CSV output and
//! summary reports.

mod config;
mod io;
mod model;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::rates::{CheckpointRecord, RateError};
use crate::rng::replica_seed;
use crate::urn::UrnError;
use crate::walk::WalkError;

pub use config::{EnsembleConfig, FitConfig, ModeSpec};
pub use io::{checkpoint_header, format_float, read_checkpoint_csv, write_checkpoint_csv, write_urn_csv, URN_HEADER};
pub use model::{
    Model, ModelFactory, ModelRegistry, MvrrwModel, ReplicaTrace, UrnModel, UrnRecord, UrnTrace, VrrwModel, WalkTrace,
};
pub use report::{
    CheckpointSummary, EnsembleReport, FitDetails, Quantiles, RatesSummary, RatioSummary, ReportExtras, Timing,
    UrnCheckpointSummary,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("record schema error: {0}")]
    Schema(String),
    #[error("no input files")]
    NoInputs,
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Urn(#[from] UrnError),
    #[error(transparent)]
    Rates(#[from] RateError),
}

impl HarnessError {
    /// Process exit code for command-line use.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) => 3,
            _ => 1,
        }
    }
}

/// Result of [`run_ensemble`].
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub report: EnsembleReport,
    /// Traces sorted by replica index.
    pub traces: Vec<ReplicaTrace>,
    /// Files written, in replica order.
    pub files: Vec<PathBuf>,
}

impl EnsembleRun {
    /// Checkpoint records of every walk replica.
    pub fn walk_records(&self) -> Vec<Vec<CheckpointRecord>> {
        self.traces
            .iter()
            .filter_map(|t| match t {
                ReplicaTrace::Walk(w) => Some(w.records.clone()),
                ReplicaTrace::Urn(_) => None,
            })
            .collect()
    }
}

/// Runs every replica of `config` with the built-in models.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleRun, HarnessError> {
    run_ensemble_with(&ModelRegistry::with_builtins(), config)
}

/// Runs replicas `first_replica..first_replica + replicas`; replica `i` is seeded with
/// `replica_seed(base_seed, i)`, so results do not depend on the worker count.
pub fn run_ensemble_with(registry: &ModelRegistry, config: &EnsembleConfig) -> Result<EnsembleRun, HarnessError> {
    config.validate()?;
    let model = registry.build(config)?;
    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    }
    let family = config.graph.build().ok().map(|g| g.family());

    let started = Instant::now();
    let run_one = |i: u64| -> Result<(ReplicaTrace, Option<PathBuf>), HarnessError> {
        let trace = model.run_replica(i, replica_seed(config.base_seed, i))?;
        let file = match &config.out {
            Some(dir) => Some(write_trace(dir, &trace)?),
            None => None,
        };
        Ok((trace, file))
    };
    let workers = config.workers.unwrap_or_else(rayon::current_num_threads);
    let indices = config.first_replica..config.first_replica + config.replicas;
    let results: Vec<(ReplicaTrace, Option<PathBuf>)> = if workers <= 1 {
        indices.map(run_one).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
        pool.install(|| indices.into_par_iter().map(run_one).collect::<Result<_, _>>())?
    };
    let seconds = started.elapsed().as_secs_f64();

    let (traces, files): (Vec<ReplicaTrace>, Vec<Option<PathBuf>>) = results.into_iter().unzip();
    let files: Vec<PathBuf> = files.into_iter().flatten().collect();
    let mut report = EnsembleReport::from_traces(model.name(), &traces, &config.fit, family)?;
    let total_steps = traces.iter().map(ReplicaTrace::steps).sum();
    report.timing = Some(Timing {
        seconds,
        total_steps,
        steps_per_sec: if seconds > 0.0 { total_steps as f64 / seconds } else { 0.0 },
    });
    if let Some(dir) = &config.out {
        let path = dir.join("report.json");
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(&path, text + "\n").map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(EnsembleRun { report, traces, files })
}

fn write_trace(dir: &Path, trace: &ReplicaTrace) -> Result<PathBuf, HarnessError> {
    let path = dir.join(format!("records_{}.csv", trace.replica()));
    match trace {
        ReplicaTrace::Walk(w) => write_checkpoint_csv(&path, &w.records)?,
        ReplicaTrace::Urn(u) => write_urn_csv(&path, &u.records)?,
    }
    Ok(path)
}

/// Reads checkpoint CSVs, grouped by replica id and sorted by it.
pub fn load_ensemble<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<Vec<CheckpointRecord>>, HarnessError> {
    if paths.is_empty() {
        return Err(HarnessError::NoInputs);
    }
    let mut by_replica: std::collections::BTreeMap<u64, Vec<CheckpointRecord>> = Default::default();
    let mut d = None;
    for path in paths {
        for rec in read_checkpoint_csv(path.as_ref())? {
            if *d.get_or_insert(rec.d()) != rec.d() {
                return Err(HarnessError::Schema(format!(
                    "{}: dimension {} differs from {}",
                    path.as_ref().display(),
                    rec.d(),
                    d.unwrap_or(0)
                )));
            }
            by_replica.entry(rec.replica).or_default().push(rec);
        }
    }
    if by_replica.is_empty() {
        return Err(HarnessError::Schema("input files contain no records".into()));
    }
    let mut ensemble: Vec<Vec<CheckpointRecord>> = by_replica.into_values().collect();
    for replica in &mut ensemble {
        replica.sort_by_key(|r| r.k);
    }
    Ok(ensemble)
}

/// Rebuilds the record-derived part of a report from CSV files. For a
/// `vrrw` run this equals `run.report.without_extras()`.
pub fn aggregate<P: AsRef<Path>>(
    model: &str,
    paths: &[P],
    fit: &FitConfig,
    family: Option<crate::graph::Family>,
) -> Result<EnsembleReport, HarnessError> {
    let ensemble = load_ensemble(paths)?;
    EnsembleReport::from_records(model, &ensemble, fit, family)
}
