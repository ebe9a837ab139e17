use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::graph::GraphSpec;
use crate::rates::k_max_for_horizon;

use super::HarnessError;

fn default_graph() -> GraphSpec {
    GraphSpec::CompleteLike { d: 3, leaves: None }
}

fn default_m() -> f64 {
    3.0
}

fn default_replicas() -> u64 {
    1
}

/// Which registered model to run, plus its model-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub kind: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

impl ModeSpec {
    pub fn named(kind: &str) -> Self {
        Self { kind: kind.to_string(), params: Map::new() }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Deserializes the parameters into a model's own parameter struct.
    pub fn parse<T: serde::de::DeserializeOwned>(&self) -> Result<T, HarnessError> {
        serde_json::from_value(Value::Object(self.params.clone()))
            .map_err(|e| HarnessError::Config(format!("{} parameters: {e}", self.kind)))
    }
}

impl Default for ModeSpec {
    fn default() -> Self {
        Self::named("vrrw")
    }
}

/// Settings for the log-log exponent fits in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Checkpoints before this time are excluded.
    pub burn_in: u64,
    /// Checkpoints after this time are excluded.
    pub fit_t_max: Option<u64>,
    /// Slack on band verdicts, in exponent units.
    pub band_slack: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { burn_in: 10_000, fit_t_max: None, band_slack: 0.1 }
    }
}

/// Declarative description of one ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    #[serde(default = "default_graph")]
    pub graph: GraphSpec,
    /// Per-vertex initial weights; all ones when absent.
    #[serde(default)]
    pub initial_weights: Option<Vec<i64>>,
    /// Start vertex index (interior).
    #[serde(default)]
    pub start: usize,
    /// Horizon: walk time for walks, number of draws for urns.
    pub t_max: u64,
    #[serde(default = "default_m")]
    pub m: f64,
    /// Defaults to the largest `k` with `round(k^m) <= t_max`.
    #[serde(default)]
    pub k_max: Option<u64>,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    /// Index of the first replica; lets disjoint runs be combined later.
    #[serde(default)]
    pub first_replica: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default)]
    pub fit: FitConfig,
}

impl EnsembleConfig {
    pub fn new(graph: GraphSpec, t_max: u64, replicas: u64, base_seed: u64) -> Self {
        Self {
            graph,
            initial_weights: None,
            start: 0,
            t_max,
            m: default_m(),
            k_max: None,
            replicas,
            first_replica: 0,
            base_seed,
            out: None,
            workers: None,
            mode: ModeSpec::default(),
            fit: FitConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replicas < 1 {
            return Err(HarnessError::Config("replicas must be at least 1".into()));
        }
        if !(self.m > 1.0) {
            return Err(HarnessError::Config(format!("checkpoint exponent m must exceed 1, got {}", self.m)));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn effective_k_max(&self) -> u64 {
        self.k_max.unwrap_or_else(|| k_max_for_horizon(self.m, self.t_max).max(1))
    }

    pub fn initial_weights_for(&self, num_vertices: usize) -> Result<Vec<u64>, HarnessError> {
        match &self.initial_weights {
            None => Ok(vec![1; num_vertices]),
            Some(w) => w
                .iter()
                .map(|&x| {
                    u64::try_from(x)
                        .ok()
                        .filter(|&v| v > 0)
                        .ok_or_else(|| HarnessError::Config(format!("initial weight {x} must be positive")))
                })
                .collect(),
        }
    }
}
