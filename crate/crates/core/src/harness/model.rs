//! Simulation models behind a common trait, looked up by name at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use crate::graph::{GraphTopology, VertexId};
use crate::rates::{checkpoint_plan, Checkpoint, CheckpointRecord};
use crate::rng::SimRng;
use crate::urn::{RegimeStatistic, UrnParams, UrnState};
use crate::walk::{
    snapshot_metrics, ExcursionHistogram, ExcursionTracker, ScheduleConfig, ScheduleSpec, StepObserver, WalkState,
};

use super::{EnsembleConfig, HarnessError};

/// Everything one replica produced.
#[derive(Debug, Clone, PartialEq)]
pub enum ReplicaTrace {
    Walk(WalkTrace),
    Urn(UrnTrace),
}

impl ReplicaTrace {
    pub fn replica(&self) -> u64 {
        match self {
            ReplicaTrace::Walk(w) => w.replica,
            ReplicaTrace::Urn(u) => u.replica,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            ReplicaTrace::Walk(w) => w.steps,
            ReplicaTrace::Urn(u) => u.steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkTrace {
    pub replica: u64,
    /// Starts with a `k = 0` record at the initial time.
    pub records: Vec<CheckpointRecord>,
    pub steps: u64,
    /// Extremes of `xi_12` after burn-in (modified walk only).
    pub xi_range: Option<(f64, f64)>,
    pub excursions: Option<ExcursionHistogram>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UrnRecord {
    pub replica: u64,
    pub n: u64,
    pub x: f64,
    pub y: f64,
    pub stat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrnTrace {
    pub replica: u64,
    pub records: Vec<UrnRecord>,
    pub steps: u64,
}

/// A simulation model. Instances are immutable and shared across workers.
pub trait Model: Send + Sync {
    fn name(&self) -> &str;

    fn run_replica(&self, replica: u64, seed: u64) -> Result<ReplicaTrace, HarnessError>;
}

pub type ModelFactory = fn(&EnsembleConfig) -> Result<Box<dyn Model>, HarnessError>;

/// Name-to-factory table for [`Model`]s.
#[derive(Clone, Default)]
pub struct ModelRegistry {
    factories: BTreeMap<String, ModelFactory>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `vrrw`, `mvrrw` and `urn`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("vrrw", VrrwModel::factory);
        r.register("mvrrw", MvrrwModel::factory);
        r.register("urn", UrnModel::factory);
        r
    }

    pub fn register(&mut self, name: &str, factory: ModelFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, config: &EnsembleConfig) -> Result<Box<dyn Model>, HarnessError> {
        let factory = self.factories.get(&config.mode.kind).ok_or_else(|| {
            let known: Vec<&str> = self.names().collect();
            HarnessError::Config(format!("unknown model `{}` (known: {})", config.mode.kind, known.join(", ")))
        })?;
        factory(config)
    }
}

impl std::fmt::Debug for ModelRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

/// Shared setup for both walk models.
struct WalkSetup {
    graph: Arc<GraphTopology>,
    weights: Vec<u64>,
    start: VertexId,
    plan: Vec<Checkpoint>,
    t_max: u64,
}

impl WalkSetup {
    fn from_config(config: &EnsembleConfig) -> Result<Self, HarnessError> {
        let graph = Arc::new(config.graph.build().map_err(|e| HarnessError::Config(e.to_string()))?);
        let weights = config.initial_weights_for(graph.num_vertices())?;
        let start = VertexId(config.start);
        if config.start >= graph.num_vertices() || !graph.is_interior(start) {
            return Err(HarnessError::Config(format!("start {} is not an interior vertex", config.start)));
        }
        let plan =
            checkpoint_plan(config.m, config.effective_k_max()).map_err(|e| HarnessError::Config(e.to_string()))?;
        let t0: u64 = weights.iter().sum();
        if config.t_max < t0 {
            return Err(HarnessError::Config(format!("t_max {} is below the initial time {t0}", config.t_max)));
        }
        Ok(Self { graph, weights, start, plan, t_max: config.t_max })
    }

    fn run<O: StepObserver>(
        &self,
        replica: u64,
        mut state: WalkState,
        observer: &mut O,
    ) -> Result<(Vec<CheckpointRecord>, u64), HarnessError> {
        let mut records = vec![CheckpointRecord::from_metrics(replica, 0, &snapshot_metrics(&state))];
        let t0 = state.t();
        let mut later = state.run_to(self.t_max, &self.plan, observer)?;
        for r in &mut later {
            r.replica = replica;
        }
        records.extend(later);
        Ok((records, state.t() - t0))
    }
}

/// The plain vertex-reinforced walk.
pub struct VrrwModel {
    setup: WalkSetup,
}

impl VrrwModel {
    pub fn factory(config: &EnsembleConfig) -> Result<Box<dyn Model>, HarnessError> {
        Ok(Box::new(Self { setup: WalkSetup::from_config(config)? }))
    }
}

impl Model for VrrwModel {
    fn name(&self) -> &str {
        "vrrw"
    }

    fn run_replica(&self, replica: u64, seed: u64) -> Result<ReplicaTrace, HarnessError> {
        let s = &self.setup;
        let state = WalkState::new(s.graph.clone(), &s.weights, s.start, seed, None)?;
        let (records, steps) = s.run(replica, state, &mut crate::walk::NoObserver)?;
        Ok(ReplicaTrace::Walk(WalkTrace { replica, records, steps, xi_range: None, excursions: None }))
    }
}

fn default_special() -> usize {
    2
}

fn default_schedule() -> ScheduleConfig {
    ScheduleConfig::Affine { h0: 0, c: 2 }
}

fn default_xi_burn_in() -> u64 {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MvrrwParams {
    #[serde(default = "default_special")]
    special: usize,
    #[serde(default = "default_schedule")]
    schedule: ScheduleConfig,
    #[serde(default = "default_xi_burn_in")]
    xi_burn_in: u64,
    #[serde(default = "default_true")]
    excursions: bool,
}

fn default_true() -> bool {
    true
}

/// The modified walk: one special vertex whose weight follows a schedule.
pub struct MvrrwModel {
    setup: WalkSetup,
    special: VertexId,
    schedule: ScheduleSpec,
    xi_burn_in: u64,
    track_excursions: bool,
    /// The two interior vertices compared by `xi`.
    pair: (usize, usize),
}

impl MvrrwModel {
    pub fn factory(config: &EnsembleConfig) -> Result<Box<dyn Model>, HarnessError> {
        let params: MvrrwParams = config.mode.parse()?;
        let setup = WalkSetup::from_config(config)?;
        let special = VertexId(params.special);
        if params.special >= setup.graph.num_vertices() || !setup.graph.is_interior(special) {
            return Err(HarnessError::Config(format!("special vertex {} is not interior", params.special)));
        }
        let schedule = ScheduleSpec::from(&params.schedule);
        schedule.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut others = (0..setup.graph.num_interior()).filter(|&v| v != params.special);
        let pair = match (others.next(), others.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(HarnessError::Config("modified walk needs two non-special interior vertices".into())),
        };
        let is_triangle = setup.graph.num_vertices() == 3 && setup.graph.num_interior() == 3;
        Ok(Box::new(Self {
            setup,
            special,
            schedule,
            xi_burn_in: params.xi_burn_in,
            track_excursions: params.excursions && is_triangle,
            pair,
        }))
    }
}

struct MvrrwObserver {
    pair: (usize, usize),
    burn_in: u64,
    range: Option<(f64, f64)>,
    excursions: Option<ExcursionTracker>,
}

impl StepObserver for MvrrwObserver {
    #[inline]
    fn observe(&mut self, state: &WalkState) {
        if let Some(tracker) = &mut self.excursions {
            tracker.observe(state);
        }
        if state.t() >= self.burn_in {
            let w = state.weights();
            let (u, v) = (w[self.pair.0] as f64, w[self.pair.1] as f64);
            let xi = u / (u + v);
            self.range = Some(match self.range {
                None => (xi, xi),
                Some((lo, hi)) => (lo.min(xi), hi.max(xi)),
            });
        }
    }
}

impl Model for MvrrwModel {
    fn name(&self) -> &str {
        "mvrrw"
    }

    fn run_replica(&self, replica: u64, seed: u64) -> Result<ReplicaTrace, HarnessError> {
        let s = &self.setup;
        let state =
            WalkState::new(s.graph.clone(), &s.weights, s.start, seed, Some((self.special, self.schedule.clone())))?;
        let excursions = if self.track_excursions {
            Some(ExcursionTracker::attach(&state, self.special)?.histogram_only())
        } else {
            None
        };
        let mut observer = MvrrwObserver { pair: self.pair, burn_in: self.xi_burn_in, range: None, excursions };
        let (records, steps) = s.run(replica, state, &mut observer)?;
        Ok(ReplicaTrace::Walk(WalkTrace {
            replica,
            records,
            steps,
            xi_range: observer.range,
            excursions: observer.excursions.map(|t| t.histogram().clone()),
        }))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct UrnModelParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    #[serde(default = "one")]
    x0: f64,
    #[serde(default = "one")]
    y0: f64,
    #[serde(default)]
    statistic: Option<RegimeStatistic>,
}

fn one() -> f64 {
    1.0
}

/// Two-color generalized urn; the horizon `t_max` counts draws.
pub struct UrnModel {
    initial: UrnState,
    statistic: RegimeStatistic,
    plan: Vec<Checkpoint>,
    steps: u64,
}

impl UrnModel {
    pub fn factory(config: &EnsembleConfig) -> Result<Box<dyn Model>, HarnessError> {
        let p: UrnModelParams = config.mode.parse()?;
        let params = UrnParams { a: p.a, b: p.b, c: p.c, d: p.d };
        let initial = UrnState::new(p.x0, p.y0, params).map_err(|e| HarnessError::Config(e.to_string()))?;
        // the centered statistic only makes sense with cross-reinforcement
        let statistic =
            p.statistic.unwrap_or(if p.c > 0.0 { RegimeStatistic::Centered } else { RegimeStatistic::LogRatio });
        let plan =
            checkpoint_plan(config.m, config.effective_k_max()).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(Box::new(Self { initial, statistic, plan, steps: config.t_max }))
    }
}

impl Model for UrnModel {
    fn name(&self) -> &str {
        "urn"
    }

    fn run_replica(&self, replica: u64, seed: u64) -> Result<ReplicaTrace, HarnessError> {
        let mut rng = SimRng::seed_from(seed);
        let mut state = self.initial;
        let mut records = Vec::with_capacity(self.plan.len());
        for cp in self.plan.iter().filter(|cp| cp.t <= self.steps) {
            while state.n < cp.t {
                state.step(&mut rng)?;
            }
            records.push(UrnRecord {
                replica,
                n: state.n,
                x: state.x,
                y: state.y,
                stat: state.statistic(self.statistic).ok(),
            });
        }
        while state.n < self.steps {
            state.step(&mut rng)?;
        }
        Ok(ReplicaTrace::Urn(UrnTrace { replica, records, steps: state.n }))
    }
}
