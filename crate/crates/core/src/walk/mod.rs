//! Linearly vertex-reinforced random walk and its modified variant.
//!
//! From vertex `v` the walk moves to a neighbor `w` with probability
//! `Z(t,w) / sum_{y ~ v} Z(t,y)` and then increments `Z(t+1,w)`. In the
//! modified walk one interior vertex is special: on its `k`-th visit its
//! weight is overwritten with `H(k)` from a [`ScheduleSpec`].

mod excursion;
mod metrics;
mod schedule;

use std::sync::Arc;

use thiserror::Error;

use crate::graph::{GraphError, GraphTopology, VertexId};
use crate::rates::{Checkpoint, CheckpointRecord};
use crate::rng::SimRng;

pub use excursion::{
    excursion_event_prob, excursion_tail_prob, ExcursionClass, ExcursionHistogram, ExcursionRecord, ExcursionTracker,
    TailMode,
};
pub use metrics::{snapshot_metrics, WalkMetrics};
pub use schedule::{AdaptiveFn, ScheduleConfig, ScheduleSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("expected {expected} initial weights, got {got}")]
    WeightLength { expected: usize, got: usize },
    #[error("initial weight of vertex {vertex} must be positive")]
    NonPositiveWeight { vertex: usize },
    #[error("walk must start at an interior vertex, got {0}")]
    LeafStart(usize),
    #[error("special vertex {0} must be interior")]
    LeafSpecial(usize),
    #[error("schedule value H({k}) = {value} violates growth (previous {previous:?})")]
    ScheduleViolation { k: u64, previous: Option<i128>, value: i128 },
    #[error("schedule table has no value for visit {k}")]
    ScheduleExhausted { k: u64 },
    #[error("target time {target} is before current time {current}")]
    TargetInPast { target: u64, current: u64 },
    #[error("excursion tracking needs a triangle without leaves")]
    NotATriangle,
    #[error("excursion parameters must be positive")]
    NonPositiveParameter,
}

/// Called after every step of [`WalkState::run_to`].
pub trait StepObserver {
    fn observe(&mut self, state: &WalkState);
}

/// Observer that does nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl StepObserver for NoObserver {
    #[inline]
    fn observe(&mut self, _state: &WalkState) {}
}

impl<O: StepObserver + ?Sized> StepObserver for &mut O {
    #[inline]
    fn observe(&mut self, state: &WalkState) {
        (**self).observe(state)
    }
}

/// Adapts a closure into a [`StepObserver`].
pub struct ObserveFn<F>(pub F);

impl<F: FnMut(&WalkState)> StepObserver for ObserveFn<F> {
    #[inline]
    fn observe(&mut self, state: &WalkState) {
        (self.0)(state)
    }
}

#[derive(Debug, Clone)]
struct SpecialVertex {
    vertex: usize,
    schedule: ScheduleSpec,
    visits: u64,
    last_value: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct WalkState {
    graph: Arc<GraphTopology>,
    t0: u64,
    t: u64,
    position: usize,
    weights: Vec<u64>,
    initial_weights: Vec<u64>,
    total_weight: u64,
    special: Option<SpecialVertex>,
    rng: SimRng,
}

impl WalkState {
    /// Starts a walk at time `t0 = sum of initial weights`.
    pub fn new(
        graph: Arc<GraphTopology>,
        initial_weights: &[u64],
        start: VertexId,
        seed: u64,
        special: Option<(VertexId, ScheduleSpec)>,
    ) -> Result<Self, WalkError> {
        let n = graph.num_vertices();
        if initial_weights.len() != n {
            return Err(WalkError::WeightLength { expected: n, got: initial_weights.len() });
        }
        if let Some(vertex) = initial_weights.iter().position(|&w| w == 0) {
            return Err(WalkError::NonPositiveWeight { vertex });
        }
        graph.kind(start)?;
        if !graph.is_interior(start) {
            return Err(WalkError::LeafStart(start.0));
        }
        let special = match special {
            None => None,
            Some((vertex, schedule)) => {
                graph.kind(vertex)?;
                if !graph.is_interior(vertex) {
                    return Err(WalkError::LeafSpecial(vertex.0));
                }
                schedule.validate()?;
                Some(SpecialVertex { vertex: vertex.0, schedule, visits: 0, last_value: None })
            }
        };
        let t0 = initial_weights.iter().sum();
        Ok(Self {
            graph,
            t0,
            t: t0,
            position: start.0,
            weights: initial_weights.to_vec(),
            initial_weights: initial_weights.to_vec(),
            total_weight: t0,
            special,
            rng: SimRng::seed_from(seed),
        })
    }

    /// Unit initial weights, starting at interior 0, no special vertex.
    pub fn with_defaults(graph: Arc<GraphTopology>, seed: u64) -> Self {
        let weights = vec![1; graph.num_vertices()];
        Self::new(graph, &weights, VertexId(0), seed, None).expect("default initial condition is valid")
    }

    pub fn graph(&self) -> &GraphTopology {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<GraphTopology> {
        &self.graph
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn t0(&self) -> u64 {
        self.t0
    }

    pub fn position(&self) -> VertexId {
        VertexId(self.position)
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn weight(&self, v: VertexId) -> u64 {
        self.weights[v.0]
    }

    pub fn initial_weights(&self) -> &[u64] {
        &self.initial_weights
    }

    /// Sum of all weights, recomputed from scratch.
    pub fn weight_sum(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn special_vertex(&self) -> Option<VertexId> {
        self.special.as_ref().map(|s| VertexId(s.vertex))
    }

    /// Number of visits to the special vertex so far.
    pub fn special_visits(&self) -> u64 {
        self.special.as_ref().map_or(0, |s| s.visits)
    }

    /// Exact next-step law from the current position.
    pub fn transition_probabilities(&self) -> Vec<(VertexId, f64)> {
        let nbrs = self.graph.neighbor_slice(self.position);
        let total: u64 = nbrs.iter().map(|&w| self.weights[w]).sum();
        nbrs.iter().map(|&w| (VertexId(w), self.weights[w] as f64 / total as f64)).collect()
    }

    /// Draws the next position without moving. Consumes randomness.
    #[inline]
    pub fn sample_next(&mut self) -> VertexId {
        let nbrs = self.graph.neighbor_slice(self.position);
        if nbrs.len() == 1 {
            return VertexId(nbrs[0]);
        }
        let total: u64 = nbrs.iter().map(|&w| self.weights[w]).sum();
        let mut r = self.rng.below(total);
        for &w in nbrs {
            let z = self.weights[w];
            if r < z {
                return VertexId(w);
            }
            r -= z;
        }
        unreachable!("draw below the neighbor weight total")
    }

    /// One transition.
    #[inline]
    pub fn step(&mut self) -> Result<(), WalkError> {
        let next = self.sample_next().0;
        self.t += 1;
        self.position = next;
        match &self.special {
            Some(sp) if sp.vertex == next => self.reinforce_special()?,
            _ => {
                self.weights[next] += 1;
                self.total_weight += 1;
            }
        }
        debug_assert!(self.special.is_some() || self.total_weight == self.t);
        Ok(())
    }

    fn reinforce_special(&mut self) -> Result<(), WalkError> {
        let mut sp = self.special.take().expect("special vertex present");
        let k = sp.visits + 1;
        let result = sp.schedule.raw_value(k, self).and_then(|raw| schedule::check_growth(k, sp.last_value, raw));
        match result {
            Ok(value) => {
                let old = self.weights[sp.vertex];
                self.weights[sp.vertex] = value;
                self.total_weight = self.total_weight - old + value;
                sp.visits = k;
                sp.last_value = Some(value);
                self.special = Some(sp);
                Ok(())
            }
            Err(e) => {
                self.special = Some(sp);
                Err(e)
            }
        }
    }

    /// Advances by exactly `steps` transitions.
    pub fn advance<O: StepObserver>(&mut self, steps: u64, observer: &mut O) -> Result<(), WalkError> {
        for _ in 0..steps {
            self.step()?;
            observer.observe(self);
        }
        Ok(())
    }

    /// Runs until time `t_target`, recording a snapshot at every checkpoint
    /// time in `(t, t_target]`. Records carry replica 0.
    pub fn run_to<O: StepObserver>(
        &mut self,
        t_target: u64,
        checkpoints: &[Checkpoint],
        observer: &mut O,
    ) -> Result<Vec<CheckpointRecord>, WalkError> {
        if t_target < self.t {
            return Err(WalkError::TargetInPast { target: t_target, current: self.t });
        }
        let mut records = Vec::new();
        for cp in checkpoints {
            if cp.t <= self.t {
                continue;
            }
            if cp.t > t_target {
                break;
            }
            self.advance(cp.t - self.t, observer)?;
            records.push(CheckpointRecord::from_metrics(0, cp.k, &snapshot_metrics(self)));
        }
        self.advance(t_target - self.t, observer)?;
        Ok(records)
    }
}
