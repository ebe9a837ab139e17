//! Simulation and analysis toolkit for linearly vertex-reinforced random
//! walks (VRRW) on complete-like and `d`-partite graphs, the modified walk
//! with one scheduled special vertex, generalized Pólya urns, and the
//! large-deviation and rate tools used to study their occupation measures.
//!
//! ```
//! use std::sync::Arc;
//! use vrrw_core::graph::GraphTopology;
//! use vrrw_core::walk::{snapshot_metrics, WalkState};
//!
//! let graph = Arc::new(GraphTopology::complete_like(3, &[0, 0, 0]).unwrap());
//! let mut walk = WalkState::with_defaults(graph, 42);
//! walk.advance(1000, &mut vrrw_core::walk::NoObserver).unwrap();
//! assert_eq!(walk.weight_sum(), walk.t());
//! assert!(snapshot_metrics(&walk).sup_dist < 1.0);
//! ```

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod graph;
pub mod harness;
pub mod ld;
pub mod rates;
pub mod rng;
pub mod urn;
pub mod walk;

pub use graph::{GraphSpec, GraphTopology, VertexId};
pub use harness::{run_ensemble, EnsembleConfig, EnsembleReport, HarnessError, ModelRegistry};
pub use rates::CheckpointRecord;
pub use rng::{replica_seed, SimRng};
pub use walk::{ScheduleSpec, WalkError, WalkState};
