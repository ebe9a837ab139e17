use crate::graph::{Family, GraphTopology};

use super::WalkState;

/// Occupation-measure observables at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkMetrics {
    pub t: u64,
    pub position: usize,
    /// Occupation measure over the graph's cells (see [`GraphTopology::cells`]).
    pub pi: Vec<f64>,
    /// Max-norm distance from the uniform target.
    pub sup_dist: f64,
    /// `1 - d * min_j Z(t,j) / t`. Can go negative for the modified walk,
    /// whose weights no longer sum to `t`.
    pub eta: f64,
    /// `Z(t,i)` per interior class.
    pub class_weights: Vec<u64>,
    /// `L(t,i)` per interior class.
    pub leaf_totals: Vec<u64>,
    /// `(xi_L, xi_R)`; only for complete-like graphs with `d = 2` and leaves on both sides.
    pub leaf_ratios: Option<(f64, f64)>,
}

impl WalkMetrics {
    pub fn from_weights(graph: &GraphTopology, t: u64, position: usize, weights: &[u64]) -> Self {
        let tf = t as f64;
        let pi: Vec<f64> = graph.cells(weights).into_iter().map(|z| z as f64 / tf).collect();
        let sup_dist = pi.iter().zip(graph.uniform_target()).map(|(p, u)| (p - u).abs()).fold(0.0, f64::max);
        let class_weights = graph.class_weights(weights);
        let leaf_totals = graph.leaf_totals(weights);
        let min = class_weights.iter().copied().min().unwrap_or(0);
        let eta = 1.0 - graph.d() as f64 * min as f64 / tf;
        let leaf_ratios = if graph.family() == Family::CompleteLike
            && graph.d() == 2
            && graph.leaf_counts().iter().all(|&r| r >= 1)
        {
            let (u, v) = (class_weights[0] as f64, class_weights[1] as f64);
            let (l, r) = (leaf_totals[0] as f64, leaf_totals[1] as f64);
            Some((l / (l + v), r / (r + u)))
        } else {
            None
        };
        Self { t, position, pi, sup_dist, eta, class_weights, leaf_totals, leaf_ratios }
    }

    /// `Z(t,i) / (Z(t,i) + Z(t,j))`.
    pub fn xi(&self, i: usize, j: usize) -> f64 {
        let (zi, zj) = (self.class_weights[i] as f64, self.class_weights[j] as f64);
        zi / (zi + zj)
    }

    /// `log(Z(t,i) + Z(t,j)) - log(Z(t,j) - 1)`; absent while `Z(t,j) < 2`.
    pub fn big_xi(&self, i: usize, j: usize) -> Option<f64> {
        let (zi, zj) = (self.class_weights[i], self.class_weights[j]);
        (zj >= 2).then(|| ((zi + zj) as f64).ln() - ((zj - 1) as f64).ln())
    }

    /// Leaf share of the total weight, `sum_i L(t,i) / t`.
    pub fn theta(&self) -> f64 {
        self.leaf_totals.iter().sum::<u64>() as f64 / self.t as f64
    }
}

pub fn snapshot_metrics(state: &WalkState) -> WalkMetrics {
    WalkMetrics::from_weights(state.graph(), state.t(), state.position().0, state.weights())
}
