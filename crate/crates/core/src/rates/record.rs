use crate::walk::WalkMetrics;

/// One row of trajectory telemetry at a scheduled time.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointRecord {
    pub replica: u64,
    pub k: u64,
    pub t: u64,
    /// Vertex index of the walker.
    pub pos: usize,
    /// `Z(t,i)` per interior class.
    pub weights: Vec<u64>,
    /// `L(t,i)` per interior class.
    pub leaf_totals: Vec<u64>,
    pub eta: f64,
    pub sup_dist: f64,
    pub xi_12: f64,
    pub big_xi_12: Option<f64>,
}

impl CheckpointRecord {
    pub fn from_metrics(replica: u64, k: u64, m: &WalkMetrics) -> Self {
        Self {
            replica,
            k,
            t: m.t,
            pos: m.position,
            weights: m.class_weights.clone(),
            leaf_totals: m.leaf_totals.clone(),
            eta: m.eta,
            sup_dist: m.sup_dist,
            xi_12: m.xi(0, 1),
            big_xi_12: m.big_xi(0, 1),
        }
    }

    pub fn d(&self) -> usize {
        self.weights.len()
    }

    /// Interior occupation shares `Z(t,i) / t`.
    pub fn pi(&self) -> Vec<f64> {
        self.weights.iter().map(|&z| z as f64 / self.t as f64).collect()
    }

    pub fn leaf_total(&self) -> u64 {
        self.leaf_totals.iter().sum()
    }

    pub fn theta(&self) -> f64 {
        self.leaf_total() as f64 / self.t as f64
    }

    pub fn weight_sum(&self) -> u64 {
        self.weights.iter().sum::<u64>() + self.leaf_total()
    }
}
