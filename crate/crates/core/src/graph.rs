//! Complete-like and d-partite graphs with pendant leaves.
//!
//! Vertices are numbered contiguously. Interior vertices come first
//! (class by class for d-partite graphs, one per class for complete-like
//! graphs), followed by the leaves grouped by the interior class they hang
//! from, in ascending order. Neighbor lists are sorted ascending, which puts
//! interiors before leaves and keeps sampling order reproducible.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("need at least {min} interior classes, got {got}")]
    TooFewClasses { min: usize, got: usize },
    #[error("leaf count vector has length {got}, expected {expected}")]
    LeafCountLength { expected: usize, got: usize },
    #[error("leaf count for interior {index} is negative ({value})")]
    NegativeLeafCount { index: usize, value: i64 },
    #[error("class {0} is empty")]
    EmptyClass(usize),
    #[error("leaf {0} has no attachment targets")]
    EmptyAttachment(usize),
    #[error("leaf {leaf} attaches to classes {first} and {second}; a leaf must hang from a single class")]
    MixedAttachment { leaf: usize, first: usize, second: usize },
    #[error("leaf {leaf} targets class {class} member {member}, which does not exist")]
    UnknownTarget { leaf: usize, class: usize, member: usize },
    #[error("vertex {0} is not part of the graph")]
    UnknownVertex(usize),
}

/// Contiguous vertex index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    /// `member` is always 0 for complete-like graphs.
    Interior { class: usize, member: usize },
    /// `leaf` numbers the leaves of one class from 0.
    Leaf { class: usize, leaf: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    CompleteLike,
    DPartite,
}

/// A leaf of a d-partite graph, given as the interior vertices it is
/// adjacent to. Each target is a `(class, member)` pair, both 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafAttachment {
    pub targets: Vec<(usize, usize)>,
}

impl LeafAttachment {
    pub fn new(targets: Vec<(usize, usize)>) -> Self {
        Self { targets }
    }
}

/// Declarative graph description, as it appears in JSON configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphSpec {
    CompleteLike {
        d: usize,
        #[serde(default)]
        leaves: Option<Vec<i64>>,
    },
    DPartite {
        classes: Vec<usize>,
        #[serde(default)]
        leaf_attachments: Vec<LeafAttachment>,
    },
}

impl GraphSpec {
    pub fn build(&self) -> Result<GraphTopology, GraphError> {
        match self {
            GraphSpec::CompleteLike { d, leaves } => {
                let counts = leaves.clone().unwrap_or_else(|| vec![0; *d]);
                GraphTopology::complete_like(*d, &counts)
            }
            GraphSpec::DPartite { classes, leaf_attachments } => GraphTopology::d_partite(classes, leaf_attachments),
        }
    }
}

/// Immutable graph; shared read-only between replicas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphTopology {
    family: Family,
    d: usize,
    class_sizes: Vec<usize>,
    /// Number of leaves hanging from each class.
    leaf_counts: Vec<usize>,
    kinds: Vec<VertexKind>,
    /// Class index of every vertex (interior class, or the class a leaf hangs from).
    class_of: Vec<usize>,
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
    num_interior: usize,
}

impl GraphTopology {
    /// Clique on `d` interiors with `leaf_counts[i]` pendant leaves on interior `i`.
    pub fn complete_like(d: usize, leaf_counts: &[i64]) -> Result<Self, GraphError> {
        if d < 2 {
            return Err(GraphError::TooFewClasses { min: 2, got: d });
        }
        if leaf_counts.len() != d {
            return Err(GraphError::LeafCountLength { expected: d, got: leaf_counts.len() });
        }
        let mut counts = Vec::with_capacity(d);
        for (index, &value) in leaf_counts.iter().enumerate() {
            if value < 0 {
                return Err(GraphError::NegativeLeafCount { index, value });
            }
            counts.push(value as usize);
        }

        let mut kinds: Vec<VertexKind> = (0..d).map(|class| VertexKind::Interior { class, member: 0 }).collect();
        let mut class_of: Vec<usize> = (0..d).collect();
        let mut lists: Vec<Vec<usize>> = (0..d).map(|i| (0..d).filter(|&j| j != i).collect()).collect();
        for (class, &count) in counts.iter().enumerate() {
            for leaf in 0..count {
                let id = kinds.len();
                kinds.push(VertexKind::Leaf { class, leaf });
                class_of.push(class);
                lists[class].push(id);
                lists.push(vec![class]);
            }
        }
        Ok(Self::from_lists(Family::CompleteLike, d, vec![1; d], counts, kinds, class_of, lists, d))
    }

    /// d-partite graph with classes of the given sizes and leaves attached
    /// to members of a single class each.
    pub fn d_partite(class_sizes: &[usize], attachments: &[LeafAttachment]) -> Result<Self, GraphError> {
        let d = class_sizes.len();
        if d < 3 {
            return Err(GraphError::TooFewClasses { min: 3, got: d });
        }
        if let Some(empty) = class_sizes.iter().position(|&s| s == 0) {
            return Err(GraphError::EmptyClass(empty));
        }

        let mut class_start = Vec::with_capacity(d);
        let mut kinds = Vec::new();
        let mut class_of = Vec::new();
        for (class, &size) in class_sizes.iter().enumerate() {
            class_start.push(kinds.len());
            for member in 0..size {
                kinds.push(VertexKind::Interior { class, member });
                class_of.push(class);
            }
        }
        let num_interior = kinds.len();

        // Validate and resolve every attachment before laying out leaves.
        let mut resolved: Vec<(usize, Vec<usize>)> = Vec::with_capacity(attachments.len());
        for (leaf, att) in attachments.iter().enumerate() {
            let Some(&(first_class, _)) = att.targets.first() else {
                return Err(GraphError::EmptyAttachment(leaf));
            };
            let mut targets = Vec::with_capacity(att.targets.len());
            for &(class, member) in &att.targets {
                if class >= d || member >= class_sizes[class] {
                    return Err(GraphError::UnknownTarget { leaf, class, member });
                }
                if class != first_class {
                    return Err(GraphError::MixedAttachment { leaf, first: first_class, second: class });
                }
                targets.push(class_start[class] + member);
            }
            targets.sort_unstable();
            targets.dedup();
            resolved.push((first_class, targets));
        }
        // Leaves are grouped by class; input order is kept within a class.
        let mut order: Vec<usize> = (0..resolved.len()).collect();
        order.sort_by_key(|&i| resolved[i].0);

        let mut lists: Vec<Vec<usize>> =
            (0..num_interior).map(|v| (0..num_interior).filter(|&w| class_of[w] != class_of[v]).collect()).collect();
        let mut leaf_counts = vec![0usize; d];
        for i in order {
            let (class, targets) = &resolved[i];
            let id = kinds.len();
            kinds.push(VertexKind::Leaf { class: *class, leaf: leaf_counts[*class] });
            leaf_counts[*class] += 1;
            class_of.push(*class);
            for &t in targets {
                lists[t].push(id);
            }
            lists.push(targets.clone());
        }

        Ok(Self::from_lists(
            Family::DPartite,
            d,
            class_sizes.to_vec(),
            leaf_counts,
            kinds,
            class_of,
            lists,
            num_interior,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn from_lists(
        family: Family,
        d: usize,
        class_sizes: Vec<usize>,
        leaf_counts: Vec<usize>,
        kinds: Vec<VertexKind>,
        class_of: Vec<usize>,
        mut lists: Vec<Vec<usize>>,
        num_interior: usize,
    ) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut adjacency = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            adjacency.extend_from_slice(list);
            offsets.push(adjacency.len());
        }
        Self { family, d, class_sizes, leaf_counts, kinds, class_of, offsets, adjacency, num_interior }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Number of interior classes (`d`).
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn num_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_interior(&self) -> usize {
        self.num_interior
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    /// Leaves hanging from each class (`r_i` for complete-like graphs).
    pub fn leaf_counts(&self) -> &[usize] {
        &self.leaf_counts
    }

    pub fn has_leaves(&self) -> bool {
        self.num_vertices() > self.num_interior
    }

    pub fn kind(&self, v: VertexId) -> Result<VertexKind, GraphError> {
        self.kinds.get(v.0).copied().ok_or(GraphError::UnknownVertex(v.0))
    }

    pub fn is_interior(&self, v: VertexId) -> bool {
        v.0 < self.num_interior
    }

    /// Class of an interior vertex, or the class a leaf hangs from.
    pub fn class_of(&self, v: VertexId) -> usize {
        self.class_of[v.0]
    }

    /// Interior vertex `i` of a complete-like graph.
    pub fn interior(&self, i: usize) -> VertexId {
        debug_assert!(i < self.num_interior);
        VertexId(i)
    }

    /// The `r`-th leaf (0-based) of class `class`.
    pub fn leaf(&self, class: usize, r: usize) -> Option<VertexId> {
        if class >= self.d || r >= self.leaf_counts[class] {
            return None;
        }
        let before: usize = self.leaf_counts[..class].iter().sum();
        Some(VertexId(self.num_interior + before + r))
    }

    pub fn neighbors(&self, v: VertexId) -> Result<&[usize], GraphError> {
        if v.0 >= self.num_vertices() {
            return Err(GraphError::UnknownVertex(v.0));
        }
        Ok(self.neighbor_slice(v.0))
    }

    #[inline]
    pub(crate) fn neighbor_slice(&self, v: usize) -> &[usize] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v.0 + 1] - self.offsets[v.0]
    }

    pub fn are_adjacent(&self, v: VertexId, w: VertexId) -> bool {
        self.neighbor_slice(v.0).binary_search(&w.0).is_ok()
    }

    /// Number of coordinates returned by [`GraphTopology::cells`].
    pub fn num_cells(&self) -> usize {
        match self.family {
            Family::CompleteLike => self.num_vertices(),
            Family::DPartite => 2 * self.d,
        }
    }

    /// Aggregates per-vertex weights into the coordinates the target measure
    /// lives on: every vertex for complete-like graphs; for d-partite graphs
    /// the `d` interior classes followed by the `d` leaf classes.
    pub fn cells(&self, weights: &[u64]) -> Vec<u64> {
        match self.family {
            Family::CompleteLike => weights.to_vec(),
            Family::DPartite => {
                let mut out = vec![0u64; 2 * self.d];
                for (v, &w) in weights.iter().enumerate() {
                    let class = self.class_of[v];
                    if v < self.num_interior {
                        out[class] += w;
                    } else {
                        out[self.d + class] += w;
                    }
                }
                out
            }
        }
    }

    /// Total weight per interior class (`Z(t,i)` on complete-like graphs).
    pub fn class_weights(&self, weights: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.d];
        for (v, &w) in weights[..self.num_interior].iter().enumerate() {
            out[self.class_of[v]] += w;
        }
        out
    }

    /// Total leaf weight per class, `L(t,i)`.
    pub fn leaf_totals(&self, weights: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.d];
        for (v, &w) in weights.iter().enumerate().skip(self.num_interior) {
            out[self.class_of[v]] += w;
        }
        out
    }

    /// The uniform target measure over [`GraphTopology::cells`]: `1/d` on
    /// each interior coordinate, `0` on every leaf coordinate.
    pub fn uniform_target(&self) -> Vec<f64> {
        let share = 1.0 / self.d as f64;
        let interior_cells = match self.family {
            Family::CompleteLike => self.num_interior,
            Family::DPartite => self.d,
        };
        (0..self.num_cells()).map(|c| if c < interior_cells { share } else { 0.0 }).collect()
    }
}
