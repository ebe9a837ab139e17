//! Excursions away from the special vertex of a triangle.
//!
//! Label the special vertex `s` and the other two `1 < 2` (by index). An
//! excursion starts when the walk leaves `s` and ends at its return. It is
//! classified by where it starts and which vertex it visits last:
//!
//! | class | starts at | last before `s` | `m` counts visits to |
//! |-------|-----------|-----------------|----------------------|
//! | `A`   | 1         | 1               | 1                    |
//! | `B`   | 1         | 2               | 1                    |
//! | `ABar`| 2         | 2               | 2                    |
//! | `BBar`| 2         | 1               | 2                    |

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{GraphTopology, VertexId};

use super::{StepObserver, WalkError, WalkState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExcursionClass {
    A,
    B,
    ABar,
    BBar,
}

impl ExcursionClass {
    pub const ALL: [ExcursionClass; 4] = [Self::A, Self::B, Self::ABar, Self::BBar];

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcursionRecord {
    /// Visits to the special vertex before this excursion started.
    pub k: u64,
    pub start_vertex: VertexId,
    pub visits_first: u64,
    pub visits_second: u64,
    pub m: u64,
    pub class: ExcursionClass,
}

/// Completed excursion counts keyed by shuttle count `m`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExcursionHistogram {
    counts: BTreeMap<u64, [u64; 4]>,
}

impl ExcursionHistogram {
    pub fn record(&mut self, class: ExcursionClass, m: u64) {
        self.counts.entry(m).or_default()[class.slot()] += 1;
    }

    pub fn count(&self, class: ExcursionClass, m: u64) -> u64 {
        self.counts.get(&m).map_or(0, |c| c[class.slot()])
    }

    pub fn class_total(&self, class: ExcursionClass) -> u64 {
        self.counts.values().map(|c| c[class.slot()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().flatten().sum()
    }

    /// Completed excursions with `m' >= m` that started at vertex 1 (`C_m`).
    pub fn at_least(&self, m: u64) -> u64 {
        self.counts.range(m..).map(|(_, c)| c[ExcursionClass::A.slot()] + c[ExcursionClass::B.slot()]).sum()
    }

    /// Adds another histogram's counts into this one.
    pub fn merge(&mut self, other: &ExcursionHistogram) {
        for (m, c) in other.iter() {
            let mine = self.counts.entry(m).or_default();
            for (a, b) in mine.iter_mut().zip(c) {
                *a += b;
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, [u64; 4])> + '_ {
        self.counts.iter().map(|(&m, &c)| (m, c))
    }
}

#[derive(Debug, Clone)]
struct OpenExcursion {
    k: u64,
    start: usize,
    visits: [u64; 2],
}

/// Step observer that classifies excursions from the special vertex.
#[derive(Debug, Clone)]
pub struct ExcursionTracker {
    special: usize,
    pair: [usize; 2],
    prev: usize,
    special_visits: u64,
    open: Option<OpenExcursion>,
    keep_records: bool,
    records: Vec<ExcursionRecord>,
    histogram: ExcursionHistogram,
}

impl ExcursionTracker {
    /// `graph` must be a triangle without leaves; `position` is where the
    /// walk currently sits.
    pub fn new(graph: &GraphTopology, special: VertexId, position: VertexId) -> Result<Self, WalkError> {
        if graph.num_vertices() != 3 || graph.num_interior() != 3 {
            return Err(WalkError::NotATriangle);
        }
        graph.kind(special)?;
        graph.kind(position)?;
        let mut pair = [0usize; 2];
        let mut it = (0..3).filter(|&v| v != special.0);
        pair[0] = it.next().expect("triangle");
        pair[1] = it.next().expect("triangle");
        Ok(Self {
            special: special.0,
            pair,
            prev: position.0,
            special_visits: 0,
            open: None,
            keep_records: true,
            records: Vec::new(),
            histogram: ExcursionHistogram::default(),
        })
    }

    /// Tracker for a walk that will be observed from `state` onwards.
    pub fn attach(state: &WalkState, special: VertexId) -> Result<Self, WalkError> {
        Self::new(state.graph(), special, state.position())
    }

    /// Keep only the histogram; for long runs.
    pub fn histogram_only(mut self) -> Self {
        self.keep_records = false;
        self
    }

    /// Classifies a vertex path, where `path[0]` is the starting position.
    pub fn from_path(graph: &GraphTopology, special: VertexId, path: &[usize]) -> Result<Self, WalkError> {
        let (&first, rest) = path.split_first().ok_or(WalkError::NotATriangle)?;
        let mut tracker = Self::new(graph, special, VertexId(first))?;
        for &v in rest {
            tracker.visit(v);
        }
        Ok(tracker)
    }

    pub fn records(&self) -> &[ExcursionRecord] {
        &self.records
    }

    pub fn histogram(&self) -> &ExcursionHistogram {
        &self.histogram
    }

    pub fn completed(&self) -> u64 {
        self.histogram.total()
    }

    pub fn visit(&mut self, v: usize) {
        if v == self.special {
            self.special_visits += 1;
            if let Some(open) = self.open.take() {
                self.close(open, self.prev);
            }
        } else {
            let slot = if v == self.pair[0] { 0 } else { 1 };
            if self.prev == self.special {
                self.open = Some(OpenExcursion { k: self.special_visits, start: v, visits: [0, 0] });
            }
            if let Some(open) = &mut self.open {
                open.visits[slot] += 1;
            }
        }
        self.prev = v;
    }

    fn close(&mut self, open: OpenExcursion, last: usize) {
        let from_first = open.start == self.pair[0];
        let class = match (from_first, last == self.pair[0]) {
            (true, true) => ExcursionClass::A,
            (true, false) => ExcursionClass::B,
            (false, false) => ExcursionClass::ABar,
            (false, true) => ExcursionClass::BBar,
        };
        let m = if from_first { open.visits[0] } else { open.visits[1] };
        self.histogram.record(class, m);
        if self.keep_records {
            self.records.push(ExcursionRecord {
                k: open.k,
                start_vertex: VertexId(open.start),
                visits_first: open.visits[0],
                visits_second: open.visits[1],
                m,
                class,
            });
        }
    }
}

impl StepObserver for ExcursionTracker {
    #[inline]
    fn observe(&mut self, state: &WalkState) {
        self.visit(state.position().0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    /// Product formula under the exact transition law.
    Exact,
    /// `nu^(m-1)` approximation, valid while `m^2` is small against `u` and `v`.
    Geometric,
}

fn check_params(u: u64, v: u64, a: u64, m: u64) -> Result<(), WalkError> {
    if u == 0 || v == 0 || a == 0 || m == 0 {
        return Err(WalkError::NonPositiveParameter);
    }
    Ok(())
}

/// `prod_{j=0}^{m-2} (v+j)/(v+j+a) * (u+j+1)/(u+j+1+a)`; 1 when `m = 1`.
fn shuttle_product(u: f64, v: f64, a: f64, m: u64) -> f64 {
    (0..m.saturating_sub(1)).fold(1.0, |acc, j| {
        let j = j as f64;
        acc * (v + j) / (v + j + a) * (u + j + 1.0) / (u + j + 1.0 + a)
    })
}

fn nu(u: f64, v: f64, a: f64) -> (f64, f64, f64) {
    let lu = a / (a + u);
    let lv = a / (a + v);
    (lu, lv, (1.0 - lu) * (1.0 - lv))
}

/// Probability that an excursion from the special vertex starts at vertex 1
/// and visits it at least `m` times, given weights `u`, `v` on the two
/// ordinary vertices and `a` on the special one at the start.
pub fn excursion_tail_prob(u: u64, v: u64, a: u64, m: u64, mode: TailMode) -> Result<f64, WalkError> {
    check_params(u, v, a, m)?;
    let (u, v, a) = (u as f64, v as f64, a as f64);
    let start = u / (u + v);
    Ok(match mode {
        TailMode::Exact => start * shuttle_product(u, v, a, m),
        TailMode::Geometric => start * nu(u, v, a).2.powi((m - 1) as i32),
    })
}

/// Probability of one excursion class with shuttle count exactly `m`.
pub fn excursion_event_prob(
    u: u64,
    v: u64,
    a: u64,
    m: u64,
    class: ExcursionClass,
    mode: TailMode,
) -> Result<f64, WalkError> {
    check_params(u, v, a, m)?;
    // The barred events are the unbarred ones with the roles of 1 and 2 swapped.
    let (u, v) = match class {
        ExcursionClass::A | ExcursionClass::B => (u as f64, v as f64),
        ExcursionClass::ABar | ExcursionClass::BBar => (v as f64, u as f64),
    };
    let a = a as f64;
    let start = u / (u + v);
    let ends_home = matches!(class, ExcursionClass::A | ExcursionClass::ABar);
    Ok(match mode {
        TailMode::Exact => {
            let mf = m as f64;
            let base = start * shuttle_product(u, v, a, m);
            if ends_home {
                base * a / (a + v + mf - 1.0)
            } else {
                base * (v + mf - 1.0) / (a + v + mf - 1.0) * a / (a + u + mf)
            }
        }
        TailMode::Geometric => {
            let (lu, lv, nu) = nu(u, v, a);
            let geo = nu.powi((m - 1) as i32);
            if ends_home {
                start * lv * geo
            } else {
                start * lu * (1.0 - lv) * geo
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> GraphTopology {
        GraphTopology::complete_like(3, &[0, 0, 0]).unwrap()
    }

    fn classify(path: &[usize]) -> Vec<(ExcursionClass, u64)> {
        // vertices 1,2,3 of the triangle are indices 0,1,2; 3 is special
        let tracker = ExcursionTracker::from_path(&triangle(), VertexId(2), path).unwrap();
        tracker.records().iter().map(|r| (r.class, r.m)).collect()
    }

    #[test]
    fn single_shuttle_return_home() {
        assert_eq!(classify(&[2, 0, 2]), vec![(ExcursionClass::A, 1)]);
    }

    #[test]
    fn single_shuttle_through_second() {
        assert_eq!(classify(&[2, 0, 1, 2]), vec![(ExcursionClass::B, 1)]);
    }

    #[test]
    fn double_shuttle_return_home() {
        assert_eq!(classify(&[2, 0, 1, 0, 2]), vec![(ExcursionClass::A, 2)]);
    }

    #[test]
    fn barred_classes_and_partial_prefix() {
        // leading segment before the first visit to 3 is not an excursion,
        // and the trailing open excursion is not counted
        let got = classify(&[0, 1, 2, 1, 2, 1, 0, 2, 0, 1]);
        assert_eq!(got, vec![(ExcursionClass::ABar, 1), (ExcursionClass::BBar, 1)]);
        let tracker = ExcursionTracker::from_path(&triangle(), VertexId(2), &[2, 1, 0, 1, 0, 1, 2]).unwrap();
        let r = &tracker.records()[0];
        assert_eq!((r.class, r.m, r.visits_first, r.visits_second), (ExcursionClass::ABar, 3, 2, 3));
        assert_eq!(r.k, 0);
    }

    #[test]
    fn tracker_requires_triangle() {
        let g = GraphTopology::complete_like(3, &[0, 0, 1]).unwrap();
        assert!(matches!(ExcursionTracker::new(&g, VertexId(2), VertexId(0)), Err(WalkError::NotATriangle)));
    }

    #[test]
    fn exact_tail_small_case() {
        let p = excursion_tail_prob(2, 1, 3, 2, TailMode::Exact).unwrap();
        assert!((p - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn first_term_is_start_probability() {
        for mode in [TailMode::Exact, TailMode::Geometric] {
            assert_eq!(excursion_tail_prob(5, 3, 7, 1, mode).unwrap(), 5.0 / 8.0);
        }
    }

    #[test]
    fn geometric_tail_equal_weights() {
        for m in 1..6u64 {
            let p = excursion_tail_prob(4, 4, 4, m, TailMode::Geometric).unwrap();
            let expected = 0.5 * 4f64.powi(1 - m as i32);
            assert!((p - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn nonpositive_inputs_rejected() {
        assert_eq!(excursion_tail_prob(0, 1, 1, 1, TailMode::Exact), Err(WalkError::NonPositiveParameter));
        assert_eq!(excursion_tail_prob(1, 1, 1, 0, TailMode::Exact), Err(WalkError::NonPositiveParameter));
    }

    #[test]
    fn events_sum_to_start_probability() {
        let (u, v, a) = (3u64, 5u64, 2u64);
        let total: f64 = (1..400)
            .map(|m| {
                excursion_event_prob(u, v, a, m, ExcursionClass::A, TailMode::Exact).unwrap()
                    + excursion_event_prob(u, v, a, m, ExcursionClass::B, TailMode::Exact).unwrap()
            })
            .sum();
        // the classes partition {start at 1}, so the partial sum telescopes to C_1 - C_400
        let rest = excursion_tail_prob(u, v, a, 400, TailMode::Exact).unwrap();
        assert!((total + rest - 3.0 / 8.0).abs() < 1e-12, "{total}");
        let barred: f64 = (1..400)
            .map(|m| {
                excursion_event_prob(u, v, a, m, ExcursionClass::ABar, TailMode::Exact).unwrap()
                    + excursion_event_prob(u, v, a, m, ExcursionClass::BBar, TailMode::Exact).unwrap()
            })
            .sum();
        let rest = excursion_tail_prob(v, u, a, 400, TailMode::Exact).unwrap();
        assert!((barred + rest - 5.0 / 8.0).abs() < 1e-12, "{barred}");
    }

    #[test]
    fn tail_is_sum_of_events() {
        let (u, v, a) = (4u64, 2u64, 3u64);
        for m in 1..6u64 {
            let tail = excursion_tail_prob(u, v, a, m, TailMode::Exact).unwrap();
            let sum: f64 = (m..500)
                .map(|i| {
                    excursion_event_prob(u, v, a, i, ExcursionClass::A, TailMode::Exact).unwrap()
                        + excursion_event_prob(u, v, a, i, ExcursionClass::B, TailMode::Exact).unwrap()
                })
                .sum();
            assert!((tail - sum).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_events_approach_exact_for_heavy_weights() {
        let (u, v, a) = (100_000u64, 80_000u64, 50_000u64);
        for class in ExcursionClass::ALL {
            for m in 1..4 {
                let exact = excursion_event_prob(u, v, a, m, class, TailMode::Exact).unwrap();
                let approx = excursion_event_prob(u, v, a, m, class, TailMode::Geometric).unwrap();
                assert!((exact / approx - 1.0).abs() < 1e-3, "{class:?} m={m}");
            }
        }
    }
}
