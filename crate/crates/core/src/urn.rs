//! Two-color generalized Pólya urn and the multi-color Pólya urn.
//!
//! The generalized urn draws color X with probability `X / (X + Y)` and then
//! adds `(a, b)`; otherwise it adds `(c, d)`. Ball counts are real-valued.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SimRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrnError {
    #[error("urn is empty (X + Y = 0)")]
    Empty,
    #[error("urn counts and parameters must be finite and nonnegative")]
    Negative,
    #[error("color {0} does not exist")]
    UnknownColor(usize),
    #[error("multi-color urn needs at least one color, all counts positive")]
    BadCounts,
    #[error("statistic undefined: {0}")]
    Undefined(&'static str),
}

/// Reinforcement matrix rows: drawing X adds `(a, b)`, drawing Y adds `(c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UrnParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UrnState {
    pub x: f64,
    pub y: f64,
    pub params: UrnParams,
    pub n: u64,
}

impl UrnState {
    pub fn new(x: f64, y: f64, params: UrnParams) -> Result<Self, UrnError> {
        let all = [x, y, params.a, params.b, params.c, params.d];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(UrnError::Negative);
        }
        if x + y <= 0.0 {
            return Err(UrnError::Empty);
        }
        Ok(Self { x, y, params, n: 0 })
    }

    /// One draw. Returns `true` when color X was drawn.
    #[inline]
    pub fn step(&mut self, rng: &mut SimRng) -> Result<bool, UrnError> {
        let total = self.x + self.y;
        if !(total > 0.0) {
            return Err(UrnError::Empty);
        }
        let drew_x = rng.unit() * total < self.x;
        self.apply(drew_x);
        Ok(drew_x)
    }

    /// Applies the outcome of a draw decided elsewhere.
    #[inline]
    pub fn apply(&mut self, drew_x: bool) {
        let p = self.params;
        if drew_x {
            self.x += p.a;
            self.y += p.b;
        } else {
            self.x += p.c;
            self.y += p.d;
        }
        self.n += 1;
    }

    pub fn fraction_x(&self) -> f64 {
        self.x / (self.x + self.y)
    }

    pub fn statistic(&self, which: RegimeStatistic) -> Result<f64, UrnError> {
        regime_statistic(self, which)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeStatistic {
    /// `ln X / ln Y`; tends to `a` when `a > d = 1` and `b = c = 0`.
    LogRatio,
    /// `X / (c Y) - ln Y`; converges to a random limit when `a = d = 1`, `b = 0`, `c > 0`.
    Centered,
}

pub fn regime_statistic(state: &UrnState, which: RegimeStatistic) -> Result<f64, UrnError> {
    match which {
        RegimeStatistic::LogRatio => {
            if !(state.x > 1.0 && state.y > 1.0) {
                return Err(UrnError::Undefined("log ratio needs X > 1 and Y > 1"));
            }
            Ok(state.x.ln() / state.y.ln())
        }
        RegimeStatistic::Centered => {
            if !(state.y > 1.0) {
                return Err(UrnError::Undefined("centered statistic needs Y > 1"));
            }
            if !(state.params.c > 0.0) {
                return Err(UrnError::Undefined("centered statistic needs c > 0"));
            }
            Ok(state.x / (state.params.c * state.y) - state.y.ln())
        }
    }
}

/// `d`-color Pólya urn: draw a ball, return it with one more of its color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiUrnState {
    counts: Vec<u64>,
    t: u64,
}

impl MultiUrnState {
    pub fn new(counts: Vec<u64>) -> Result<Self, UrnError> {
        if counts.is_empty() || counts.contains(&0) {
            return Err(UrnError::BadCounts);
        }
        let t = counts.iter().sum();
        Ok(Self { counts, t })
    }

    /// One ball of each color; starts at `t = d`.
    pub fn one_each(d: usize) -> Result<Self, UrnError> {
        Self::new(vec![1; d])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Draws and reinforces; returns the color drawn.
    pub fn step(&mut self, rng: &mut SimRng) -> usize {
        let mut r = rng.below(self.t);
        let mut color = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if r < c {
                color = i;
                break;
            }
            r -= c;
        }
        self.counts[color] += 1;
        self.t += 1;
        color
    }

    /// `ln t - ln(Pi_i - 1)`, a nonnegative supermartingale.
    pub fn supermartingale_diag(&self, color: usize) -> Result<f64, UrnError> {
        let count = *self.counts.get(color).ok_or(UrnError::UnknownColor(color))?;
        if count < 2 {
            return Err(UrnError::Undefined("diagnostic needs at least 2 balls of the color"));
        }
        Ok((self.t as f64).ln() - ((count - 1) as f64).ln())
    }

    /// Conditional expected increment of [`MultiUrnState::supermartingale_diag`].
    pub fn diag_drift(&self, color: usize) -> Result<f64, UrnError> {
        let count = *self.counts.get(color).ok_or(UrnError::UnknownColor(color))?;
        if count < 2 {
            return Err(UrnError::Undefined("drift needs at least 2 balls of the color"));
        }
        Ok(diag_drift(count, self.t))
    }
}

/// `ln(1 + 1/t) - (Pi/t) ln(1 + 1/(Pi - 1))`.
pub fn diag_drift(count: u64, t: u64) -> f64 {
    let (pi, t) = (count as f64, t as f64);
    (1.0 / t).ln_1p() - pi / t * (1.0 / (pi - 1.0)).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, c: f64, d: f64) -> UrnParams {
        UrnParams { a, b, c, d }
    }

    #[test]
    fn single_color_draw_is_deterministic() {
        let mut rng = SimRng::seed_from(3);
        for _ in 0..100 {
            let mut s = UrnState::new(1.0, 0.0, params(2.5, 0.5, 7.0, 7.0)).unwrap();
            assert!(s.step(&mut rng).unwrap());
            assert_eq!((s.x, s.y), (3.5, 0.5));
        }
    }

    #[test]
    fn unit_matrix_adds_two_per_step() {
        let mut rng = SimRng::seed_from(4);
        let mut s = UrnState::new(1.0, 1.0, params(1.0, 1.0, 1.0, 1.0)).unwrap();
        for n in 1..=50u64 {
            s.step(&mut rng).unwrap();
            assert_eq!(s.x + s.y, 2.0 + 2.0 * n as f64);
        }
        assert_eq!(s.n, 50);
    }

    #[test]
    fn empty_and_negative_urns_rejected() {
        assert_eq!(UrnState::new(0.0, 0.0, params(1.0, 0.0, 0.0, 1.0)), Err(UrnError::Empty));
        assert_eq!(UrnState::new(1.0, 0.0, params(-1.0, 0.0, 0.0, 1.0)), Err(UrnError::Negative));
        let mut rng = SimRng::seed_from(0);
        let mut s = UrnState::new(1.0, 0.0, params(0.0, 0.0, 0.0, 0.0)).unwrap();
        s.x = 0.0;
        assert_eq!(s.step(&mut rng), Err(UrnError::Empty));
    }

    #[test]
    fn statistics() {
        let s = UrnState { x: 4f64.exp(), y: 2f64.exp(), params: params(2.0, 0.0, 0.0, 1.0), n: 0 };
        assert!((regime_statistic(&s, RegimeStatistic::LogRatio).unwrap() - 2.0).abs() < 1e-15);
        let s = UrnState { x: 10.0, y: 5.0, params: params(1.0, 0.0, 2.0, 1.0), n: 0 };
        assert!((regime_statistic(&s, RegimeStatistic::Centered).unwrap() - (1.0 - 5f64.ln())).abs() < 1e-15);
        let s = UrnState { x: 1.0, y: 5.0, params: params(1.0, 0.0, 2.0, 1.0), n: 0 };
        assert!(regime_statistic(&s, RegimeStatistic::LogRatio).is_err());
        let s = UrnState { x: 3.0, y: 5.0, params: params(1.0, 0.0, 0.0, 1.0), n: 0 };
        assert!(regime_statistic(&s, RegimeStatistic::Centered).is_err());
    }

    #[test]
    fn multi_urn_balances() {
        let mut rng = SimRng::seed_from(5);
        let mut u = MultiUrnState::one_each(4).unwrap();
        assert_eq!(u.t(), 4);
        for _ in 0..10_000 {
            u.step(&mut rng);
            assert_eq!(u.counts().iter().sum::<u64>(), u.t());
            assert!(u.counts().iter().all(|&c| c >= 1));
        }
        assert!(MultiUrnState::new(vec![5, 0]).is_err());
    }

    #[test]
    fn two_color_draws_are_fair() {
        let mut rng = SimRng::seed_from(8);
        let mut first = 0u32;
        let trials = 40_000;
        for _ in 0..trials {
            let mut u = MultiUrnState::one_each(2).unwrap();
            if u.step(&mut rng) == 0 {
                first += 1;
            }
        }
        // within 4 standard errors of 1/2
        let se = (0.25 / trials as f64).sqrt();
        assert!((first as f64 / trials as f64 - 0.5).abs() < 4.0 * se);
    }

    #[test]
    fn diagnostic_values() {
        let u = MultiUrnState::new(vec![2, 2]).unwrap();
        assert!((u.supermartingale_diag(0).unwrap() - 4f64.ln()).abs() < 1e-15);
        let single = MultiUrnState::new(vec![1, 3]).unwrap();
        assert!(single.supermartingale_diag(0).is_err());
        assert_eq!(single.supermartingale_diag(5), Err(UrnError::UnknownColor(5)));
    }

    #[test]
    fn drift_is_negative() {
        let drift = diag_drift(3, 6);
        let expected = (7f64 / 6.0).ln() - 0.5 * 1.5f64.ln();
        assert!((drift - expected).abs() < 1e-15);
        assert!((drift - (0.154_150_679_827_258_3 - 0.202_732_554_054_082_2)).abs() < 1e-12);
        for t in 3..200u64 {
            for pi in 2..t {
                assert!(diag_drift(pi, t) < 0.0, "pi={pi} t={t}");
            }
        }
    }
}
