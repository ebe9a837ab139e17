//! Weight schedules for the special vertex of a modified walk.
//!
//! On its `k`-th visit the special vertex has its weight set to `H(k)`
//! instead of being incremented. Every form must satisfy `H(1) >= 1` and
//! `H(k+1) >= H(k) + 1`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{WalkError, WalkState};

/// `H(k)` computed from the walk state at the moment of the `k`-th visit.
pub type AdaptiveFn = Arc<dyn Fn(&WalkState, u64) -> u64 + Send + Sync>;

#[derive(Clone)]
pub enum ScheduleSpec {
    /// `H(k) = h0 + c * k`.
    Affine { h0: i64, c: u64 },
    /// `H(k) = values[k - 1]`; running past the end is an error.
    Table(Vec<u64>),
    /// Checked against the growth condition as values are produced.
    Adaptive(AdaptiveFn),
}

impl fmt::Debug for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::Affine { h0, c } => f.debug_struct("Affine").field("h0", h0).field("c", c).finish(),
            ScheduleSpec::Table(v) => f.debug_tuple("Table").field(v).finish(),
            ScheduleSpec::Adaptive(_) => f.write_str("Adaptive(..)"),
        }
    }
}

impl ScheduleSpec {
    pub fn affine(h0: i64, c: u64) -> Self {
        ScheduleSpec::Affine { h0, c }
    }

    /// Eager check for the forms whose values are known up front.
    pub fn validate(&self) -> Result<(), WalkError> {
        match self {
            ScheduleSpec::Affine { h0, c } => {
                if *c < 1 {
                    return Err(WalkError::ScheduleViolation {
                        k: 2,
                        previous: Some(affine(*h0, *c, 1)),
                        value: affine(*h0, *c, 2),
                    });
                }
                if h0 + (*c as i64) < 1 {
                    return Err(WalkError::ScheduleViolation { k: 1, previous: None, value: affine(*h0, *c, 1) });
                }
                Ok(())
            }
            ScheduleSpec::Table(values) => {
                let mut previous: Option<u64> = None;
                for (i, &value) in values.iter().enumerate() {
                    check_growth(i as u64 + 1, previous, value as i128)?;
                    previous = Some(value);
                }
                Ok(())
            }
            ScheduleSpec::Adaptive(_) => Ok(()),
        }
    }

    /// Raw schedule value for visit `k >= 1`; growth is checked by the caller.
    pub(crate) fn raw_value(&self, k: u64, state: &WalkState) -> Result<i128, WalkError> {
        match self {
            ScheduleSpec::Affine { h0, c } => Ok(affine(*h0, *c, k)),
            ScheduleSpec::Table(values) => {
                values.get((k - 1) as usize).map(|&v| v as i128).ok_or(WalkError::ScheduleExhausted { k })
            }
            ScheduleSpec::Adaptive(f) => Ok(f(state, k) as i128),
        }
    }
}

fn affine(h0: i64, c: u64, k: u64) -> i128 {
    h0 as i128 + c as i128 * k as i128
}

/// Growth condition for the `k`-th value given the previous one.
pub(crate) fn check_growth(k: u64, previous: Option<u64>, value: i128) -> Result<u64, WalkError> {
    let floor = previous.map_or(1, |p| p as i128 + 1);
    if value < floor || value > u64::MAX as i128 {
        return Err(WalkError::ScheduleViolation { k, previous: previous.map(|p| p as i128), value });
    }
    Ok(value as u64)
}

/// Serializable schedule forms for configs. Adaptive schedules are code-only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ScheduleConfig {
    Affine { h0: i64, c: u64 },
    Table { values: Vec<u64> },
}

impl From<&ScheduleConfig> for ScheduleSpec {
    fn from(cfg: &ScheduleConfig) -> Self {
        match cfg {
            ScheduleConfig::Affine { h0, c } => ScheduleSpec::Affine { h0: *h0, c: *c },
            ScheduleConfig::Table { values } => ScheduleSpec::Table(values.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_schedule_is_valid() {
        assert!(ScheduleSpec::affine(0, 1).validate().is_ok());
        assert!(ScheduleSpec::affine(0, 2).validate().is_ok());
        assert!(ScheduleSpec::affine(-3, 4).validate().is_ok());
    }

    #[test]
    fn affine_rejects_flat_or_nonpositive_start() {
        assert!(matches!(ScheduleSpec::affine(5, 0).validate(), Err(WalkError::ScheduleViolation { k: 2, .. })));
        assert!(matches!(ScheduleSpec::affine(-1, 1).validate(), Err(WalkError::ScheduleViolation { k: 1, .. })));
    }

    #[test]
    fn table_rejects_repeat_at_second_visit() {
        let err = ScheduleSpec::Table(vec![1, 1, 3]).validate().unwrap_err();
        assert_eq!(err, WalkError::ScheduleViolation { k: 2, previous: Some(1), value: 1 });
        assert!(ScheduleSpec::Table(vec![1, 2, 5, 6]).validate().is_ok());
        assert!(matches!(ScheduleSpec::Table(vec![0]).validate(), Err(WalkError::ScheduleViolation { k: 1, .. })));
    }

    #[test]
    fn config_round_trip() {
        let cfg: ScheduleConfig = serde_json::from_str(r#"{"form":"affine","h0":0,"c":2}"#).unwrap();
        assert_eq!(cfg, ScheduleConfig::Affine { h0: 0, c: 2 });
        let cfg: ScheduleConfig = serde_json::from_str(r#"{"form":"table","values":[1,3,4]}"#).unwrap();
        assert!(ScheduleSpec::from(&cfg).validate().is_ok());
    }
}
