use serde::{Deserialize, Serialize};

use crate::error::{Result, TfError};

/// Slack allowed outside `[0, 1]` before a value is rejected.
pub const UNIT_SLACK: f64 = 1e-12;

/// A real number in the closed unit interval.
///
/// Construction accepts values up to [`UNIT_SLACK`] outside the interval and
/// clamps them; anything further out is an error.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct UnitValue(f64);

impl UnitValue {
    pub const ZERO: UnitValue = UnitValue(0.0);
    pub const ONE: UnitValue = UnitValue(1.0);

    pub fn new(x: f64) -> Result<Self> {
        if !(-UNIT_SLACK..=1.0 + UNIT_SLACK).contains(&x) {
            return Err(TfError::OutOfUnitRange(x));
        }
        Ok(UnitValue(x.clamp(0.0, 1.0)))
    }

    /// Clamps without checking. NaN maps to zero.
    pub fn saturating(x: f64) -> Self {
        if x.is_nan() {
            UnitValue(0.0)
        } else {
            UnitValue(x.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for UnitValue {
    type Error = TfError;

    fn try_from(x: f64) -> Result<Self> {
        UnitValue::new(x)
    }
}

impl From<UnitValue> for f64 {
    fn from(u: UnitValue) -> f64 {
        u.0
    }
}

impl std::fmt::Display for UnitValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[inline]
pub(crate) fn clamp01(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_within_slack() {
        assert_eq!(UnitValue::new(1.0 + 1e-13).unwrap().get(), 1.0);
        assert_eq!(UnitValue::new(-5e-13).unwrap().get(), 0.0);
        assert_eq!(UnitValue::new(0.25).unwrap().get(), 0.25);
    }

    #[test]
    fn rejects_far_outside() {
        assert!(UnitValue::new(1.0 + 1e-9).is_err());
        assert!(UnitValue::new(-0.1).is_err());
        assert!(UnitValue::new(f64::NAN).is_err());
    }
}
