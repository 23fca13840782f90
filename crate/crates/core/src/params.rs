//! Validated scalar parameters shared across the solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The attacker's false-alarm tolerance β, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta < 1.0 {
            Ok(Tolerance(beta))
        } else {
            Err(Error::Parameter {
                name: "beta",
                value: beta,
                range: "(0, 1)",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// The factor `(1 − β)/β` that scales the prior odds into a threshold.
    pub fn odds_factor(self) -> f64 {
        (1.0 - self.0) / self.0
    }
}

impl TryFrom<f64> for Tolerance {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Tolerance::new(v)
    }
}

impl From<Tolerance> for f64 {
    fn from(t: Tolerance) -> f64 {
        t.0
    }
}

/// Interference strength ζ ∈ [−1, 1] used by the attraction-factor calibration.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Calibration(f64);

impl Calibration {
    pub fn new(zeta: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&zeta) {
            Ok(Calibration(zeta))
        } else {
            Err(Error::Parameter {
                name: "zeta",
                value: zeta,
                range: "[-1, 1]",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Calibration {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Calibration::new(v)
    }
}

impl From<Calibration> for f64 {
    fn from(c: Calibration) -> f64 {
        c.0
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_is_open_interval() {
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(1.0).is_err());
        assert!(Tolerance::new(1.5).is_err());
        assert!(Tolerance::new(f64::NAN).is_err());
        assert!((Tolerance::new(0.4).unwrap().odds_factor() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn calibration_is_closed_interval() {
        assert!(Calibration::new(-1.0).is_ok());
        assert!(Calibration::new(1.0).is_ok());
        assert!(Calibration::new(1.0001).is_err());
    }
}
