//! Classical signal distributions for the two sensor types.
//!
//! A [`SignalModel`] holds a finite ordered alphabet together with the pmf of
//! signals emitted by a decoy (`f1`) and by a normal sensor (`f0`). Signals
//! are addressed by position everywhere inside the crate; labels are kept for
//! I/O.

use std::collections::HashSet;
use std::io::{Read, Write};

use crate::error::{Error, Pmf, Result};
use crate::params::check_probability;

/// Absolute tolerance on the total mass of each pmf.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SignalModel {
    signals: Vec<String>,
    f1: Vec<f64>,
    f0: Vec<f64>,
}

impl SignalModel {
    /// Build and validate a model. Labels must be unique.
    pub fn new(signals: Vec<String>, f1: Vec<f64>, f0: Vec<f64>) -> Result<Self> {
        if signals.len() != f1.len() || signals.len() != f0.len() {
            return Err(Error::ShapeMismatch {
                signals: signals.len(),
                f1: f1.len(),
                f0: f0.len(),
            });
        }
        let mut seen = HashSet::with_capacity(signals.len());
        for s in &signals {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateSignal(s.clone()));
            }
        }
        let model = SignalModel { signals, f1, f0 };
        model.validate()?;
        Ok(model)
    }

    /// Two-signal model on `{0, 1}` with `f1(1) = theta1` and `f0(1) = theta0`.
    pub fn bernoulli(theta1: f64, theta0: f64) -> Result<Self> {
        check_probability("theta1", theta1)?;
        check_probability("theta0", theta0)?;
        SignalModel::new(
            vec!["0".into(), "1".into()],
            vec![1.0 - theta1, theta1],
            vec![1.0 - theta0, theta0],
        )
    }

    /// Check that both pmfs are valid distributions.
    pub fn validate(&self) -> Result<()> {
        if self.signals.is_empty() {
            return Err(Error::EmptyModel);
        }
        for (pmf, mass) in [(Pmf::F1, &self.f1), (Pmf::F0, &self.f0)] {
            for (signal, &value) in self.signals.iter().zip(mass) {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::MassOutOfRange {
                        pmf,
                        signal: signal.clone(),
                        value,
                    });
                }
            }
            let sum: f64 = mass.iter().sum();
            if (sum - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::MassDeficit {
                    pmf,
                    sum,
                    deficit: 1.0 - sum,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn label(&self, s: usize) -> &str {
        &self.signals[s]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.signals
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownSignal(label.to_string()))
    }

    pub fn f1(&self) -> &[f64] {
        &self.f1
    }

    pub fn f0(&self) -> &[f64] {
        &self.f0
    }

    /// `f1(s) / f0(s)` at a signal position.
    ///
    /// `+inf` when only `f0(s)` vanishes; `0` whenever `f1(s)` vanishes, 0/0 included.
    pub fn ratio_at(&self, s: usize) -> f64 {
        let (num, den) = (self.f1[s], self.f0[s]);
        if num == 0.0 {
            0.0
        } else if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    }

    /// Likelihood ratio looked up by signal label.
    pub fn likelihood_ratio(&self, signal: &str) -> Result<f64> {
        Ok(self.ratio_at(self.index_of(signal)?))
    }

    /// Read the `signal,f1,f0` CSV format.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(csv_err(1))?.clone();
        let expected = ["signal", "f1", "f0"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse {
                line: 1,
                reason: format!(
                    "expected header `signal,f1,f0`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let (mut signals, mut f1, mut f0) = (Vec::new(), Vec::new(), Vec::new());
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(csv_err(line))?;
            let num = |idx: usize, name: &str| -> Result<f64> {
                record[idx].parse().map_err(|_| Error::Parse {
                    line,
                    reason: format!("{name} value {:?} is not a decimal", &record[idx]),
                })
            };
            let (a, b) = (num(1, "f1")?, num(2, "f0")?);
            let label = record[0].to_string();
            if signals.contains(&label) {
                return Err(Error::DuplicateSignal(label));
            }
            signals.push(label);
            f1.push(a);
            f0.push(b);
        }
        SignalModel::new(signals, f1, f0)
    }

    /// Write the `signal,f1,f0` CSV format at full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "signal,f1,f0")?;
        for ((s, a), b) in self.signals.iter().zip(&self.f1).zip(&self.f0) {
            writeln!(out, "{s},{a:?},{b:?}")?;
        }
        Ok(())
    }
}

fn csv_err(line: usize) -> impl Fn(csv::Error) -> Error {
    move |e| Error::Parse {
        line: e.position().map(|p| p.line() as usize).unwrap_or(line),
        reason: e.to_string(),
    }
}
