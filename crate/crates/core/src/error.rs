use std::fmt;

use thiserror::Error;

/// Which of the two hypothesis distributions a message refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pmf {
    /// Decoy (H1).
    F1,
    /// Normal sensor (H0).
    F0,
}

impl fmt::Display for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pmf::F1 => f.write_str("f1"),
            Pmf::F0 => f.write_str("f0"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pmf {pmf} sums to {sum}, deficit {deficit}")]
    MassDeficit { pmf: Pmf, sum: f64, deficit: f64 },

    #[error("pmf {pmf} has mass {value} outside [0,1] at signal {signal:?}")]
    MassOutOfRange {
        pmf: Pmf,
        signal: String,
        value: f64,
    },

    #[error("signal model has no signals")]
    EmptyModel,

    #[error("signal list and pmf lengths disagree ({signals} signals, {f1} f1 entries, {f0} f0 entries)")]
    ShapeMismatch {
        signals: usize,
        f1: usize,
        f0: usize,
    },

    #[error("duplicate signal identifier {0:?}")]
    DuplicateSignal(String),

    #[error("unknown signal {0:?}")]
    UnknownSignal(String),

    #[error("parameter {name} = {value} is outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("mind index {index} out of range for K = {k}")]
    MindIndex { index: usize, k: usize },

    #[error("signal index {index} out of range for {len} signals")]
    SignalIndex { index: usize, len: usize },

    #[error("coefficient row has squared norm {norm_sq}, expected 1")]
    NotUnitNorm { norm_sq: f64 },

    #[error("coefficient row has {got} amplitudes, expected K = {k}")]
    RowLength { got: usize, k: usize },

    #[error("(u, q) = ({u}, {q}) is not realizable: need |q| <= u")]
    InfeasibleSynthesis { u: f64, q: f64 },

    #[error("synthesis indices must be distinct and carry mass only inside K = {k}: {detail}")]
    SynthesisLayout { k: usize, detail: String },

    #[error("no coefficient row for signal index {0}")]
    MissingRow(usize),

    #[error("plan signals {plan:?} do not match model signals {model:?}")]
    PlanMismatch {
        plan: Vec<String>,
        model: Vec<String>,
    },

    #[error("belief has p(H1) = 0; thresholds are undefined")]
    DegenerateBelief,

    #[error(
        "outcome (signal {signal}, mind {mind}) has zero probability under the current belief"
    )]
    UndefinedPosterior { signal: usize, mind: usize },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("input contained no usable records")]
    EmptyInput,

    #[error("cannot estimate model: {0} class has no records")]
    EmptyClass(&'static str),

    #[error("i/o: {0}")]
    Io(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
