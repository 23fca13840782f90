//! Number rendering shared by the JSON and CSV emitters.

use serde_json::Value;

use crate::error::{Error, Result};

/// How reals are written into output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumberFormat {
    /// Six significant digits, emitted as JSON numbers.
    #[default]
    Significant,
    /// Shortest round-trip decimal, emitted as JSON strings.
    Full,
}

/// Round to six significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.5e}", x).parse().unwrap_or(x)
}

/// Render a real as a JSON value. Infinities become the strings `"inf"` / `"-inf"`.
pub fn real(x: f64, fmt: NumberFormat) -> Value {
    if x.is_infinite() {
        return Value::String(if x > 0.0 { "inf" } else { "-inf" }.to_string());
    }
    match fmt {
        NumberFormat::Significant => serde_json::Number::from_f64(round_sig6(x))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        NumberFormat::Full => Value::String(format!("{:?}", x)),
    }
}

/// Render a real for a CSV cell.
pub fn cell(x: f64, fmt: NumberFormat) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    match fmt {
        NumberFormat::Significant => format!("{}", round_sig6(x)),
        NumberFormat::Full => format!("{:?}", x),
    }
}

/// Read a real written by [`real`] in either format.
pub fn read_real(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Json(format!("not representable as f64: {n}"))),
        Value::String(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => other
                .parse()
                .map_err(|_| Error::Json(format!("not a decimal: {other:?}"))),
        },
        other => Err(Error::Json(format!("expected a real, found {other}"))),
    }
}
