//! Prospect-state coefficient algebra.
//!
//! The generator attaches to every classical signal `s` a real unit vector of
//! amplitudes over `K` mind states, one row for the decoy (`a_s`) and one for
//! the normal sensor (`b_s`). Squared amplitudes on a rejection set give the
//! utility factor; the cross terms give the attraction factor.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::json::{read_real, real, NumberFormat};
use crate::params::{check_probability, Calibration};

/// Squared-norm tolerance for coefficient rows.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Number of mind basis states `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MindSpace(usize);

impl MindSpace {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter {
                name: "K",
                value: 0.0,
                range: "K >= 1",
            });
        }
        Ok(MindSpace(k))
    }

    pub fn dim(self) -> usize {
        self.0
    }
}

/// Signed amplitudes of one prospect state over the mind basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow(Vec<f64>);

impl CoefficientRow {
    pub fn new(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::RowLength { got: 0, k: 1 });
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a * a).sum();
        if norm_sq.is_nan() || (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotUnitNorm { norm_sq });
        }
        Ok(CoefficientRow(amplitudes))
    }

    /// Unit amplitude on one index.
    pub fn one_hot(k: usize, index: usize) -> Result<Self> {
        if index >= k {
            return Err(Error::MindIndex { index, k });
        }
        let mut v = vec![0.0; k];
        v[index] = 1.0;
        Ok(CoefficientRow(v))
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.0[index] * self.0[index]
    }
}

/// Which mind indices carry the rejected mass and which one carries the
/// accepted mass in a synthesized row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisLayout {
    pub rejected: [usize; 2],
    pub accepted: usize,
}

impl SynthesisLayout {
    /// Rejected pair on the first two mind states, accepted mass on the third.
    pub const CANONICAL: SynthesisLayout = SynthesisLayout {
        rejected: [0, 1],
        accepted: 2,
    };
}

impl Default for SynthesisLayout {
    fn default() -> Self {
        SynthesisLayout::CANONICAL
    }
}

fn rejected_indices(row: &CoefficientRow, rejected: &[usize]) -> Result<Vec<usize>> {
    let k = row.k();
    let mut idx = rejected.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if let Some(&bad) = idx.iter().find(|&&i| i >= k) {
        return Err(Error::MindIndex { index: bad, k });
    }
    Ok(idx)
}

/// Squared mass of `row` on the rejected indices.
pub fn utility_factor(row: &CoefficientRow, rejected: &[usize]) -> Result<f64> {
    let idx = rejected_indices(row, rejected)?;
    Ok(idx.iter().map(|&i| row.weight(i)).sum())
}

/// Sum of `a_k a_k'` over ordered pairs `k != k'` inside the rejected set.
pub fn structural_attraction(row: &CoefficientRow, rejected: &[usize]) -> Result<f64> {
    let idx = rejected_indices(row, rejected)?;
    let amps = row.amplitudes();
    let mut total = 0.0;
    for (n, &i) in idx.iter().enumerate() {
        for &j in &idx[n + 1..] {
            total += 2.0 * amps[i] * amps[j];
        }
    }
    Ok(total)
}

/// Calibrated attraction `ζ · min{u, 1 − u}`.
pub fn calibrated_attraction(u: f64, zeta: f64) -> Result<f64> {
    check_probability("u", u)?;
    let zeta = Calibration::new(zeta)?.get();
    Ok(zeta * u.min(1.0 - u))
}

/// Closed-form row realizing a utility factor `u` and attraction factor `q`.
///
/// Amplitudes `(√(u+q) ± √(u−q))/2` go on the rejected pair and `√(1−u)` on
/// the accepted index, so that `r1² + r2² = u` and `2 r1 r2 = q`. An index at
/// or beyond `k` is allowed only if the amplitude it would carry is zero.
pub fn synthesize_coefficients(
    u: f64,
    q: f64,
    k: usize,
    layout: SynthesisLayout,
) -> Result<CoefficientRow> {
    check_probability("u", u)?;
    if !q.is_finite() || q.abs() > u + 1e-12 {
        return Err(Error::InfeasibleSynthesis { u, q });
    }
    let [first, second] = layout.rejected;
    if first == second || first == layout.accepted || second == layout.accepted {
        return Err(Error::SynthesisLayout {
            k,
            detail: format!("indices {:?} collide", layout),
        });
    }
    let plus = (u + q).max(0.0).sqrt();
    let minus = (u - q).max(0.0).sqrt();
    let r1 = (plus + minus) / 2.0;
    let r2 = (plus - minus) / 2.0;
    let accepted = (1.0 - u).max(0.0).sqrt();

    let mut amps = vec![0.0; k];
    for (index, value) in [(first, r1), (second, r2), (layout.accepted, accepted)] {
        if index < k {
            amps[index] = value;
        } else if value != 0.0 {
            return Err(Error::SynthesisLayout {
                k,
                detail: format!("index {index} would carry amplitude {value}"),
            });
        }
    }
    if k == 0 {
        return Err(Error::RowLength { got: 0, k: 1 });
    }
    CoefficientRow::new(amps)
}

/// Uniform superposition `1/√K` over all mind states.
pub fn uniform_prospect(k: usize) -> Result<CoefficientRow> {
    let k = MindSpace::new(k)?.dim();
    CoefficientRow::new(vec![1.0 / (k as f64).sqrt(); k])
}

/// The defender's coefficient matrices `a` (decoy) and `b` (normal), one row per signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProspectPlan {
    mind: MindSpace,
    signals: Vec<String>,
    a: Vec<CoefficientRow>,
    b: Vec<CoefficientRow>,
}

impl ProspectPlan {
    pub fn new(
        mind: MindSpace,
        signals: Vec<String>,
        a: Vec<CoefficientRow>,
        b: Vec<CoefficientRow>,
    ) -> Result<Self> {
        let n = signals.len();
        if a.len() != n {
            return Err(Error::MissingRow(a.len().min(n)));
        }
        if b.len() != n {
            return Err(Error::MissingRow(b.len().min(n)));
        }
        for row in a.iter().chain(&b) {
            if row.k() != mind.dim() {
                return Err(Error::RowLength {
                    got: row.k(),
                    k: mind.dim(),
                });
            }
        }
        Ok(ProspectPlan {
            mind,
            signals,
            a,
            b,
        })
    }

    /// Same row for both types on every signal.
    pub fn pooling(mind: MindSpace, signals: Vec<String>, row: CoefficientRow) -> Result<Self> {
        let n = signals.len();
        ProspectPlan::new(mind, signals, vec![row.clone(); n], vec![row; n])
    }

    pub fn mind(&self) -> MindSpace {
        self.mind
    }

    pub fn k(&self) -> usize {
        self.mind.dim()
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn a(&self, s: usize) -> &CoefficientRow {
        &self.a[s]
    }

    pub fn b(&self, s: usize) -> &CoefficientRow {
        &self.b[s]
    }

    pub fn a_rows(&self) -> &[CoefficientRow] {
        &self.a
    }

    pub fn b_rows(&self) -> &[CoefficientRow] {
        &self.b
    }

    pub(crate) fn ensure_signals(&self, signals: &[String]) -> Result<()> {
        if self.signals != signals {
            return Err(Error::PlanMismatch {
                plan: self.signals.clone(),
                model: signals.to_vec(),
            });
        }
        Ok(())
    }

    /// `{ "K": int, "signals": [...], "a": {signal: [..]}, "b": {signal: [..]} }`
    pub fn to_json(&self, fmt: NumberFormat) -> Value {
        let rows = |rows: &[CoefficientRow]| -> Value {
            let mut m = Map::new();
            for (s, row) in self.signals.iter().zip(rows) {
                m.insert(
                    s.clone(),
                    Value::Array(row.amplitudes().iter().map(|&x| real(x, fmt)).collect()),
                );
            }
            Value::Object(m)
        };
        let mut m = Map::new();
        m.insert("K".into(), Value::from(self.k()));
        m.insert(
            "signals".into(),
            Value::Array(self.signals.iter().cloned().map(Value::String).collect()),
        );
        m.insert("a".into(), rows(&self.a));
        m.insert("b".into(), rows(&self.b));
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let k = v
            .get("K")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Json("plan needs integer field \"K\"".into()))?
            as usize;
        let mind = MindSpace::new(k)?;
        let signals: Vec<String> = v
            .get("signals")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("plan needs array field \"signals\"".into()))?
            .iter()
            .map(|s| match s {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                other => Err(Error::Json(format!("bad signal identifier {other}"))),
            })
            .collect::<Result<_>>()?;
        let rows = |field: &str| -> Result<Vec<CoefficientRow>> {
            let obj = v
                .get(field)
                .and_then(Value::as_object)
                .ok_or_else(|| Error::Json(format!("plan needs object field {field:?}")))?;
            signals
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let arr = obj
                        .get(s)
                        .and_then(Value::as_array)
                        .ok_or(Error::MissingRow(i))?;
                    let amps = arr.iter().map(read_real).collect::<Result<Vec<_>>>()?;
                    CoefficientRow::new(amps)
                })
                .collect()
        };
        let (a, b) = (rows("a")?, rows("b")?);
        ProspectPlan::new(mind, signals, a, b)
    }
}

/// Real symmetric operator on the prospect space, stored as one `K×K` block
/// per signal (entries across distinct signals are zero).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    k: usize,
    blocks: Vec<Vec<f64>>,
}

impl BlockOperator {
    pub fn zeros(signals: usize, k: usize) -> Self {
        BlockOperator {
            k,
            blocks: vec![vec![0.0; k * k]; signals],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn signals(&self) -> usize {
        self.blocks.len()
    }

    /// Entry `((s, k), (s', k'))`.
    pub fn entry(&self, s: usize, k: usize, s2: usize, k2: usize) -> f64 {
        if s != s2 {
            0.0
        } else {
            self.blocks[s][k * self.k + k2]
        }
    }

    pub(crate) fn set(&mut self, s: usize, k: usize, k2: usize, value: f64) {
        self.blocks[s][k * self.k + k2] = value;
    }

    /// Row-major `K×K` block for one signal.
    pub fn block(&self, s: usize) -> &[f64] {
        &self.blocks[s]
    }

    pub fn trace(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (0..self.k).map(|i| b[i * self.k + i]).sum::<f64>())
            .sum()
    }

    /// Block-wise matrix product.
    pub fn compose(&self, other: &BlockOperator) -> BlockOperator {
        assert_eq!(self.k, other.k);
        assert_eq!(self.signals(), other.signals());
        let k = self.k;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| {
                let mut out = vec![0.0; k * k];
                for i in 0..k {
                    for j in 0..k {
                        out[i * k + j] = (0..k).map(|m| x[i * k + m] * y[m * k + j]).sum();
                    }
                }
                out
            })
            .collect();
        BlockOperator { k, blocks }
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let k = self.k;
        self.blocks
            .iter()
            .flat_map(|b| {
                (0..k).flat_map(move |i| (0..k).map(move |j| (b[i * k + j] - b[j * k + i]).abs()))
            })
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference to another operator of the same shape.
    pub fn max_abs_diff(&self, other: &BlockOperator) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// A trace-one mixed prospect state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(BlockOperator);

impl DensityOperator {
    pub fn operator(&self) -> &BlockOperator {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Diagonal entry `⟨s φ_k| ρ |s φ_k⟩`.
    pub fn diagonal(&self, s: usize, k: usize) -> f64 {
        self.0.entry(s, k, s, k)
    }
}

/// `ρ = Σ_s pmf(s) |Φ(s)⟩⟨Φ(s)|` with `|Φ(s)⟩` given by `rows[s]`.
pub fn assemble_density(pmf: &[f64], rows: &[CoefficientRow]) -> Result<DensityOperator> {
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > crate::signal::MASS_TOLERANCE {
        return Err(Error::MassDeficit {
            pmf: crate::error::Pmf::F1,
            sum: total,
            deficit: 1.0 - total,
        });
    }
    if rows.len() < pmf.len() {
        let missing = (rows.len()..pmf.len()).find(|&s| pmf[s] > 0.0);
        if let Some(s) = missing {
            return Err(Error::MissingRow(s));
        }
    }
    let k = rows.first().map(CoefficientRow::k).unwrap_or(1);
    let mut op = BlockOperator::zeros(pmf.len(), k);
    for (s, (&p, row)) in pmf.iter().zip(rows).enumerate() {
        if row.k() != k {
            return Err(Error::RowLength { got: row.k(), k });
        }
        let amps = row.amplitudes();
        for i in 0..k {
            for j in 0..k {
                op.set(s, i, j, p * (amps[i] * amps[j]));
            }
        }
    }
    Ok(DensityOperator(op))
}
