//! Connection-record ingestion (KDD Cup 1999 layout) and estimation of the
//! prior belief and login-outcome signal model.
//!
//! All attack traffic is attributed to decoys and all normal traffic to
//! normal sensors. The signal alphabet is `{0, 1}` with `0 = login success`
//! and `1 = login failure`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::receiver::Belief;
use crate::signal::SignalModel;

/// Column of the class label in the 42-field KDD record (0-based).
pub const KDD_LABEL_COLUMN: usize = 41;
/// Column of the `logged_in` flag in the 42-field KDD record (0-based).
pub const KDD_LOGIN_COLUMN: usize = 11;
pub const KDD_NORMAL_LABEL: &str = "normal.";

/// Reference figures for the honeypot case study.
pub mod case_study {
    pub const TOTAL_RECORDS: u64 = 494_021;
    pub const ATTACK_RECORDS: u64 = 396_093;
    pub const NORMAL_RECORDS: u64 = 97_928;
    pub const ATTACK_LOGIN_SUCCESS: u64 = 3_298;
    pub const NORMAL_LOGIN_SUCCESS: u64 = 69_939;
    /// Rounded Bernoulli parameters of the case-study preset, `f1(1)` and `f0(1)`.
    pub const THETA1: f64 = 0.008;
    pub const THETA0: f64 = 0.719;
    pub const P_H1: f64 = 0.802;
    pub const BETA: f64 = 0.4;
    pub const ZETA: f64 = 0.2;
    pub const MIND_STATES: usize = 4;
    pub const HORIZON: usize = 30;
    pub const DYNAMIC_ZETA: f64 = 0.5;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficSchema {
    pub label_column: usize,
    pub login_column: usize,
    pub delimiter: u8,
    pub normal_labels: BTreeSet<String>,
    /// `None`: every label outside `normal_labels` counts as an attack.
    pub attack_labels: Option<BTreeSet<String>>,
    /// Fail on the first malformed row instead of skipping it.
    pub strict: bool,
}

impl Default for TrafficSchema {
    fn default() -> Self {
        TrafficSchema {
            label_column: KDD_LABEL_COLUMN,
            login_column: KDD_LOGIN_COLUMN,
            delimiter: b',',
            normal_labels: BTreeSet::from([KDD_NORMAL_LABEL.to_string()]),
            attack_labels: None,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TrafficSummary {
    pub total_records: u64,
    pub attack_records: u64,
    pub normal_records: u64,
    pub attack_login_success: u64,
    pub normal_login_success: u64,
    /// Rows dropped in lenient mode.
    pub skipped: u64,
}

impl TrafficSummary {
    /// Combine counts from two shards.
    pub fn merge(self, other: TrafficSummary) -> TrafficSummary {
        TrafficSummary {
            total_records: self.total_records + other.total_records,
            attack_records: self.attack_records + other.attack_records,
            normal_records: self.normal_records + other.normal_records,
            attack_login_success: self.attack_login_success + other.attack_login_success,
            normal_login_success: self.normal_login_success + other.normal_login_success,
            skipped: self.skipped + other.skipped,
        }
    }
}

enum RowClass {
    Attack,
    Normal,
}

fn classify(schema: &TrafficSchema, label: &str) -> Option<RowClass> {
    if schema.normal_labels.contains(label) {
        return Some(RowClass::Normal);
    }
    match &schema.attack_labels {
        None => Some(RowClass::Attack),
        Some(set) if set.contains(label) => Some(RowClass::Attack),
        Some(_) => None,
    }
}

/// Count records in one pass over delimiter-separated text without a header.
pub fn parse_records<R: BufRead>(input: R, schema: &TrafficSchema) -> Result<TrafficSummary> {
    let mut summary = TrafficSummary::default();
    let delimiter = schema.delimiter as char;
    let needed = schema.label_column.max(schema.login_column) + 1;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(delimiter).collect();
        let row = (|| {
            if fields.len() < needed {
                return Err(format!(
                    "expected at least {needed} fields, found {}",
                    fields.len()
                ));
            }
            let login = match fields[schema.login_column].trim() {
                "0" => false,
                "1" => true,
                other => return Err(format!("login field {other:?} is not 0 or 1")),
            };
            let label = fields[schema.label_column].trim();
            let class = classify(schema, label)
                .ok_or_else(|| format!("label {label:?} is neither normal nor a listed attack"))?;
            Ok((class, login))
        })();
        match row {
            Ok((RowClass::Attack, login)) => {
                summary.attack_records += 1;
                summary.attack_login_success += login as u64;
            }
            Ok((RowClass::Normal, login)) => {
                summary.normal_records += 1;
                summary.normal_login_success += login as u64;
            }
            Err(reason) if schema.strict => {
                return Err(Error::Parse {
                    line: line_no,
                    reason,
                })
            }
            Err(_) => {
                summary.skipped += 1;
                continue;
            }
        }
        summary.total_records += 1;
    }
    if summary.total_records == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(summary)
}

/// Open a traffic file, transparently decompressing gzip input.
pub fn open_traffic(path: &Path) -> Result<Box<dyn BufRead>> {
    decompress_if_gzip(File::open(path)?)
}

/// Wrap a reader, decompressing it if it starts with the gzip magic bytes.
pub fn decompress_if_gzip<R: Read + 'static>(reader: R) -> Result<Box<dyn BufRead>> {
    let mut buffered = BufReader::new(reader);
    let magic = buffered.fill_buf()?;
    if magic.starts_with(&[0x1f, 0x8b]) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(buffered))))
    } else {
        Ok(Box::new(buffered))
    }
}

/// Prior `p(H1)` and the login-outcome model implied by the counts.
pub fn estimate_model(summary: &TrafficSummary) -> Result<(Belief, SignalModel)> {
    if summary.attack_records == 0 {
        return Err(Error::EmptyClass("attack"));
    }
    if summary.normal_records == 0 {
        return Err(Error::EmptyClass("normal"));
    }
    let total = summary.attack_records + summary.normal_records;
    let belief = Belief::new(summary.attack_records as f64 / total as f64)?;
    let rate = |hits: u64, n: u64| (hits as f64 / n as f64, (n - hits) as f64 / n as f64);
    let (a_ok, a_fail) = rate(summary.attack_login_success, summary.attack_records);
    let (n_ok, n_fail) = rate(summary.normal_login_success, summary.normal_records);
    let model = SignalModel::new(
        vec!["0".into(), "1".into()],
        vec![a_ok, a_fail],
        vec![n_ok, n_fail],
    )?;
    Ok((belief, model))
}

/// Estimated rates next to the rounded preset parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PresetComparison {
    pub p_h1_estimated: f64,
    pub p_h1_preset: f64,
    pub attack_success_rate: f64,
    pub normal_success_rate: f64,
    pub theta1_preset: f64,
    pub theta0_preset: f64,
    /// `|normal_success_rate − θ0|`; about 0.0048 on the case-study counts.
    pub theta0_gap: f64,
    pub theta1_gap: f64,
}

pub fn compare_with_preset(summary: &TrafficSummary) -> Result<PresetComparison> {
    let (belief, model) = estimate_model(summary)?;
    let attack = model.f1()[0];
    let normal = model.f0()[0];
    Ok(PresetComparison {
        p_h1_estimated: belief.p_h1(),
        p_h1_preset: case_study::P_H1,
        attack_success_rate: attack,
        normal_success_rate: normal,
        theta1_preset: case_study::THETA1,
        theta0_preset: case_study::THETA0,
        theta0_gap: (normal - case_study::THETA0).abs(),
        theta1_gap: (attack - case_study::THETA1).abs(),
    })
}
