use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use travesty_core::{Calibration, HypothesisType, Tolerance, U0Convention};

#[derive(Debug, Parser)]
#[command(
    name = "travesty",
    version,
    about = "Solve, sweep and simulate the honeypot travesty signaling game"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Static equilibrium as JSON.
    Solve(SolveArgs),
    /// β × ζ sweep of detection rates as CSV.
    Roc(RocArgs),
    /// Multi-stage game trace as JSON lines.
    Simulate(SimulateArgs),
    /// Estimate a signal model from connection records.
    Ingest(IngestArgs),
    /// Attacker best response to a prospect plan read from JSON.
    Respond(RespondArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Decoy probability of signal 1.
    #[arg(long, default_value_t = 0.008, value_parser = probability, conflicts_with = "model_csv")]
    pub theta1: f64,
    /// Normal-sensor probability of signal 1.
    #[arg(long, default_value_t = 0.719, value_parser = probability, conflicts_with = "model_csv")]
    pub theta0: f64,
    /// Signal model as a `signal,f1,f0` CSV file.
    #[arg(long)]
    pub model_csv: Option<PathBuf>,
    /// Prior probability that the sensor is a decoy.
    #[arg(long, default_value_t = 0.802, value_parser = probability)]
    pub ph1: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory for output files; stdout is used when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the resolved configuration and write nothing.
    #[arg(long)]
    pub dry_run: bool,
    /// Write reals as full-precision decimal strings.
    #[arg(long)]
    pub full_precision: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "0.4", value_parser = tolerance)]
    pub beta: Tolerance,
    #[arg(long, default_value = "0.2", value_parser = calibration)]
    pub zeta: Calibration,
    /// Number of mind states.
    #[arg(long = "K", default_value_t = 4, value_parser = clap::value_parser!(u32).range(3..))]
    pub k: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "0.01:0.99:0.01", value_parser = beta_grid)]
    pub beta_grid: BetaGrid,
    /// Comma-separated calibration values.
    #[arg(long, default_value = "0.05,0.2,0.5", value_delimiter = ',', value_parser = calibration)]
    pub zeta: Vec<Calibration>,
    /// Also write `roc.svg`.
    #[arg(long, requires = "out")]
    pub plot: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "0.4", value_parser = tolerance)]
    pub beta: Tolerance,
    #[arg(long, default_value = "0.5", value_parser = calibration)]
    pub zeta: Calibration,
    #[arg(long = "K", default_value_t = 4, value_parser = clap::value_parser!(u32).range(3..))]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    pub horizon: u32,
    #[arg(long, value_enum, default_value_t = TrueType::Decoy)]
    pub true_type: TrueType,
    #[arg(long, value_enum, default_value_t = Convention::Static)]
    pub u0_convention: Convention,
    /// Also write `trajectory.svg`.
    #[arg(long, requires = "out")]
    pub plot: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Connection-record file, plain or gzip.
    pub input: PathBuf,
    #[arg(long, default_value_t = travesty_core::ingest::KDD_LABEL_COLUMN)]
    pub label_col: usize,
    #[arg(long, default_value_t = travesty_core::ingest::KDD_LOGIN_COLUMN)]
    pub login_col: usize,
    #[arg(long, default_value = ",", value_parser = delimiter)]
    pub delimiter: u8,
    /// Fail on the first malformed row instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RespondArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "0.4", value_parser = tolerance)]
    pub beta: Tolerance,
    /// Plan JSON as written by `solve`.
    #[arg(long)]
    pub plan: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrueType {
    Decoy,
    Normal,
}

impl From<TrueType> for HypothesisType {
    fn from(t: TrueType) -> Self {
        match t {
            TrueType::Decoy => HypothesisType::Decoy,
            TrueType::Normal => HypothesisType::Normal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Static,
    DynamicPaper,
}

impl From<Convention> for U0Convention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Static => U0Convention::Static,
            Convention::DynamicPaper => U0Convention::DynamicPaper,
        }
    }
}

/// Parsed `--beta-grid`, keeping the text it came from.
#[derive(Debug, Clone)]
pub struct BetaGrid {
    pub text: String,
    pub values: Vec<Tolerance>,
}

fn real(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("{s:?} is not a number"))
}

fn probability(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn tolerance(s: &str) -> Result<Tolerance, String> {
    Tolerance::new(real(s)?).map_err(|e| e.to_string())
}

fn calibration(s: &str) -> Result<Calibration, String> {
    Calibration::new(real(s)?).map_err(|e| e.to_string())
}

fn delimiter(s: &str) -> Result<u8, String> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be one ASCII character, got {s:?}")),
    }
}

/// Inclusive of `start`; `stop` is included when the last step lands on it
/// up to floating-point noise. Values are rounded to 12 decimals.
fn beta_grid(s: &str) -> Result<BetaGrid, String> {
    let raw: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(real).collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(format!("expected start:stop:step, got {s:?}"));
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(format!("empty grid {s:?}"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        s.split(',').map(real).collect::<Result<_, _>>()?
    };
    let values = raw
        .into_iter()
        .map(|b| Tolerance::new(b).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BetaGrid {
        text: s.to_string(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_cardinality() {
        let g = beta_grid("0.01:0.99:0.01").unwrap();
        assert_eq!(g.values.len(), 99);
        assert_eq!(g.values[5].get(), 0.06);
        assert_eq!(g.values.last().unwrap().get(), 0.99);
        assert_eq!(beta_grid("0.1:0.5:0.2").unwrap().values.len(), 3);
        assert_eq!(beta_grid("0.1,0.3").unwrap().values.len(), 2);
    }

    #[test]
    fn grid_rejects_out_of_range() {
        assert!(beta_grid("0.0:0.5:0.1").is_err());
        assert!(beta_grid("0.5:0.1:0.1").is_err());
        assert!(beta_grid("0.2,1.2").is_err());
        assert!(beta_grid("0.1:0.2").is_err());
    }

    #[test]
    fn delimiters() {
        assert_eq!(delimiter("\\t").unwrap(), b'\t');
        assert_eq!(delimiter(";").unwrap(), b';');
        assert!(delimiter("ab").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
