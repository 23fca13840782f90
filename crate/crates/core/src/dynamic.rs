//! Multi-stage travesty game.
//!
//! The defender keeps its type for the whole horizon. At every stage the
//! stage equilibrium is recomputed from the current belief, one outcome
//! `(s_j, k_j)` is drawn from the true type's prospect state, the attacker
//! decides with a cumulative likelihood-ratio test, and the belief is updated
//! by Bayes' rule.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`; stream 0
//! drives signal draws and stream 1 drives mind-state draws, so changing how
//! one is consumed never shifts the other.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::equilibrium::{compute_tau, decoy_utility, solve_static};
use crate::error::{Error, Result};
use crate::json::{real, NumberFormat};
use crate::params::{Calibration, Tolerance};
use crate::prospect::{
    calibrated_attraction, synthesize_coefficients, CoefficientRow, MindSpace, ProspectPlan,
    SynthesisLayout,
};
use crate::receiver::{posterior_update, Belief, Decision, Outcome, TIE_TOLERANCE};
use crate::signal::SignalModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisType {
    /// H1
    Decoy,
    /// H0
    Normal,
}

/// How the normal sensor's utility factor is set at each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum U0Convention {
    /// `u0 ≡ 0`, matching the static equilibrium.
    #[default]
    Static,
    /// `u0 = 1` wherever `τ_s <= 1`, else 0.
    DynamicPaper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub horizon: usize,
    pub true_type: HypothesisType,
    pub beta_schedule: Vec<Tolerance>,
    pub zeta: Calibration,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
    pub u0_convention: U0Convention,
}

impl GameConfig {
    /// Constant-β schedule with the static `u0` convention.
    pub fn constant(
        horizon: usize,
        true_type: HypothesisType,
        beta: Tolerance,
        zeta: Calibration,
        k: usize,
        seed: u64,
    ) -> Self {
        GameConfig {
            horizon,
            true_type,
            beta_schedule: vec![beta; horizon],
            zeta,
            k,
            seed,
            u0_convention: U0Convention::Static,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Parameter {
                name: "horizon",
                value: 0.0,
                range: "N >= 1",
            });
        }
        if self.beta_schedule.len() != self.horizon {
            return Err(Error::Parameter {
                name: "beta schedule length",
                value: self.beta_schedule.len() as f64,
                range: "equal to the horizon",
            });
        }
        if self.k < 3 {
            return Err(Error::Parameter {
                name: "K",
                value: self.k as f64,
                range: "K >= 3",
            });
        }
        Ok(())
    }
}

/// Defender strategy for one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageStrategy {
    pub tau: Vec<f64>,
    pub u1: Vec<f64>,
    pub u0: Vec<f64>,
    pub q1: Vec<f64>,
    pub q0: Vec<f64>,
    pub plan: ProspectPlan,
}

pub fn stage_equilibrium(
    belief: &Belief,
    beta: Tolerance,
    zeta: Calibration,
    k: usize,
    model: &SignalModel,
    convention: U0Convention,
) -> Result<StageStrategy> {
    match convention {
        U0Convention::Static => {
            let sol = solve_static(belief, beta, zeta, k, model)?;
            Ok(StageStrategy {
                tau: sol.tau,
                u1: sol.u1,
                u0: sol.u0,
                q1: sol.q1,
                q0: sol.q0,
                plan: sol.plan,
            })
        }
        U0Convention::DynamicPaper => {
            if k < 3 {
                return Err(Error::Parameter {
                    name: "K",
                    value: k as f64,
                    range: "K >= 3",
                });
            }
            let tau = compute_tau(belief, beta, model)?;
            let layout = SynthesisLayout::CANONICAL;
            let n = tau.len();
            let (mut u1, mut u0, mut q1, mut q0) =
                (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for (s, &t) in tau.iter().enumerate() {
                u1[s] = decoy_utility(t);
                u0[s] = if t > 1.0 { 0.0 } else { 1.0 };
                q1[s] = calibrated_attraction(u1[s], zeta.get())?;
                q0[s] = calibrated_attraction(u0[s], zeta.get())?;
                a.push(synthesize_coefficients(u1[s], q1[s], k, layout)?);
                b.push(synthesize_coefficients(u0[s], q0[s], k, layout)?);
            }
            let plan = ProspectPlan::new(MindSpace::new(k)?, model.signals().to_vec(), a, b)?;
            Ok(StageStrategy {
                tau,
                u1,
                u0,
                q1,
                q0,
                plan,
            })
        }
    }
}

/// Independent random streams for one simulation.
#[derive(Debug, Clone)]
pub struct GameRng {
    pub signals: ChaCha8Rng,
    pub minds: ChaCha8Rng,
}

impl GameRng {
    pub fn new(seed: u64) -> Self {
        let mut signals = ChaCha8Rng::seed_from_u64(seed);
        signals.set_stream(0);
        let mut minds = ChaCha8Rng::seed_from_u64(seed);
        minds.set_stream(1);
        GameRng { signals, minds }
    }
}

fn inverse_cdf(weights: impl Iterator<Item = f64> + Clone, x: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.enumerate() {
        if w <= 0.0 {
            continue;
        }
        last_positive = i;
        acc += w;
        if x < acc {
            return i;
        }
    }
    last_positive
}

/// Draw a signal from `f1` (decoy) or `f0` (normal).
pub fn sample_signal<R: Rng + ?Sized>(
    model: &SignalModel,
    true_type: HypothesisType,
    rng: &mut R,
) -> usize {
    let pmf = match true_type {
        HypothesisType::Decoy => model.f1(),
        HypothesisType::Normal => model.f0(),
    };
    inverse_cdf(pmf.iter().copied(), rng.gen::<f64>())
}

/// Draw a mind index with probability equal to its squared amplitude.
pub fn sample_mind<R: Rng + ?Sized>(row: &CoefficientRow, rng: &mut R) -> usize {
    let x = rng.gen::<f64>();
    inverse_cdf((0..row.k()).map(|m| row.weight(m)), x)
}

/// One observed outcome together with the rows that generated it.
#[derive(Debug, Clone, Copy)]
pub struct HistoryStep<'a> {
    pub outcome: Outcome,
    pub a: &'a CoefficientRow,
    pub b: &'a CoefficientRow,
}

/// `∏_t f1(s_t) a²(s_t,k_t) / (f0(s_t) b²(s_t,k_t))`.
///
/// Empty history gives 1. Any factor with a vanishing denominator and a
/// positive numerator makes the product `+inf`; a vanishing numerator makes
/// its factor 0.
pub fn cumulative_llr(history: &[HistoryStep<'_>], model: &SignalModel) -> f64 {
    let mut product = 1.0;
    for step in history {
        let Outcome { signal, mind } = step.outcome;
        let num = model.f1()[signal] * step.a.weight(mind);
        let den = model.f0()[signal] * step.b.weight(mind);
        if num == 0.0 {
            product = 0.0;
        } else if den == 0.0 {
            return f64::INFINITY;
        } else {
            product *= num / den;
        }
    }
    product
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    /// 1-based stage index.
    pub stage: usize,
    pub beta: Tolerance,
    pub signal: usize,
    pub mind_index: usize,
    pub tau: Vec<f64>,
    pub u1: Vec<f64>,
    pub u0: Vec<f64>,
    pub q1: Vec<f64>,
    pub belief_before: Belief,
    pub belief_after: Belief,
    pub decision: Decision,
    pub cumulative_ratio: f64,
    pub cumulative_threshold: f64,
    pub plan: ProspectPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameTrace {
    pub config: GameConfig,
    pub belief0: Belief,
    pub signals: Vec<String>,
    pub stages: Vec<StageRecord>,
    /// Set when a stage could not be completed.
    pub aborted: Option<String>,
}

impl GameTrace {
    pub fn final_belief(&self) -> Belief {
        self.stages
            .last()
            .map(|r| r.belief_after)
            .unwrap_or(self.belief0)
    }

    /// Metadata line followed by one line per stage (and one abort line if any).
    pub fn to_jsonl(&self, fmt: NumberFormat) -> String {
        let mut out = String::new();
        let header = json!({
            "kind": "metadata",
            "config": {
                "horizon": self.config.horizon,
                "true_type": self.config.true_type,
                "beta_schedule": self.config.beta_schedule.iter().map(|b| real(b.get(), fmt)).collect::<Vec<_>>(),
                "zeta": real(self.config.zeta.get(), fmt),
                "K": self.config.k,
                "seed": self.config.seed,
                "u0_convention": self.config.u0_convention,
            },
            "belief0": self.belief0.to_json(fmt),
            "signals": self.signals,
            "rng": "ChaCha8 seed_from_u64(seed); stream 0 = signals, stream 1 = mind indices",
            "stage_threshold_belief": "current",
            "cumulative_threshold_belief": "initial",
        });
        out.push_str(&header.to_string());
        out.push('\n');
        for r in &self.stages {
            out.push_str(&r.to_json(&self.signals, fmt).to_string());
            out.push('\n');
        }
        if let Some(reason) = &self.aborted {
            out.push_str(&json!({ "kind": "abort", "reason": reason }).to_string());
            out.push('\n');
        }
        out
    }
}

impl StageRecord {
    pub fn to_json(&self, signals: &[String], fmt: NumberFormat) -> Value {
        let per_signal = |values: &[f64]| -> Value {
            let mut m = Map::new();
            for (s, &v) in signals.iter().zip(values) {
                m.insert(s.clone(), real(v, fmt));
            }
            Value::Object(m)
        };
        let row = |r: &CoefficientRow| {
            Value::Array(r.amplitudes().iter().map(|&x| real(x, fmt)).collect())
        };
        json!({
            "kind": "stage",
            "stage": self.stage,
            "beta": real(self.beta.get(), fmt),
            "signal": signals[self.signal],
            "mind_index": self.mind_index,
            "tau": per_signal(&self.tau),
            "u1": per_signal(&self.u1),
            "u0": per_signal(&self.u0),
            "q1": per_signal(&self.q1),
            "belief_before": self.belief_before.to_json(fmt),
            "belief_after": self.belief_after.to_json(fmt),
            "decision": self.decision.as_u8(),
            "cumulative_ratio": real(self.cumulative_ratio, fmt),
            "cumulative_threshold": real(self.cumulative_threshold, fmt),
            "a": row(self.plan.a(self.signal)),
            "b": row(self.plan.b(self.signal)),
        })
    }
}

/// Play the multi-stage game for `config.horizon` stages.
pub fn simulate(config: &GameConfig, model: &SignalModel, belief0: Belief) -> Result<GameTrace> {
    config.validate()?;
    let mut rng = GameRng::new(config.seed);
    let mut trace = GameTrace {
        config: config.clone(),
        belief0,
        signals: model.signals().to_vec(),
        stages: Vec::with_capacity(config.horizon),
        aborted: None,
    };
    let mut belief = belief0;
    for (j, &beta) in config.beta_schedule.iter().enumerate() {
        let stage = match stage_equilibrium(
            &belief,
            beta,
            config.zeta,
            config.k,
            model,
            config.u0_convention,
        ) {
            Ok(stage) => stage,
            Err(e) => {
                trace.aborted = Some(format!("stage {}: {e}", j + 1));
                break;
            }
        };
        let signal = sample_signal(model, config.true_type, &mut rng.signals);
        let row = match config.true_type {
            HypothesisType::Decoy => stage.plan.a(signal),
            HypothesisType::Normal => stage.plan.b(signal),
        };
        let mind = sample_mind(row, &mut rng.minds);
        let outcome = Outcome::new(signal, mind);

        let cumulative_ratio = {
            let mut history: Vec<HistoryStep<'_>> = trace
                .stages
                .iter()
                .map(|r| HistoryStep {
                    outcome: Outcome::new(r.signal, r.mind_index),
                    a: r.plan.a(r.signal),
                    b: r.plan.b(r.signal),
                })
                .collect();
            history.push(HistoryStep {
                outcome,
                a: stage.plan.a(signal),
                b: stage.plan.b(signal),
            });
            cumulative_llr(&history, model)
        };
        let cumulative_threshold = belief0.threshold(beta);
        let decision = if cumulative_ratio > cumulative_threshold * (1.0 + TIE_TOLERANCE) {
            Decision::Reject
        } else {
            Decision::Accept
        };

        let belief_after = match posterior_update(&belief, &stage.plan, model, outcome) {
            Ok(b) => b,
            Err(e) => {
                trace.aborted = Some(format!("stage {}: {e}", j + 1));
                break;
            }
        };
        trace.stages.push(StageRecord {
            stage: j + 1,
            beta,
            signal,
            mind_index: mind,
            tau: stage.tau,
            u1: stage.u1,
            u0: stage.u0,
            q1: stage.q1,
            belief_before: belief,
            belief_after,
            decision,
            cumulative_ratio,
            cumulative_threshold,
            plan: stage.plan,
        });
        belief = belief_after;
    }
    Ok(trace)
}
