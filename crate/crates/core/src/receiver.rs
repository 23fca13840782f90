//! The attacker's side of the game: Bayesian beliefs over the defender's type,
//! the quantum likelihood-ratio decision rule and its rejection region.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::json::{real, NumberFormat};
use crate::params::{check_probability, Tolerance};
use crate::prospect::{BlockOperator, ProspectPlan};
use crate::signal::SignalModel;

/// Normalization tolerance for beliefs.
pub const BELIEF_TOLERANCE: f64 = 1e-12;

/// Relative slack under which the two sides of the rejection inequality count
/// as tied. Ties are accepted.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Probability pair over the defender's type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    #[serde(rename = "pH1")]
    p_h1: f64,
    #[serde(rename = "pH0")]
    p_h0: f64,
}

impl Belief {
    /// Belief with `p(H1) = p_h1` and `p(H0) = 1 − p_h1`.
    pub fn new(p_h1: f64) -> Result<Self> {
        check_probability("pH1", p_h1)?;
        Ok(Belief {
            p_h1,
            p_h0: 1.0 - p_h1,
        })
    }

    pub fn from_pair(p_h1: f64, p_h0: f64) -> Result<Self> {
        check_probability("pH1", p_h1)?;
        check_probability("pH0", p_h0)?;
        if (p_h1 + p_h0 - 1.0).abs() > BELIEF_TOLERANCE {
            return Err(Error::Parameter {
                name: "pH1 + pH0",
                value: p_h1 + p_h0,
                range: "1 ± 1e-12",
            });
        }
        Ok(Belief { p_h1, p_h0 })
    }

    pub fn p_h1(&self) -> f64 {
        self.p_h1
    }

    pub fn p_h0(&self) -> f64 {
        self.p_h0
    }

    /// Neyman–Pearson threshold `T = (1/β − 1) · p(H0)/p(H1)` on the likelihood ratio.
    pub fn threshold(&self, beta: Tolerance) -> f64 {
        if self.p_h1 == 0.0 {
            f64::INFINITY
        } else {
            beta.odds_factor() * self.p_h0 / self.p_h1
        }
    }

    pub fn to_json(&self, fmt: NumberFormat) -> Value {
        let mut m = Map::new();
        m.insert("pH1".into(), real(self.p_h1, fmt));
        m.insert("pH0".into(), real(self.p_h0, fmt));
        Value::Object(m)
    }
}

/// A basis element `|s φ_k⟩` observed by the attacker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub signal: usize,
    pub mind: usize,
}

impl Outcome {
    pub fn new(signal: usize, mind: usize) -> Self {
        Outcome { signal, mind }
    }
}

/// The attacker's action on one outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    /// Access the sensor (δ = 0).
    Accept,
    /// Treat as a decoy and stay away (δ = 1).
    Reject,
}

impl Decision {
    pub fn as_u8(self) -> u8 {
        match self {
            Decision::Accept => 0,
            Decision::Reject => 1,
        }
    }
}

/// Deterministic decision rule: the set of rejected outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    pub beta: Tolerance,
    pub rejected: BTreeSet<Outcome>,
}

impl DecisionRule {
    pub fn rejects(&self, outcome: Outcome) -> bool {
        self.rejected.contains(&outcome)
    }

    /// Rejected mind indices at one signal.
    pub fn rejected_minds(&self, signal: usize) -> Vec<usize> {
        self.rejected
            .range(Outcome::new(signal, 0)..Outcome::new(signal + 1, 0))
            .map(|o| o.mind)
            .collect()
    }

    /// Signals with at least one rejected mind state.
    pub fn rejected_signals(&self) -> BTreeSet<usize> {
        self.rejected.iter().map(|o| o.signal).collect()
    }

    /// `{"beta": real, "rejected": [[signal, k], ...]}` with 0-based `k`.
    pub fn to_json(&self, signals: &[String], fmt: NumberFormat) -> Value {
        let mut m = Map::new();
        m.insert("beta".into(), real(self.beta.get(), fmt));
        m.insert(
            "rejected".into(),
            Value::Array(
                self.rejected
                    .iter()
                    .map(|o| {
                        Value::Array(vec![
                            Value::String(signals[o.signal].clone()),
                            Value::from(o.mind),
                        ])
                    })
                    .collect(),
            ),
        );
        Value::Object(m)
    }
}

fn check_outcome(model: &SignalModel, plan: &ProspectPlan, outcome: Outcome) -> Result<()> {
    plan.ensure_signals(model.signals())?;
    if outcome.signal >= model.len() {
        return Err(Error::SignalIndex {
            index: outcome.signal,
            len: model.len(),
        });
    }
    if outcome.mind >= plan.k() {
        return Err(Error::MindIndex {
            index: outcome.mind,
            k: plan.k(),
        });
    }
    Ok(())
}

/// Joint weights `(p(H1) f1(s) a²_sk, p(H0) f0(s) b²_sk)` of an outcome.
pub fn outcome_weights(
    belief: &Belief,
    model: &SignalModel,
    plan: &ProspectPlan,
    o: Outcome,
) -> (f64, f64) {
    (
        belief.p_h1 * model.f1()[o.signal] * plan.a(o.signal).weight(o.mind),
        belief.p_h0 * model.f0()[o.signal] * plan.b(o.signal).weight(o.mind),
    )
}

/// Bayes update of the type belief after observing `outcome`.
pub fn posterior_update(
    belief: &Belief,
    plan: &ProspectPlan,
    model: &SignalModel,
    outcome: Outcome,
) -> Result<Belief> {
    check_outcome(model, plan, outcome)?;
    let (w1, w0) = outcome_weights(belief, model, plan, outcome);
    let total = w1 + w0;
    if total <= 0.0 {
        return Err(Error::UndefinedPosterior {
            signal: outcome.signal,
            mind: outcome.mind,
        });
    }
    let p_h1 = w1 / total;
    Ok(Belief {
        p_h1,
        p_h0: w0 / total,
    })
}

/// Core rejection test on the two joint weights.
///
/// Rejecting is allowed iff the posterior false-alarm probability stays below
/// β, i.e. `β · w1 > (1 − β) · w0`; this is `f1 a² > T f0 b²` cleared of the
/// division by `p(H1)` and by `b²`.
pub(crate) fn rejects_weights(beta: Tolerance, w1: f64, w0: f64) -> bool {
    let lhs = beta.get() * w1;
    let rhs = (1.0 - beta.get()) * w0;
    lhs - rhs > TIE_TOLERANCE * lhs.max(rhs)
}

/// Quantum likelihood-ratio decision on one outcome.
pub fn qlrt_decide(
    belief: &Belief,
    beta: Tolerance,
    model: &SignalModel,
    plan: &ProspectPlan,
    outcome: Outcome,
) -> Result<Decision> {
    check_outcome(model, plan, outcome)?;
    let (w1, w0) = outcome_weights(belief, model, plan, outcome);
    Ok(if rejects_weights(beta, w1, w0) {
        Decision::Reject
    } else {
        Decision::Accept
    })
}

/// The attacker's best response: reject exactly where the QLRT says so.
pub fn best_response(
    belief: &Belief,
    beta: Tolerance,
    model: &SignalModel,
    plan: &ProspectPlan,
) -> Result<DecisionRule> {
    plan.ensure_signals(model.signals())?;
    let mut rejected = BTreeSet::new();
    for s in 0..model.len() {
        for k in 0..plan.k() {
            let o = Outcome::new(s, k);
            let (w1, w0) = outcome_weights(belief, model, plan, o);
            if rejects_weights(beta, w1, w0) {
                rejected.insert(o);
            }
        }
    }
    Ok(DecisionRule { beta, rejected })
}

/// Classical Neyman–Pearson test on a signal alone: `f1(s)/f0(s) > T`.
pub fn classical_rejects(belief: &Belief, beta: Tolerance, model: &SignalModel, s: usize) -> bool {
    rejects_weights(
        beta,
        belief.p_h1 * model.f1()[s],
        belief.p_h0 * model.f0()[s],
    )
}

/// Projector onto the rejection region: inside each signal block every entry
/// between rejected mind states equals `1/N_s`.
pub fn build_rejection_projector(
    rule: &DecisionRule,
    plan: &ProspectPlan,
) -> Result<BlockOperator> {
    let n = plan.signals().len();
    let mut op = BlockOperator::zeros(n, plan.k());
    for s in 0..n {
        let minds = rule.rejected_minds(s);
        if let Some(&bad) = minds.iter().find(|&&k| k >= plan.k()) {
            return Err(Error::MindIndex {
                index: bad,
                k: plan.k(),
            });
        }
        let weight = 1.0 / minds.len() as f64;
        for &i in &minds {
            for &j in &minds {
                op.set(s, i, j, weight);
            }
        }
    }
    if let Some(o) = rule.rejected.iter().find(|o| o.signal >= n) {
        return Err(Error::SignalIndex {
            index: o.signal,
            len: n,
        });
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prospect::{CoefficientRow, MindSpace};
    use approx::assert_abs_diff_eq;

    fn case_study() -> (SignalModel, Belief, Tolerance) {
        (
            SignalModel::bernoulli(0.008, 0.719).unwrap(),
            Belief::new(0.802).unwrap(),
            Tolerance::new(0.4).unwrap(),
        )
    }

    fn one_hot_plan(model: &SignalModel, k: usize, hot: usize) -> ProspectPlan {
        ProspectPlan::pooling(
            MindSpace::new(k).unwrap(),
            model.signals().to_vec(),
            CoefficientRow::one_hot(k, hot).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn belief_validation() {
        assert!(Belief::from_pair(0.5, 0.6).is_err());
        assert!(Belief::new(1.2).is_err());
        let b = Belief::from_pair(0.802, 0.198).unwrap();
        assert_abs_diff_eq!(
            b.threshold(Tolerance::new(0.4).unwrap()),
            0.370_324_189_5,
            epsilon = 1e-9
        );
    }

    #[test]
    fn posterior_case_study() {
        let (model, prior, _) = case_study();
        let plan = one_hot_plan(&model, 4, 2);
        let post = posterior_update(&prior, &plan, &model, Outcome::new(0, 2)).unwrap();
        // 0.802·0.992 / (0.802·0.992 + 0.198·0.281)
        assert_abs_diff_eq!(post.p_h1(), 0.795_584 / 0.851_222, epsilon = 1e-9);
        assert_abs_diff_eq!(post.p_h1(), 0.934_637_5, epsilon = 1e-7);
    }

    #[test]
    fn posterior_symmetric_is_prior() {
        let model = SignalModel::bernoulli(0.3, 0.3).unwrap();
        let prior = Belief::new(0.37).unwrap();
        let plan = ProspectPlan::pooling(
            MindSpace::new(4).unwrap(),
            model.signals().to_vec(),
            crate::prospect::uniform_prospect(4).unwrap(),
        )
        .unwrap();
        for s in 0..2 {
            for k in 0..4 {
                let post = posterior_update(&prior, &plan, &model, Outcome::new(s, k)).unwrap();
                assert_abs_diff_eq!(post.p_h1(), prior.p_h1(), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn posterior_certain_and_undefined() {
        let (model, prior, _) = case_study();
        let plan = ProspectPlan::new(
            MindSpace::new(3).unwrap(),
            model.signals().to_vec(),
            vec![CoefficientRow::one_hot(3, 0).unwrap(); 2],
            vec![CoefficientRow::one_hot(3, 2).unwrap(); 2],
        )
        .unwrap();
        assert_eq!(
            posterior_update(&prior, &plan, &model, Outcome::new(0, 0))
                .unwrap()
                .p_h1(),
            1.0
        );
        assert!(matches!(
            posterior_update(&prior, &plan, &model, Outcome::new(0, 1)),
            Err(Error::UndefinedPosterior { signal: 0, mind: 1 })
        ));
        assert!(posterior_update(&prior, &plan, &model, Outcome::new(0, 3)).is_err());
    }

    #[test]
    fn qlrt_case_study_rejects_success_signal() {
        let (model, prior, beta) = case_study();
        let plan = one_hot_plan(&model, 4, 2);
        assert_eq!(
            qlrt_decide(&prior, beta, &model, &plan, Outcome::new(0, 2)).unwrap(),
            Decision::Reject
        );
        assert_eq!(
            qlrt_decide(&prior, beta, &model, &plan, Outcome::new(1, 2)).unwrap(),
            Decision::Accept
        );
    }

    #[test]
    fn qlrt_tie_accepts() {
        // Uniform prior, β = 0.5: T = 1 and f1 = f0 gives exact equality.
        let model = SignalModel::bernoulli(0.25, 0.25).unwrap();
        let plan = one_hot_plan(&model, 3, 0);
        let d = qlrt_decide(
            &Belief::new(0.5).unwrap(),
            Tolerance::new(0.5).unwrap(),
            &model,
            &plan,
            Outcome::new(0, 0),
        )
        .unwrap();
        assert_eq!(d, Decision::Accept);
    }

    #[test]
    fn qlrt_rejects_when_normal_row_vanishes() {
        let (model, prior, _) = case_study();
        let plan = ProspectPlan::new(
            MindSpace::new(3).unwrap(),
            model.signals().to_vec(),
            vec![CoefficientRow::one_hot(3, 0).unwrap(); 2],
            vec![CoefficientRow::one_hot(3, 2).unwrap(); 2],
        )
        .unwrap();
        let beta = Tolerance::new(0.01).unwrap();
        assert_eq!(
            qlrt_decide(&prior, beta, &model, &plan, Outcome::new(1, 0)).unwrap(),
            Decision::Reject
        );
        // Unreachable outcome is never rejected.
        assert_eq!(
            qlrt_decide(&prior, beta, &model, &plan, Outcome::new(1, 1)).unwrap(),
            Decision::Accept
        );
    }

    #[test]
    fn best_response_extremes() {
        let (model, prior, _) = case_study();
        let plan = ProspectPlan::pooling(
            MindSpace::new(4).unwrap(),
            model.signals().to_vec(),
            crate::prospect::uniform_prospect(4).unwrap(),
        )
        .unwrap();
        let low = best_response(&prior, Tolerance::new(1e-12).unwrap(), &model, &plan).unwrap();
        assert!(low.rejected.is_empty());
        let high =
            best_response(&prior, Tolerance::new(1.0 - 1e-12).unwrap(), &model, &plan).unwrap();
        assert_eq!(high.rejected.len(), 8);
    }

    #[test]
    fn projector_blocks() {
        let model = SignalModel::bernoulli(0.2, 0.7).unwrap();
        let plan = one_hot_plan(&model, 4, 0);
        let beta = Tolerance::new(0.4).unwrap();
        let rule = DecisionRule {
            beta,
            rejected: [Outcome::new(0, 0), Outcome::new(0, 1), Outcome::new(1, 3)].into(),
        };
        let p = build_rejection_projector(&rule, &plan).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(p.entry(0, i, 0, j), 0.5);
        }
        assert_eq!(p.entry(1, 3, 1, 3), 1.0);
        assert_eq!(p.trace(), 2.0);
        assert_eq!(p.compose(&p).max_abs_diff(&p), 0.0);

        let empty = DecisionRule {
            beta,
            rejected: BTreeSet::new(),
        };
        assert_eq!(
            build_rejection_projector(&empty, &plan).unwrap().trace(),
            0.0
        );
    }

    #[test]
    fn decision_rule_json() {
        let rule = DecisionRule {
            beta: Tolerance::new(0.4).unwrap(),
            rejected: [Outcome::new(0, 1)].into(),
        };
        let v = rule.to_json(
            &["0".to_string(), "1".to_string()],
            NumberFormat::Significant,
        );
        assert_eq!(v.to_string(), r#"{"beta":0.4,"rejected":[["0",1]]}"#);
    }
}
