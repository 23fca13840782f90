//! Static perfect Bayesian equilibrium of the travesty game.
//!
//! Given a belief and tolerance, each signal gets a threshold
//! `τ_s = (1/β − 1) · p(H0) f0(s) / (p(H1) f1(s))`. Signals with `τ_s < 1`
//! fall in the classical rejection region; there the decoy can push at most
//! mass `τ_s` onto an accepted mind state, so its smallest achievable
//! rejected mass is `1 − τ_s`. Elsewhere the decoy is never rejected.

use std::collections::BTreeSet;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::json::{real, NumberFormat};
use crate::params::{Calibration, Tolerance};
use crate::prospect::{
    assemble_density, calibrated_attraction, synthesize_coefficients, CoefficientRow, MindSpace,
    ProspectPlan, SynthesisLayout,
};
use crate::receiver::{
    best_response, outcome_weights, posterior_update, rejects_weights, Belief, DecisionRule,
    Outcome,
};
use crate::signal::SignalModel;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub signals: Vec<String>,
    pub tau: Vec<f64>,
    pub u1: Vec<f64>,
    pub u0: Vec<f64>,
    pub q1: Vec<f64>,
    pub q0: Vec<f64>,
    pub classical_rejection: BTreeSet<usize>,
    pub plan: ProspectPlan,
    pub rule: DecisionRule,
    pub belief: Belief,
    pub beta: Tolerance,
    pub zeta: Calibration,
}

/// Per-signal thresholds `τ_s`; `+inf` where `f1(s) = 0`, `0` where only `f0(s)` vanishes.
pub fn compute_tau(belief: &Belief, beta: Tolerance, model: &SignalModel) -> Result<Vec<f64>> {
    if belief.p_h1() == 0.0 {
        return Err(Error::DegenerateBelief);
    }
    let factor = beta.odds_factor();
    Ok(model
        .f1()
        .iter()
        .zip(model.f0())
        .map(|(&f1, &f0)| {
            if f1 == 0.0 {
                f64::INFINITY
            } else if f0 == 0.0 {
                0.0
            } else {
                factor * (belief.p_h0() * f0) / (belief.p_h1() * f1)
            }
        })
        .collect())
}

/// Equilibrium utility factor of the decoy at threshold `tau`.
pub(crate) fn decoy_utility(tau: f64) -> f64 {
    if tau < 1.0 {
        1.0 - tau
    } else {
        0.0
    }
}

/// Solve the static game in closed form and synthesize the equilibrium plan.
pub fn solve_static(
    belief: &Belief,
    beta: Tolerance,
    zeta: Calibration,
    k: usize,
    model: &SignalModel,
) -> Result<EquilibriumSolution> {
    if k < 3 {
        return Err(Error::Parameter {
            name: "K",
            value: k as f64,
            range: "K >= 3",
        });
    }
    let mind = MindSpace::new(k)?;
    let layout = SynthesisLayout::CANONICAL;
    let tau = compute_tau(belief, beta, model)?;
    let n = model.len();

    let mut u1 = Vec::with_capacity(n);
    let mut q1 = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut classical_rejection = BTreeSet::new();
    let accepted = CoefficientRow::one_hot(k, layout.accepted)?;
    for (s, &t) in tau.iter().enumerate() {
        let u = decoy_utility(t);
        let q = calibrated_attraction(u, zeta.get())?;
        if t < 1.0 {
            classical_rejection.insert(s);
            let row = synthesize_coefficients(u, q, k, layout).map_err(|e| {
                Error::Inconsistent(format!("calibrated synthesis failed at signal {s}: {e}"))
            })?;
            // Place exactly τ on the accepted state; `1 − (1 − τ)` loses digits for small τ.
            let mut amps = row.amplitudes().to_vec();
            amps[layout.accepted] = t.sqrt();
            a.push(CoefficientRow::new(amps)?);
        } else {
            a.push(accepted.clone());
        }
        b.push(accepted.clone());
        u1.push(u);
        q1.push(q);
    }
    let plan = ProspectPlan::new(mind, model.signals().to_vec(), a, b)?;
    let rule = best_response(belief, beta, model, &plan)?;

    // The receiver must reject exactly the populated rejected-pair components.
    for s in 0..n {
        let expected: Vec<usize> = if classical_rejection.contains(&s) {
            layout
                .rejected
                .iter()
                .copied()
                .filter(|&m| model.f1()[s] > 0.0 && plan.a(s).weight(m) > 0.0)
                .collect()
        } else {
            Vec::new()
        };
        let mut expected = expected;
        expected.sort_unstable();
        if rule.rejected_minds(s) != expected {
            return Err(Error::Inconsistent(format!(
                "best response rejects {:?} at signal {s}, plan expects {:?}",
                rule.rejected_minds(s),
                expected
            )));
        }
    }

    Ok(EquilibriumSolution {
        signals: model.signals().to_vec(),
        tau,
        u0: vec![0.0; n],
        q0: vec![0.0; n],
        u1,
        q1,
        classical_rejection,
        plan,
        rule,
        belief: *belief,
        beta,
        zeta,
    })
}

/// Outcome of [`verify_equilibrium`].
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub receiver_rational: bool,
    pub defender_rational: bool,
    pub belief_consistent: bool,
    pub counterexample: Option<String>,
}

impl EquilibriumReport {
    pub fn all_hold(&self) -> bool {
        self.receiver_rational && self.defender_rational && self.belief_consistent
    }
}

/// Rejected decoy mass once the receiver best-responds to `a_row` at one signal.
fn realized_rejected_mass(
    sol: &EquilibriumSolution,
    model: &SignalModel,
    s: usize,
    a_row: &CoefficientRow,
) -> f64 {
    let b_row = sol.plan.b(s);
    (0..a_row.k())
        .filter(|&m| {
            let w1 = sol.belief.p_h1() * model.f1()[s] * a_row.weight(m);
            let w0 = sol.belief.p_h0() * model.f0()[s] * b_row.weight(m);
            rejects_weights(sol.beta, w1, w0)
        })
        .map(|m| a_row.weight(m))
        .sum()
}

/// Check the three PBNE conditions on a candidate solution.
///
/// Defender rationality is probed by brute force: every `u ∈ {0, tol, 2·tol, …, 1}`
/// is realized as a decoy row, the receiver's response to it is recomputed,
/// and the resulting rejected mass is compared with the solution's.
pub fn verify_equilibrium(
    sol: &EquilibriumSolution,
    model: &SignalModel,
    tol: f64,
) -> Result<EquilibriumReport> {
    let mut report = EquilibriumReport {
        receiver_rational: true,
        defender_rational: true,
        belief_consistent: true,
        counterexample: None,
    };
    let flag = |report: &mut EquilibriumReport, msg: String| {
        if report.counterexample.is_none() {
            report.counterexample = Some(msg);
        }
    };

    let response = best_response(&sol.belief, sol.beta, model, &sol.plan)?;
    if response.rejected != sol.rule.rejected {
        report.receiver_rational = false;
        let diff = response
            .rejected
            .symmetric_difference(&sol.rule.rejected)
            .next()
            .copied()
            .expect("sets differ");
        let verb = if response.rejects(diff) {
            "rejects"
        } else {
            "accepts"
        };
        flag(
            &mut report,
            format!(
                "receiver: best response {verb} (signal {}, mind {}) but the rule does not",
                diff.signal, diff.mind
            ),
        );
    }

    let k = sol.plan.k();
    let steps = (1.0 / tol).ceil() as usize;
    'signals: for s in 0..model.len() {
        let f1 = model.f1()[s];
        if f1 == 0.0 {
            continue;
        }
        let realized = realized_rejected_mass(sol, model, s, sol.plan.a(s));
        if (realized - sol.u1[s]).abs() > tol {
            report.defender_rational = false;
            flag(
                &mut report,
                format!(
                    "defender: plan realizes u1 = {realized} at signal {s}, solution claims {}",
                    sol.u1[s]
                ),
            );
            continue;
        }
        let current = f1 * sol.u1[s];
        for i in 0..=steps {
            let u = (i as f64 * tol).min(1.0);
            let q = calibrated_attraction(u, sol.zeta.get())?;
            let row = synthesize_coefficients(u, q, k, SynthesisLayout::CANONICAL)?;
            let candidate = f1 * realized_rejected_mass(sol, model, s, &row);
            if current - candidate > 1e-9 * f1 {
                report.defender_rational = false;
                flag(
                    &mut report,
                    format!("defender: u1 = {u} at signal {s} lowers the objective from {current} to {candidate}"),
                );
                continue 'signals;
            }
        }
    }

    let rho1 = assemble_density(model.f1(), sol.plan.a_rows())?;
    let rho0 = assemble_density(model.f0(), sol.plan.b_rows())?;
    'outer: for s in 0..model.len() {
        for m in 0..k {
            let o = Outcome::new(s, m);
            let (w1, w0) = outcome_weights(&sol.belief, model, &sol.plan, o);
            if w1 + w0 <= 0.0 {
                continue;
            }
            let num = sol.belief.p_h1() * rho1.diagonal(s, m);
            let den = num + sol.belief.p_h0() * rho0.diagonal(s, m);
            let bayes = num / den;
            let post = posterior_update(&sol.belief, &sol.plan, model, o)?;
            if (post.p_h1() - bayes).abs() > tol {
                report.belief_consistent = false;
                flag(
                    &mut report,
                    format!(
                        "belief: posterior {} at (signal {s}, mind {m}) differs from Bayes {bayes}",
                        post.p_h1()
                    ),
                );
                break 'outer;
            }
        }
    }
    Ok(report)
}

/// Grid-search oracle for the decoy's equilibrium utility factor.
///
/// For each signal, returns the smallest grid value `u` whose leftover mass
/// `1 − u`, placed on a mind state where the normal sensor puts all of its
/// mass, is still accepted by a receiver holding `belief`.
pub fn brute_force_defender(
    model: &SignalModel,
    belief: &Belief,
    beta: Tolerance,
    grid_step: f64,
) -> Result<Vec<f64>> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::Parameter {
            name: "grid_step",
            value: grid_step,
            range: "(0, 0.1]",
        });
    }
    let steps = (1.0 / grid_step).round() as usize;
    let beta = beta.get();
    Ok((0..model.len())
        .map(|s| {
            let decoy = belief.p_h1() * model.f1()[s];
            let normal = belief.p_h0() * model.f0()[s];
            (0..=steps)
                .map(|i| (i as f64 * grid_step).min(1.0))
                .find(|&u| {
                    let leftover = 1.0 - u;
                    if leftover <= 0.0 {
                        return true;
                    }
                    // posterior p(H0 | accepted state) must not fall below β
                    let evidence = decoy * leftover + normal;
                    evidence > 0.0 && normal >= beta * evidence * (1.0 - 1e-12)
                })
                .unwrap_or(1.0)
        })
        .collect())
}

impl EquilibriumSolution {
    pub fn to_json(&self, fmt: NumberFormat) -> Value {
        let per_signal = |values: &[f64]| -> Value {
            let mut m = Map::new();
            for (s, &v) in self.signals.iter().zip(values) {
                m.insert(s.clone(), real(v, fmt));
            }
            Value::Object(m)
        };
        let mut m = Map::new();
        m.insert("beta".into(), real(self.beta.get(), fmt));
        m.insert("zeta".into(), real(self.zeta.get(), fmt));
        m.insert("belief".into(), self.belief.to_json(fmt));
        m.insert("tau".into(), per_signal(&self.tau));
        m.insert("u1".into(), per_signal(&self.u1));
        m.insert("u0".into(), per_signal(&self.u0));
        m.insert("q1".into(), per_signal(&self.q1));
        m.insert("q0".into(), per_signal(&self.q0));
        m.insert(
            "classical_rejection".into(),
            Value::Array(
                self.classical_rejection
                    .iter()
                    .map(|&s| Value::String(self.signals[s].clone()))
                    .collect(),
            ),
        );
        m.insert("plan".into(), self.plan.to_json(fmt));
        m.insert("rule".into(), self.rule.to_json(&self.signals, fmt));
        Value::Object(m)
    }
}
