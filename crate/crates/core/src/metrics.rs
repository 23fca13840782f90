//! Detection performance of the attacker at equilibrium.

use std::io::Write;

use crate::equilibrium::{solve_static, EquilibriumSolution};
use crate::error::Result;
use crate::json::{cell, NumberFormat};
use crate::params::{Calibration, Tolerance};
use crate::receiver::{classical_rejects, Belief};
use crate::signal::SignalModel;

/// Mind-space size used for sweeps. Rates do not depend on it once `K >= 3`.
pub const SWEEP_MIND_STATES: usize = 4;

const RANGE_SLACK: f64 = 1e-12;

/// One point of a β × ζ sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub beta: f64,
    pub zeta: f64,
    pub pd: f64,
    pub pf: f64,
    pub pd_bar: f64,
    pub pf_bar: f64,
    pub qa: f64,
}

/// Manipulated detection and false-alarm rates `(P_D, P_F)`.
///
/// # Panics
///
/// If a rate leaves `[0, 1]`; with `ζ ∈ [−1, 1]` that cannot happen.
pub fn detection_rates(sol: &EquilibriumSolution, model: &SignalModel) -> (f64, f64) {
    let rate = |pmf: &[f64], u: &[f64], q: &[f64]| -> f64 {
        pmf.iter()
            .zip(u)
            .zip(q)
            .map(|((f, u), q)| f * (u + q))
            .sum()
    };
    let pd = rate(model.f1(), &sol.u1, &sol.q1);
    let pf = rate(model.f0(), &sol.u0, &sol.q0);
    for (name, value) in [("P_D", pd), ("P_F", pf)] {
        assert!(
            (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&value),
            "{name} = {value} left [0, 1]"
        );
    }
    (pd, pf)
}

/// Fully rational rates `(P̄_D, P̄_F)` of the classical likelihood-ratio test.
pub fn classical_rates(model: &SignalModel, belief: &Belief, beta: Tolerance) -> (f64, f64) {
    (0..model.len())
        .filter(|&s| classical_rejects(belief, beta, model, s))
        .fold((0.0, 0.0), |(d, f), s| {
            (d + model.f1()[s], f + model.f0()[s])
        })
}

/// `P_D / P̄_D`, with `0/0 := 1`.
pub fn quantum_advantage(pd: f64, pd_bar: f64) -> f64 {
    if pd_bar == 0.0 {
        1.0
    } else {
        pd / pd_bar
    }
}

/// Rates of one solved equilibrium.
pub fn rate_point(sol: &EquilibriumSolution, model: &SignalModel) -> RatePoint {
    let (pd, pf) = detection_rates(sol, model);
    let (pd_bar, pf_bar) = classical_rates(model, &sol.belief, sol.beta);
    RatePoint {
        beta: sol.beta.get(),
        zeta: sol.zeta.get(),
        pd,
        pf,
        pd_bar,
        pf_bar,
        qa: quantum_advantage(pd, pd_bar),
    }
}

/// Solve every `(ζ, β)` pair and return points sorted by `(ζ, β)`.
pub fn roc_sweep(
    model: &SignalModel,
    belief: &Belief,
    zetas: &[Calibration],
    betas: &[Tolerance],
) -> Result<Vec<RatePoint>> {
    let mut points = Vec::with_capacity(zetas.len() * betas.len());
    for &zeta in zetas {
        for &beta in betas {
            let sol = solve_static(belief, beta, zeta, SWEEP_MIND_STATES, model)?;
            points.push(rate_point(&sol, model));
        }
    }
    points.sort_by(|x, y| x.zeta.total_cmp(&y.zeta).then(x.beta.total_cmp(&y.beta)));
    Ok(points)
}

pub const ROC_HEADER: &str = "zeta,beta,PF_quantum,PD_quantum,PF_classical,PD_classical,QA";

pub fn write_roc_csv<W: Write>(points: &[RatePoint], fmt: NumberFormat, mut out: W) -> Result<()> {
    writeln!(out, "{ROC_HEADER}")?;
    for p in points {
        let cells = [p.zeta, p.beta, p.pf, p.pd, p.pf_bar, p.pd_bar, p.qa].map(|x| cell(x, fmt));
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
