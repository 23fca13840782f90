//! Solver and simulator for the travesty game: a signaling game between a
//! cyber-deception system (normal sensor or decoy, each with a perception
//! generator) and a human attacker whose judgments follow quantum decision
//! theory.
//!
//! Modules follow the flow of the game:
//!
//! * [`signal`]: classical signal distributions under each sensor type.
//! * [`prospect`]: coefficient algebra of prospect states.
//! * [`receiver`]: beliefs, the quantum likelihood-ratio test, projectors.
//! * [`equilibrium`]: static equilibrium, its verification and a grid oracle.
//! * [`metrics`]: detection rates, quantum advantage, ROC sweeps.
//! * [`dynamic`]: the multi-stage game and its simulator.
//! * [`ingest`]: connection-record parsing and model estimation.

pub mod dynamic;
pub mod equilibrium;
pub mod error;
pub mod ingest;
pub mod json;
pub mod metrics;
pub mod params;
pub mod prospect;
pub mod receiver;
pub mod signal;

pub use dynamic::{simulate, GameConfig, GameTrace, HypothesisType, StageRecord, U0Convention};
pub use equilibrium::{
    brute_force_defender, compute_tau, solve_static, verify_equilibrium, EquilibriumReport,
    EquilibriumSolution,
};
pub use error::{Error, Result};
pub use json::NumberFormat;
pub use metrics::{roc_sweep, RatePoint};
pub use params::{Calibration, Tolerance};
pub use prospect::{CoefficientRow, MindSpace, ProspectPlan};
pub use receiver::{Belief, Decision, DecisionRule, Outcome};
pub use signal::SignalModel;
