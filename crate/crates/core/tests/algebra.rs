use nalgebra::DMatrix;
use proptest::prelude::*;

use travesty_core::equilibrium::solve_static;
use travesty_core::prospect::{
    assemble_density, calibrated_attraction, synthesize_coefficients, BlockOperator,
    SynthesisLayout,
};
use travesty_core::receiver::build_rejection_projector;
use travesty_core::{Belief, Calibration, SignalModel, Tolerance};

fn block_matrix(op: &BlockOperator, s: usize) -> DMatrix<f64> {
    let k = op.k();
    DMatrix::from_row_slice(k, k, op.block(s))
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

proptest! {
    #[test]
    fn density_blocks_are_rank_one(
        weights in prop::collection::vec(0.01f64..1.0, 1..5),
        us in prop::collection::vec(0.0f64..=1.0, 5),
        zeta in -1.0f64..=1.0,
        k in 3usize..7,
    ) {
        let total: f64 = weights.iter().sum();
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let rows: Vec<_> = us.iter().take(pmf.len()).map(|&u| {
            let q = calibrated_attraction(u, zeta).unwrap();
            synthesize_coefficients(u, q, k, SynthesisLayout::CANONICAL).unwrap()
        }).collect();
        let rho = assemble_density(&pmf, &rows).unwrap();
        for (s, &p) in pmf.iter().enumerate() {
            let ev = sorted_eigenvalues(block_matrix(rho.operator(), s));
            prop_assert!((ev[0] - p).abs() <= 1e-9, "leading eigenvalue {} vs mass {}", ev[0], p);
            prop_assert!(ev[1].abs() <= 1e-9, "second eigenvalue {}", ev[1]);
            prop_assert!(ev.iter().all(|&e| e >= -1e-12));
        }
    }

    #[test]
    fn equilibrium_projector_spectrum(
        theta1 in 0.01f64..0.99,
        theta0 in 0.01f64..0.99,
        p_h1 in 0.05f64..0.95,
        beta in 0.05f64..0.95,
        zeta in -1.0f64..=1.0,
    ) {
        let model = SignalModel::bernoulli(theta1, theta0).unwrap();
        let sol = solve_static(
            &Belief::new(p_h1).unwrap(),
            Tolerance::new(beta).unwrap(),
            Calibration::new(zeta).unwrap(),
            4,
            &model,
        ).unwrap();
        let proj = build_rejection_projector(&sol.rule, &sol.plan).unwrap();
        for s in 0..model.len() {
            let m = block_matrix(&proj, s);
            prop_assert!((&m * &m - &m).amax() <= 1e-12);
            let ev = sorted_eigenvalues(m);
            // eigenvalues of a projector are 0 or 1
            prop_assert!(ev.iter().all(|&e| e.abs() <= 1e-12 || (e - 1.0).abs() <= 1e-12));
            let rank = ev.iter().filter(|&&e| e > 0.5).count();
            prop_assert!(rank <= 1);
        }
    }
}
