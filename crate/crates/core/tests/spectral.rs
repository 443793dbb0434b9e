mod common;

use bosonlab_core::rng::{random_unit_vector, seeded};
use bosonlab_core::sparse::SparseMatrix;
use bosonlab_core::spectral::*;
use bosonlab_core::vecops::{dot, norm, sub};
use bosonlab_core::{Error, C64};
use common::{c, dense};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn iterative() -> SpectralConfig {
    SpectralConfig {
        dense_threshold: 8,
        ..SpectralConfig::default()
    }
}

#[test]
fn diagonal_cluster_example() {
    let h = SparseMatrix::from_real_diagonal(&[0.0, 0.0, 1.0]);
    let gs = ground_eigenspace(&h, &SpectralConfig::default()).unwrap();
    assert_eq!(gs.energy, 0.0);
    assert_eq!(gs.multiplicity, 2);
    assert_eq!(gs.gap, 1.0);
}

#[test]
fn rayleigh_quotients_stay_above_ground_energy() {
    let m = common::spin_boson(0.5, 0.5, common::massive_grid(0.5, 3), 0.3, 5);
    for cfg in [SpectralConfig::default(), iterative()] {
        let gs = m.ground_state(&cfg).unwrap();
        let mut rng = seeded(5);
        for _ in 0..100 {
            let u = random_unit_vector(&mut rng, m.dim());
            assert!(dot(&u, &m.h.matvec(&u)).re >= gs.energy - 1e-8 * gs.scale);
        }
        assert!(gs.max_residual() <= cfg.eigen_tol * gs.scale);
        for (i, u) in gs.vectors.iter().enumerate() {
            for (j, v) in gs.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - c(want)).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn iterative_agrees_with_dense_on_models() {
    let cfgs = [SpectralConfig::default(), iterative()];
    let models = [
        common::spin_boson(0.5, 0.5, common::massive_grid(0.5, 3), 0.3, 4),
        common::degenerate_atom(common::massive_grid(0.5, 2), 0.1, 4),
        common::pf_toy(6, 1.0, 0.05, 2, 2),
    ];
    for m in &models {
        let a = m.ground_state(&cfgs[0]).unwrap();
        let b = m.ground_state(&cfgs[1]).unwrap();
        assert!((a.energy - b.energy).abs() < 1e-9 * a.scale);
        assert_eq!(a.multiplicity, b.multiplicity);
        assert!((a.gap - b.gap).abs() < 1e-6 * a.scale);
    }
}

#[test]
fn ground_state_is_deterministic() {
    let m = common::spin_boson(0.5, 0.5, common::massive_grid(0.5, 3), 0.3, 4);
    let a = m.ground_state(&iterative()).unwrap();
    let b = m.ground_state(&iterative()).unwrap();
    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    assert_eq!(a.multiplicity, b.multiplicity);
    assert_eq!(a.vectors, b.vectors);
}

#[test]
fn resolvent_examples() {
    let cfg = SpectralConfig::default();
    let h = SparseMatrix::zeros(1, 1);
    let x = resolvent_apply(&h, 0.0, 2.0, &[c(1.0)], &cfg).unwrap();
    assert!((x[0] - c(0.5)).norm() < 1e-15);
    let h = SparseMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
    let x = resolvent_apply(&h, 1.0, 0.5, &[c(0.0); 3], &cfg).unwrap();
    assert!(x.iter().all(|z| *z == c(0.0)));
    // E above the bottom of the spectrum makes the shifted operator indefinite.
    assert!(matches!(resolvent_apply(&h, 2.0, 0.5, &[c(1.0); 3], &cfg), Err(Error::Indefinite { .. })));
}

#[test]
fn resolvent_on_random_psd_matches_dense_inverse() {
    let mut rng = seeded(3);
    let n = 50;
    let g = DMatrix::from_fn(n, n, |_, _| bosonlab_core::rng::gaussian(&mut rng));
    let psd = &g * g.adjoint();
    let h = SparseMatrix::from_dense(&psd);
    let e = eigh(&psd).values[0];
    let rhs = random_unit_vector(&mut rng, n);
    let shift = 0.7;
    let shifted = &psd - DMatrix::<C64>::identity(n, n) * c(e - shift);
    let oracle = shifted.lu().solve(&nalgebra::DVector::from_vec(rhs.clone())).unwrap();
    for cfg in [SpectralConfig::default(), iterative()] {
        let x = resolvent_apply(&h, e, shift, &rhs, &cfg).unwrap();
        let diff: Vec<C64> = x.iter().zip(oracle.iter()).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) < 1e-8 * norm(&x));
        let solver = ResolventSolver::new(&h, e, &cfg, None);
        assert!(solver.residual(shift, &x, &rhs) <= cfg.cg_tol * norm(&rhs) * 10.0);
    }
}

#[test]
fn operator_norm_diff_examples() {
    let cfg = SpectralConfig::default();
    let x = SparseMatrix::from_real_diagonal(&[1.0, 2.0]);
    assert_eq!(operator_norm_diff(&x, &x, &cfg).unwrap(), 0.0);
    let y = SparseMatrix::from_real_diagonal(&[-2.0, 3.0]);
    assert!((operator_norm_diff(&x, &y, &cfg).unwrap() - 3.0).abs() < 1e-12);

    let mut rng = seeded(9);
    let n = 30;
    let a = DMatrix::from_fn(n, n, |_, _| bosonlab_core::rng::gaussian(&mut rng));
    let b = DMatrix::from_fn(n, n, |_, _| bosonlab_core::rng::gaussian(&mut rng));
    let oracle = (&a - &b).singular_values().max();
    let (sa, sb) = (SparseMatrix::from_dense(&a), SparseMatrix::from_dense(&b));
    for cfg in [SpectralConfig::default(), iterative()] {
        let v = operator_norm_diff(&sa, &sb, &cfg).unwrap();
        assert!((v - oracle).abs() < 1e-6 * oracle, "{v} vs {oracle}");
    }
}

#[test]
fn full_spectrum_refuses_large_inputs() {
    let cfg = SpectralConfig::default();
    let h = SparseMatrix::identity(cfg.dense_threshold + 1);
    assert!(matches!(full_spectrum_small(&h, &cfg), Err(Error::TooLargeForDense { .. })));
}

#[test]
fn config_validation() {
    assert!(SpectralConfig::default().validate().is_ok());
    let bad = SpectralConfig {
        cg_tol: 0.0,
        ..SpectralConfig::default()
    };
    assert!(bad.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lanczos_matches_dense_on_random_hermitian(seed in any::<u64>(), n in 12usize..40) {
        let mut rng = seeded(seed);
        let g = DMatrix::from_fn(n, n, |_, _| bosonlab_core::rng::gaussian(&mut rng));
        let hm = (&g + g.adjoint()) * c(0.5);
        let h = SparseMatrix::from_dense(&hm);
        let a = ground_eigenspace(&h, &SpectralConfig::default()).unwrap();
        let b = ground_eigenspace(&h, &iterative()).unwrap();
        prop_assert!((a.energy - b.energy).abs() < 1e-9 * a.scale);
        let r = sub(&h.matvec(&b.vectors[0]), &b.vectors[0].iter().map(|z| z * b.energy).collect::<Vec<_>>());
        prop_assert!(norm(&r) <= 1e-9 * b.scale);
        let oracle = nalgebra::linalg::SymmetricEigen::new(dense(&h)).eigenvalues.min();
        prop_assert!((a.energy - oracle).abs() < 1e-10 * a.scale);
    }
}
