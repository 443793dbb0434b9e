mod common;

use bosonlab_core::fock::*;
use bosonlab_core::rng::{random_unit_vector, seeded};
use bosonlab_core::spectral::SpectralConfig;
use bosonlab_core::vecops::{dot, norm_sqr};
use bosonlab_core::verifier::{a_m_check, ccr_check, dg1_check, dgamma_commutator_check, dgamma_spectrum_check};
use bosonlab_core::{Error, C64};
use common::c;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Every occupation vector with total at most `n_max`, by nested loops.
fn all_occupations(modes: usize, n_max: usize) -> Vec<Vec<u16>> {
    fn rec(modes: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == modes {
            out.push(cur.clone());
            return;
        }
        for n in 0..=left {
            cur.push(n as u16);
            rec(modes, left - n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(modes, n_max, &mut Vec::new(), &mut out);
    out
}

#[test]
fn basis_examples() {
    let b = build_basis(1, 4).unwrap();
    assert_eq!(b.dim(), 5);
    for i in 0..5 {
        assert_eq!(b.state(i), &[i as u16]);
    }
    assert_eq!(build_basis(2, 2).unwrap().dim(), 6);
    let b = build_basis(3, 3).unwrap();
    assert_eq!(b.dim(), all_occupations(3, 3).len());
    assert_eq!(b.dim(), 20);
    assert_eq!(b.vacuum_index(), 0);
}

#[test]
fn dimension_cap_is_enforced() {
    let err = OccupationBasis::with_cap(10, 10, 1000).unwrap_err();
    assert!(matches!(err, Error::DimensionCap { modes: 10, n_max: 10, .. }));
    assert!(err.to_string().contains("184756"));
}

#[test]
fn sectors_are_contiguous_and_sorted() {
    let b = build_basis(3, 4).unwrap();
    for n in 0..=4 {
        let r = b.sector_range(n);
        assert_eq!(r.len() as u64, binomial(n as u64 + 2, 2));
        for i in r.clone() {
            assert_eq!(b.total(i), n);
        }
        for i in r.start..r.end.saturating_sub(1) {
            assert!(b.state(i) < b.state(i + 1));
        }
    }
}

#[test]
fn ladder_examples() {
    let b = build_basis(1, 2).unwrap();
    let lower = ladder_op(&b, 0, Ladder::Lower).unwrap();
    let raise = ladder_op(&b, 0, Ladder::Raise).unwrap();
    let one = FockVector::occupation(b.clone(), &[1]).unwrap();
    let down = lower.apply(&one).unwrap();
    assert_eq!(down.coeffs(), &[c(1.0), c(0.0), c(0.0)]);
    let up = raise.apply(&one).unwrap();
    assert!((up.coeffs()[2].re - 2f64.sqrt()).abs() < 1e-15);
    // Top sector is annihilated by the truncated raise.
    let two = FockVector::occupation(b.clone(), &[2]).unwrap();
    assert_eq!(raise.apply(&two).unwrap().norm(), 0.0);

    let b = build_basis(3, 2).unwrap();
    let vac = FockVector::vacuum(b.clone());
    for m in 0..3 {
        assert_eq!(ladder_op(&b, m, Ladder::Lower).unwrap().apply(&vac).unwrap().norm(), 0.0);
    }
    assert!(ladder_op(&b, 3, Ladder::Lower).is_err());
}

#[test]
fn lower_is_exact_adjoint_of_raise() {
    let b = build_basis(3, 3).unwrap();
    for m in 0..3 {
        let r = ladder_op(&b, m, Ladder::Raise).unwrap().into_matrix();
        let l = ladder_op(&b, m, Ladder::Lower).unwrap().into_matrix();
        assert_eq!(common::dense(&l), common::dense(&r).adjoint());
    }
}

#[test]
fn second_quantization_examples() {
    let b = build_basis(2, 3).unwrap();
    let id = DMatrix::<C64>::identity(2, 2);
    let dg = second_quantization(&b, &id).unwrap();
    assert_eq!(common::dense(dg.matrix()), common::dense(number_operator(&b).matrix()));

    let b = build_basis(2, 2).unwrap();
    let s = DMatrix::from_row_slice(2, 2, &[c(0.3), c(0.0), c(0.0), c(0.5)]);
    let dg = second_quantization(&b, &s).unwrap();
    let mut diag: Vec<f64> = (0..6).map(|i| common::dense(dg.matrix())[(i, i)].re).collect();
    diag.sort_by(f64::total_cmp);
    for (x, want) in diag.iter().zip([0.0, 0.3, 0.5, 0.6, 0.8, 1.0]) {
        assert!((x - want).abs() < 1e-15);
    }
    let vac = FockVector::vacuum(b.clone());
    let s = DMatrix::from_row_slice(2, 2, &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(-0.4)]);
    assert_eq!(second_quantization(&b, &s).unwrap().apply(&vac).unwrap().norm(), 0.0);
}

#[test]
fn second_quantization_rejects_non_hermitian() {
    let b = build_basis(2, 2).unwrap();
    let s = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    assert!(matches!(second_quantization(&b, &s), Err(Error::NotHermitian { .. })));
}

#[test]
fn number_operator_examples() {
    let b = build_basis(2, 3).unwrap();
    let n = number_operator(&b);
    let v = FockVector::occupation(b.clone(), &[2, 1]).unwrap();
    let nv = n.apply(&v).unwrap();
    for (x, y) in nv.coeffs().iter().zip(v.coeffs()) {
        assert_eq!(*x, y * 3.0);
    }
    assert_eq!(n.apply(&FockVector::vacuum(b.clone())).unwrap().norm(), 0.0);
    let spec = bosonlab_core::spectral::full_spectrum_small(n.matrix(), &SpectralConfig::default()).unwrap();
    let want = [0.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0, 3.0];
    assert_eq!(spec.len(), want.len());
    for (x, w) in spec.iter().zip(want) {
        assert!((x - w).abs() < 1e-12);
    }
}

#[test]
fn field_operator_examples() {
    let b = build_basis(1, 3).unwrap();
    assert_eq!(field_operator(&b, &[c(0.0)]).unwrap().matrix().nnz(), 0);
    let phi = field_operator(&b, &[c(0.8)]).unwrap();
    let d = common::dense(phi.matrix());
    assert!((d[(0, 1)].re - 0.8 / 2f64.sqrt()).abs() < 1e-15);
    assert!(phi.is_hermitian());

    let b = build_basis(3, 2).unwrap();
    let lambda = [C64::new(0.3, -0.1), C64::new(-0.5, 0.2), C64::new(0.0, 0.7)];
    let phi = field_operator(&b, &lambda).unwrap();
    let vac = FockVector::vacuum(b.clone());
    let once = phi.apply(&vac).unwrap();
    let twice = phi.apply(&once).unwrap();
    let expect: f64 = lambda.iter().map(|z| z.norm_sqr()).sum::<f64>() / 2.0;
    assert!((dot(vac.coeffs(), twice.coeffs()).re - expect).abs() < 1e-14);
}

#[test]
fn smeared_ladder_operators_are_linear() {
    let b = build_basis(2, 3).unwrap();
    let f = [C64::new(0.2, 0.1), c(-0.4)];
    let ann = common::dense(annihilation(&b, &f).unwrap().matrix());
    let cre = common::dense(creation(&b, &f).unwrap().matrix());
    let a0 = common::dense(ladder_op(&b, 0, Ladder::Lower).unwrap().matrix());
    let a1 = common::dense(ladder_op(&b, 1, Ladder::Lower).unwrap().matrix());
    let expect = &a0 * f[0] + &a1 * f[1];
    assert!(common::max_abs(&(ann - expect)) < 1e-15);
    let expect = a0.adjoint() * f[0] + a1.adjoint() * f[1];
    assert!(common::max_abs(&(cre - expect)) < 1e-15);
}

#[test]
fn algebra_checks_pass() {
    let cfg = SpectralConfig::default();
    let b = build_basis(3, 4).unwrap();
    assert!(ccr_check(&b).unwrap().passed());
    assert!(dgamma_commutator_check(&b, &[0.7, 1.1, 1.9]).unwrap().passed());
    assert!(a_m_check(&b, &cfg).unwrap().passed());
    let small = build_basis(2, 3).unwrap();
    assert!(dg1_check(&small, &[0.6, 1.3], &[0.37, 1.9, -2.4]).unwrap().passed());
    assert!(dgamma_spectrum_check(&small, &[0.3, 0.5], &cfg).unwrap().passed());
    let three = build_basis(3, 3).unwrap();
    assert!(dgamma_spectrum_check(&three, &[0.2, 0.45, 1.0], &cfg).unwrap().passed());
}

#[test]
fn ccr_fails_in_top_sector() {
    // The truncation defect must be visible when the top sector is included.
    let b = build_basis(1, 3).unwrap();
    let a = common::dense(ladder_op(&b, 0, Ladder::Lower).unwrap().matrix());
    let comm = &a * a.adjoint() - a.adjoint() * &a;
    assert!((comm[(3, 3)].re - (-3.0)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn index_map_is_a_bijection(modes in 1usize..5, n_max in 0usize..5) {
        let b = build_basis(modes, n_max).unwrap();
        let all = all_occupations(modes, n_max);
        prop_assert_eq!(b.dim(), all.len());
        prop_assert_eq!(fock_dimension(modes, n_max).unwrap(), all.len() as u128);
        for occ in &all {
            let i = b.index_of(occ).unwrap();
            prop_assert_eq!(b.state(i), occ.as_slice());
        }
    }

    #[test]
    fn smaller_cutoff_is_a_prefix(modes in 1usize..4, n_max in 1usize..5) {
        let big = build_basis(modes, n_max).unwrap();
        let small = build_basis(modes, n_max - 1).unwrap();
        for i in 0..small.dim() {
            prop_assert_eq!(small.state(i), big.state(i));
        }
    }

    #[test]
    fn number_sum_rule_on_random_states(seed in any::<u64>(), modes in 1usize..4, n_max in 1usize..4) {
        let b = build_basis(modes, n_max).unwrap();
        let mut rng = seeded(seed);
        let v = random_unit_vector(&mut rng, b.dim());
        let fv = FockVector::new(b.clone(), v.clone()).unwrap();
        let lhs = dot(&v, number_operator(&b).apply(&fv).unwrap().coeffs()).re;
        let mid: f64 = (0..modes)
            .map(|m| norm_sqr(ladder_op(&b, m, Ladder::Lower).unwrap().apply(&fv).unwrap().coeffs()))
            .sum();
        prop_assert!((lhs - mid).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn field_operator_is_hermitian(re in proptest::collection::vec(-2.0f64..2.0, 3), im in proptest::collection::vec(-2.0f64..2.0, 3)) {
        let b = build_basis(3, 3).unwrap();
        let lambda: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
        let d = common::dense(field_operator(&b, &lambda).unwrap().matrix());
        prop_assert!(common::max_abs(&(&d - d.adjoint())) == 0.0);
    }
}
