//! Fock-space algebra identities that survive truncation away from the top sector.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::report::{CheckOutcome, Tier};
use crate::error::Result;
use crate::fock::{free_energy, raise_matrix, OccupationBasis};
use crate::sparse::SparseMatrix;
use crate::spectral::{eigh, spectral_norm, SpectralConfig};

/// Tolerance for the exact-tier algebra checks: rounding in `√n·√n`.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Largest entry of `x` in columns whose Fock state has total number `< limit`.
fn max_abs_in_columns_below(x: &SparseMatrix, basis: &OccupationBasis, limit: usize) -> f64 {
    let mut m = 0.0f64;
    for (_, c, v) in x.triplets() {
        if basis.total(c) < limit {
            m = m.max(v.norm());
        }
    }
    m
}

/// `[a_m, a†_m'] = δ_{mm'}` on sectors below the cutoff and `[a_m, a_m'] = 0`
/// everywhere.
pub fn ccr_check(basis: &Arc<OccupationBasis>) -> Result<CheckOutcome> {
    let modes = basis.modes();
    let d = basis.dim();
    let raises: Vec<SparseMatrix> = (0..modes).map(|m| raise_matrix(basis, m)).collect::<Result<_>>()?;
    let lowers: Vec<SparseMatrix> = raises.iter().map(SparseMatrix::adjoint).collect();
    let id = SparseMatrix::identity(d);
    let mut ccr = 0.0f64;
    let mut aa = 0.0f64;
    for m in 0..modes {
        for mp in 0..modes {
            let mut c = lowers[m].commutator(&raises[mp])?;
            if m == mp {
                c = c.sub(&id)?;
            }
            ccr = ccr.max(max_abs_in_columns_below(&c, basis, basis.n_max()));
            aa = aa.max(lowers[m].commutator(&lowers[mp])?.max_abs());
        }
    }
    Ok(CheckOutcome::bounded("ccr", Tier::Exact, ccr.max(aa), ALGEBRA_TOL)
        .metric("ccr_defect", ccr)
        .metric("lower_lower_defect", aa))
}

/// `[dΓ(ω), a_m] = −ω_m a_m` on every sector.
pub fn dgamma_commutator_check(basis: &Arc<OccupationBasis>, omega: &[f64]) -> Result<CheckOutcome> {
    let dg = free_energy(basis, omega)?.into_matrix();
    let mut worst = 0.0f64;
    for (m, &w) in omega.iter().enumerate() {
        let a = raise_matrix(basis, m)?.adjoint();
        let c = dg.commutator(&a)?.lin_comb(C64::new(1.0, 0.0), &a, C64::new(w, 0.0))?;
        worst = worst.max(c.max_abs());
    }
    Ok(CheckOutcome::bounded("dgamma_commutator", Tier::Exact, worst, ALGEBRA_TOL))
}

/// `e^{itdΓ(ω)} a_m e^{−itdΓ(ω)} = e^{−itω_m} a_m` below the top sector,
/// with the exponentials formed densely from an eigendecomposition.
pub fn dg1_check(basis: &Arc<OccupationBasis>, omega: &[f64], times: &[f64]) -> Result<CheckOutcome> {
    let dg = free_energy(basis, omega)?.into_matrix().to_dense();
    let eig = eigh(&dg);
    let mut worst = 0.0f64;
    for &t in times {
        let u = eig.function_matrix(|l| C64::new(0.0, t * l).exp());
        let ud = u.adjoint();
        for (m, &w) in omega.iter().enumerate() {
            let a = raise_matrix(basis, m)?.adjoint().to_dense();
            let lhs = &u * &a * &ud;
            let rhs = a * C64::new(0.0, -t * w).exp();
            let diff = SparseMatrix::from_dense(&(lhs - rhs));
            worst = worst.max(max_abs_in_columns_below(&diff, basis, basis.n_max()));
        }
    }
    Ok(CheckOutcome::bounded("dg1", Tier::Exact, worst, 1e-10))
}

/// `A_{M'} = (N+1)^{−1/2}(Σ_{m<M'} a†_m a_m)(N+1)^{−1/2}` has norm at most one
/// for every partial sum and equals `N(N+1)^{−1}` for the full sum.
pub fn a_m_check(basis: &Arc<OccupationBasis>, cfg: &SpectralConfig) -> Result<CheckOutcome> {
    let d = basis.dim();
    let inv_sqrt: Vec<f64> = (0..d).map(|i| 1.0 / ((basis.total(i) + 1) as f64).sqrt()).collect();
    let k = SparseMatrix::from_real_diagonal(&inv_sqrt);
    let mut partial = SparseMatrix::zeros(d, d);
    let mut worst_norm = 0.0f64;
    for m in 0..basis.modes() {
        let r = raise_matrix(basis, m)?;
        partial = partial.add(&r.matmul(&r.adjoint())?)?;
        let am = k.matmul(&partial)?.matmul(&k)?;
        let nrm = if d <= cfg.dense_threshold {
            spectral_norm(&am.to_dense())
        } else {
            crate::spectral::operator_norm(&am, cfg)?
        };
        worst_norm = worst_norm.max(nrm);
    }
    let full = k.matmul(&partial)?.matmul(&k)?;
    let target: Vec<f64> = (0..d)
        .map(|i| {
            let t = basis.total(i) as f64;
            t / (t + 1.0)
        })
        .collect();
    let defect = full.sub(&SparseMatrix::from_real_diagonal(&target))?.max_abs();
    Ok(CheckOutcome::bounded("a_m_bound", Tier::Exact, defect, ALGEBRA_TOL)
        .and(worst_norm <= 1.0 + ALGEBRA_TOL)
        .metric("max_partial_norm", worst_norm)
        .metric("full_sum_defect", defect))
}

/// Brute-force spectrum `{Σ n_m s_m : Σ n_m ≤ N_max}` by nested enumeration of
/// all occupation vectors, independent of the basis ordering.
pub fn brute_force_dgamma_spectrum(s: &[f64], n_max: usize) -> Vec<f64> {
    fn rec(s: &[f64], left: usize, acc: f64, out: &mut Vec<f64>) {
        match s.split_first() {
            None => out.push(acc),
            Some((&first, rest)) => {
                for n in 0..=left {
                    rec(rest, left - n, acc + n as f64 * first, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(s, n_max, 0.0, &mut out);
    out.sort_by(f64::total_cmp);
    out
}

/// Point spectrum of `dΓ(diag s)` against brute-force enumeration.
pub fn dgamma_spectrum_check(basis: &Arc<OccupationBasis>, s: &[f64], cfg: &SpectralConfig) -> Result<CheckOutcome> {
    let diag = DMatrix::from_fn(s.len(), s.len(), |i, j| if i == j { C64::new(s[i], 0.0) } else { C64::new(0.0, 0.0) });
    let dg = crate::fock::second_quantization(basis, &diag)?;
    let spec = crate::spectral::full_spectrum_small(dg.matrix(), cfg)?;
    let oracle = brute_force_dgamma_spectrum(s, basis.n_max());
    let worst = if spec.len() == oracle.len() {
        spec.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(CheckOutcome::bounded("dgamma_spectrum", Tier::Exact, worst, 1e-10).metric("count", spec.len() as f64))
}
