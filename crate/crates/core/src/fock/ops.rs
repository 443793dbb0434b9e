use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::OccupationBasis;
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, TripletBuilder};

/// Relative tolerance for the Hermiticity flag on operators and one-particle inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lower,
    Raise,
}

/// A sparse operator on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    basis: Arc<OccupationBasis>,
    matrix: SparseMatrix,
    hermitian: bool,
}

impl FockOperator {
    /// Wraps a matrix. With `hermitian` set the matrix is checked against
    /// [`HERMITIAN_TOL`] relative to its largest entry.
    pub fn new(basis: Arc<OccupationBasis>, matrix: SparseMatrix, hermitian: bool) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        if hermitian {
            check_hermitian("operator", &matrix)?;
        }
        Ok(Self {
            basis,
            matrix,
            hermitian,
        })
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if !Arc::ptr_eq(&self.basis, &v.basis) && *self.basis != *v.basis {
            return Err(Error::invalid("vector", "basis does not match operator"));
        }
        Ok(FockVector {
            basis: self.basis.clone(),
            coeffs: self.matrix.matvec(&v.coeffs),
        })
    }
}

pub(crate) fn check_hermitian(what: &'static str, m: &SparseMatrix) -> Result<()> {
    let dev = m.hermitian_defect();
    if dev > HERMITIAN_TOL * m.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian {
            what,
            deviation: dev,
        });
    }
    Ok(())
}

/// Dense Hermiticity check used for small one-particle and atom matrices.
pub fn check_dense_hermitian(what: &'static str, m: &DMatrix<C64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let mut dev = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            scale = scale.max(m[(i, j)].norm());
        }
    }
    if dev > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian {
            what,
            deviation: dev,
        });
    }
    Ok(())
}

/// A state vector in a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    basis: Arc<OccupationBasis>,
    coeffs: Vec<C64>,
}

impl FockVector {
    pub fn new(basis: Arc<OccupationBasis>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("coeffs", "non-finite coefficient"));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn vacuum(basis: Arc<OccupationBasis>) -> Self {
        let mut coeffs = crate::vecops::zeros(basis.dim());
        coeffs[0] = C64::new(1.0, 0.0);
        Self { basis, coeffs }
    }

    /// Normalized occupation-number state, or `None` outside the cutoff.
    pub fn occupation(basis: Arc<OccupationBasis>, occ: &[u16]) -> Option<Self> {
        let i = basis.index_of(occ)?;
        let mut coeffs = crate::vecops::zeros(basis.dim());
        coeffs[i] = C64::new(1.0, 0.0);
        Some(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn norm(&self) -> f64 {
        crate::vecops::norm(&self.coeffs)
    }

    /// `‖Ψ⁽ⁿ⁾‖²` for n = 0..=n_max.
    pub fn sector_weights(&self) -> Vec<f64> {
        sector_weights(&self.basis, 1, &self.coeffs)
    }
}

/// Squared norms per boson-number sector of a vector on `C^left ⊗ Fock`,
/// indexed as `atom * dim + fock`.
pub fn sector_weights(basis: &OccupationBasis, left: usize, v: &[C64]) -> Vec<f64> {
    let d = basis.dim();
    debug_assert_eq!(v.len(), left * d);
    let offs = basis.sector_offsets();
    let mut out = alloc::vec![0.0; basis.n_max() + 1];
    for a in 0..left {
        let block = &v[a * d..(a + 1) * d];
        for (n, w) in out.iter_mut().enumerate() {
            *w += block[offs[n]..offs[n + 1]].iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
    }
    out
}

/// Matrix of `raise(m)` (the truncated creation operator of mode m). Raising
/// out of the top sector gives zero.
pub fn raise_matrix(basis: &OccupationBasis, m: usize) -> Result<SparseMatrix> {
    if m >= basis.modes() {
        return Err(Error::invalid("mode", "mode index out of range"));
    }
    let d = basis.dim();
    let top = basis.sector_range(basis.n_max()).start;
    let mut b = TripletBuilder::with_capacity(d, d, top);
    let mut occ = alloc::vec![0u16; basis.modes()];
    for i in 0..top {
        occ.copy_from_slice(basis.state(i));
        let nm = occ[m] as f64;
        occ[m] += 1;
        let j = basis.index_of(&occ).expect("raised state below cutoff");
        b.push(j, i, C64::new((nm + 1.0).sqrt(), 0.0));
    }
    Ok(b.build())
}

pub fn ladder_op(basis: &Arc<OccupationBasis>, m: usize, kind: Ladder) -> Result<FockOperator> {
    let r = raise_matrix(basis, m)?;
    let matrix = match kind {
        Ladder::Raise => r,
        Ladder::Lower => r.adjoint(),
    };
    Ok(FockOperator {
        basis: basis.clone(),
        matrix,
        hermitian: false,
    })
}

/// `a(f) = Σ f_m a_m`.
pub fn annihilation(basis: &Arc<OccupationBasis>, f: &[C64]) -> Result<FockOperator> {
    Ok(FockOperator {
        basis: basis.clone(),
        matrix: creation_matrix(basis, &conj(f))?.adjoint(),
        hermitian: false,
    })
}

/// `a†(g) = Σ g_m a†_m`.
pub fn creation(basis: &Arc<OccupationBasis>, g: &[C64]) -> Result<FockOperator> {
    Ok(FockOperator {
        basis: basis.clone(),
        matrix: creation_matrix(basis, g)?,
        hermitian: false,
    })
}

fn conj(f: &[C64]) -> Vec<C64> {
    f.iter().map(|z| z.conj()).collect()
}

fn creation_matrix(basis: &OccupationBasis, g: &[C64]) -> Result<SparseMatrix> {
    if g.len() != basis.modes() {
        return Err(Error::DimensionMismatch {
            expected: basis.modes(),
            found: g.len(),
        });
    }
    let d = basis.dim();
    let top = basis.sector_range(basis.n_max()).start;
    let mut b = TripletBuilder::with_capacity(d, d, top * g.len());
    let mut occ = alloc::vec![0u16; basis.modes()];
    for i in 0..top {
        for (m, &gm) in g.iter().enumerate() {
            if gm == C64::new(0.0, 0.0) {
                continue;
            }
            occ.copy_from_slice(basis.state(i));
            let nm = occ[m] as f64;
            occ[m] += 1;
            let j = basis.index_of(&occ).expect("raised state below cutoff");
            b.push(j, i, gm * (nm + 1.0).sqrt());
        }
    }
    Ok(b.build())
}

/// `dΓ(S) = Σ_{m,m'} S_{m m'} a†_m a_{m'}`, block diagonal in the sectors.
pub fn second_quantization(basis: &Arc<OccupationBasis>, s: &DMatrix<C64>) -> Result<FockOperator> {
    let modes = basis.modes();
    if s.nrows() != modes || s.ncols() != modes {
        return Err(Error::DimensionMismatch {
            expected: modes,
            found: s.nrows(),
        });
    }
    check_dense_hermitian("one-particle operator", s)?;
    let d = basis.dim();
    let mut b = TripletBuilder::new(d, d);
    let mut occ = alloc::vec![0u16; modes];
    for i in 0..d {
        let state = basis.state(i);
        for mp in 0..modes {
            let np = state[mp];
            if np == 0 {
                continue;
            }
            for m in 0..modes {
                let smm = s[(m, mp)];
                if smm == C64::new(0.0, 0.0) {
                    continue;
                }
                occ.copy_from_slice(state);
                occ[mp] -= 1;
                let nm = occ[m] as f64;
                occ[m] += 1;
                let j = basis.index_of(&occ).expect("same sector");
                b.push(j, i, smm * ((np as f64) * (nm + 1.0)).sqrt());
            }
        }
    }
    Ok(FockOperator {
        basis: basis.clone(),
        matrix: b.build(),
        hermitian: true,
    })
}

/// `dΓ(diag(ω))`, the diagonal free-field energy.
pub fn free_energy(basis: &Arc<OccupationBasis>, omega: &[f64]) -> Result<FockOperator> {
    if omega.len() != basis.modes() {
        return Err(Error::DimensionMismatch {
            expected: basis.modes(),
            found: omega.len(),
        });
    }
    let diag: Vec<f64> = (0..basis.dim())
        .map(|i| {
            basis
                .state(i)
                .iter()
                .zip(omega)
                .map(|(&n, &w)| n as f64 * w)
                .sum()
        })
        .collect();
    Ok(FockOperator {
        basis: basis.clone(),
        matrix: SparseMatrix::from_real_diagonal(&diag),
        hermitian: true,
    })
}

pub fn number_operator(basis: &Arc<OccupationBasis>) -> FockOperator {
    let diag: Vec<f64> = (0..basis.dim()).map(|i| basis.total(i) as f64).collect();
    FockOperator {
        basis: basis.clone(),
        matrix: SparseMatrix::from_real_diagonal(&diag),
        hermitian: true,
    }
}

/// `φ(λ) = (a†(λ̄) + a(λ))/√2`, Hermitian by construction.
pub fn field_operator(basis: &Arc<OccupationBasis>, lambda: &[C64]) -> Result<FockOperator> {
    if lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("lambda", "non-finite form factor"));
    }
    let r = creation_matrix(basis, &conj(lambda))?;
    let matrix = r.add(&r.adjoint())?.scaled(C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0));
    Ok(FockOperator {
        basis: basis.clone(),
        matrix,
        hermitian: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn basis(m: usize, n: usize) -> Arc<OccupationBasis> {
        Arc::new(OccupationBasis::new(m, n).unwrap())
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn single_mode_ladder_coefficients() {
        let b = basis(1, 2);
        let lo = ladder_op(&b, 0, Ladder::Lower).unwrap();
        let up = ladder_op(&b, 0, Ladder::Raise).unwrap();
        assert_eq!(lo.matrix().get(0, 1), c(1.0));
        assert!((up.matrix().get(2, 1) - c(2f64.sqrt())).norm() < 1e-15);
        // top sector is annihilated by raise
        assert_eq!(up.matrix().nnz(), 2);
        let one = FockVector::occupation(b.clone(), &[1]).unwrap();
        assert_eq!(lo.apply(&one).unwrap(), FockVector::vacuum(b.clone()));
    }

    #[test]
    fn lower_kills_vacuum() {
        let b = basis(3, 2);
        let vac = FockVector::vacuum(b.clone());
        for m in 0..3 {
            let lo = ladder_op(&b, m, Ladder::Lower).unwrap();
            assert_eq!(lo.apply(&vac).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn lower_is_exact_adjoint_of_raise() {
        let b = basis(3, 3);
        for m in 0..3 {
            let lo = ladder_op(&b, m, Ladder::Lower).unwrap();
            let up = ladder_op(&b, m, Ladder::Raise).unwrap();
            assert_eq!(lo.matrix().to_dense(), up.matrix().to_dense().adjoint());
        }
    }

    #[test]
    fn identity_lifts_to_number_operator() {
        let b = basis(3, 3);
        let dg = second_quantization(&b, &DMatrix::identity(3, 3)).unwrap();
        let n = number_operator(&b);
        assert_eq!(dg.matrix().to_dense(), n.matrix().to_dense());
    }

    #[test]
    fn diagonal_second_quantization_spectrum() {
        let b = basis(2, 2);
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.3), c(0.5)]));
        let dg = second_quantization(&b, &s).unwrap();
        let mut diag: Vec<f64> = dg.matrix().diagonal().iter().map(|z| z.re).collect();
        diag.sort_by(f64::total_cmp);
        let expect = [0.0, 0.3, 0.5, 0.6, 0.8, 1.0];
        for (x, e) in diag.iter().zip(expect) {
            assert!((x - e).abs() < 1e-15);
        }
        let fe = free_energy(&b, &[0.3, 0.5]).unwrap();
        assert_eq!(fe.matrix().to_dense(), dg.matrix().to_dense());
    }

    #[test]
    fn non_hermitian_one_particle_rejected() {
        let b = basis(2, 2);
        let mut s = DMatrix::<C64>::zeros(2, 2);
        s[(0, 1)] = c(1.0);
        assert!(matches!(second_quantization(&b, &s), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn second_quantization_kills_vacuum_and_is_sector_diagonal() {
        let b = basis(3, 3);
        let mut s = DMatrix::<C64>::zeros(3, 3);
        s[(0, 1)] = C64::new(0.2, 0.7);
        s[(1, 0)] = C64::new(0.2, -0.7);
        s[(2, 2)] = c(1.3);
        let dg = second_quantization(&b, &s).unwrap();
        assert_eq!(dg.apply(&FockVector::vacuum(b.clone())).unwrap().norm(), 0.0);
        for (r, col, _) in dg.matrix().triplets() {
            assert_eq!(b.total(r), b.total(col));
        }
        assert!(dg.matrix().hermitian_defect() < 1e-15);
    }

    #[test]
    fn number_on_two_one() {
        let b = basis(2, 3);
        let v = FockVector::occupation(b.clone(), &[2, 1]).unwrap();
        let nv = number_operator(&b).apply(&v).unwrap();
        assert_eq!(nv.coeffs(), v.coeffs().iter().map(|z| z * 3.0).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn field_operator_basics() {
        let b = basis(1, 3);
        let zero = field_operator(&b, &[c(0.0)]).unwrap();
        assert_eq!(zero.matrix().nnz(), 0);
        let phi = field_operator(&b, &[c(0.7)]).unwrap();
        assert!((phi.matrix().get(0, 1) - c(0.7 / 2f64.sqrt())).norm() < 1e-15);

        // <Ω, φ² Ω> = |λ|²/2 by expanding a a† on the vacuum.
        let b3 = basis(3, 2);
        let lambda = [C64::new(0.3, 0.4), C64::new(-1.0, 0.2), c(0.5)];
        let phi = field_operator(&b3, &lambda).unwrap();
        let vac = FockVector::vacuum(b3.clone());
        let pv = phi.apply(&vac).unwrap();
        let expect: f64 = lambda.iter().map(|z| z.norm_sqr()).sum::<f64>() / 2.0;
        assert!((crate::vecops::norm_sqr(pv.coeffs()) - expect).abs() < 1e-14);
        assert!(phi.matrix().hermitian_defect() == 0.0);
    }

    #[test]
    fn field_is_sum_of_ladder_parts() {
        let b = basis(2, 3);
        let l1 = [C64::new(0.3, 0.1), c(0.2)];
        let l2 = [c(-0.4), C64::new(0.0, 0.9)];
        let (x, y) = (C64::new(0.5, -0.2), C64::new(1.5, 0.3));
        let combo: Vec<C64> = l1.iter().zip(&l2).map(|(p, q)| x * p + y * q).collect();
        let lhs = annihilation(&b, &combo).unwrap().matrix().to_dense();
        let rhs = annihilation(&b, &l1).unwrap().matrix().to_dense() * x
            + annihilation(&b, &l2).unwrap().matrix().to_dense() * y;
        assert!((lhs - rhs).norm() < 1e-14);
        let phi = field_operator(&b, &l1).unwrap().matrix().to_dense();
        let ldag: Vec<C64> = l1.iter().map(|z| z.conj()).collect();
        let parts = (creation(&b, &ldag).unwrap().matrix().to_dense()
            + annihilation(&b, &l1).unwrap().matrix().to_dense())
            * C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!((phi - parts).norm() < 1e-14);
    }

    #[test]
    fn sector_weights_partition_the_norm() {
        let b = basis(2, 2);
        let coeffs: Vec<C64> = (0..b.dim()).map(|i| c(i as f64 + 1.0)).collect();
        let v = FockVector::new(b.clone(), coeffs).unwrap();
        let w = v.sector_weights();
        assert_eq!(w, vec![1.0, 4.0 + 9.0, 16.0 + 25.0 + 36.0]);
    }
}
