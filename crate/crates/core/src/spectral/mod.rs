//! Ground eigenspaces, shifted resolvent solves and operator norms for finite
//! Hermitian operators.

mod dense;
mod lanczos;

pub use dense::{eigh, spectral_norm, DenseEigen};

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::check_hermitian;
use crate::rng::{random_unit_vector, seeded};
use crate::sparse::SparseMatrix;
use crate::vecops::{axpy, dot, norm, norm_sqr, normalize, zeros};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    /// Dimensions at or below this use dense factorizations.
    pub dense_threshold: usize,
    /// Relative eigen-residual tolerance, multiplied by the spectral scale.
    pub eigen_tol: f64,
    /// Relative cluster width, multiplied by the spectral scale.
    pub gap_rel: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Largest cluster the iterative path will lock before giving up on finding the gap.
    pub max_cluster: usize,
    pub seed: u64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            dense_threshold: 600,
            eigen_tol: 1e-10,
            gap_rel: 1e-8,
            krylov_dim: 120,
            max_restarts: 200,
            max_cluster: 16,
            seed: 0,
            cg_tol: 1e-10,
            cg_max_iter: 20_000,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eigen_tol", self.eigen_tol),
            ("gap_rel", self.gap_rel),
            ("cg_tol", self.cg_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if self.krylov_dim < 2 {
            return Err(Error::invalid("krylov_dim", "must be at least 2"));
        }
        if self.max_restarts == 0 || self.cg_max_iter == 0 || self.max_cluster == 0 {
            return Err(Error::invalid("max_iterations", "must be positive"));
        }
        Ok(())
    }
}

/// Spectral scale used to make tolerances relative: `max(1, ‖H‖_∞)`.
pub fn spectral_scale(h: &SparseMatrix) -> f64 {
    h.row_sum_norm().max(1.0)
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub energy: f64,
    /// Orthonormal basis of the near-ground cluster.
    pub vectors: Vec<Vec<C64>>,
    pub multiplicity: usize,
    /// Distance from the ground energy to the first eigenvalue outside the
    /// cluster; infinite when the cluster is the whole space.
    pub gap: f64,
    pub residuals: Vec<f64>,
    /// Weight of each cluster vector in the top boson-number sector; filled by
    /// callers that know the Fock structure.
    pub top_sector_weights: Vec<f64>,
    pub scale: f64,
    pub cluster_width: f64,
    /// Full decomposition when the dense path was taken, reused by resolvent solves.
    pub dense: Option<Arc<DenseEigen>>,
}

impl GroundStateResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// True when the gap is too small relative to the cluster width to trust
    /// the reported multiplicity.
    pub fn is_ambiguous(&self) -> bool {
        self.gap < 10.0 * self.cluster_width
    }
}

/// Lowest eigenvalue of `h` and every eigenvector within the cluster width of it.
pub fn ground_eigenspace(h: &SparseMatrix, cfg: &SpectralConfig) -> Result<GroundStateResult> {
    cfg.validate()?;
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::invalid("H", "must be a non-empty square matrix"));
    }
    check_hermitian("H", h)?;
    let scale = spectral_scale(h);
    let width = cfg.gap_rel * scale;
    if h.nrows() <= cfg.dense_threshold {
        dense_ground(h, scale, width)
    } else {
        iterative_ground(h, cfg, scale, width)
    }
}

fn residual_norm(h: &SparseMatrix, v: &[C64], e: f64) -> f64 {
    let mut r = h.matvec(v);
    axpy(C64::new(-e, 0.0), v, &mut r);
    norm(&r)
}

fn dense_ground(h: &SparseMatrix, scale: f64, width: f64) -> Result<GroundStateResult> {
    let eig = eigh(&h.to_dense());
    let e0 = eig.values[0];
    let m = eig.values.iter().take_while(|&&l| l - e0 <= width).count();
    let gap = eig.values.get(m).map_or(f64::INFINITY, |&l| l - e0);
    let vectors: Vec<Vec<C64>> = (0..m).map(|i| eig.vector(i)).collect();
    let residuals = vectors.iter().map(|v| residual_norm(h, v, e0)).collect();
    Ok(GroundStateResult {
        energy: e0,
        vectors,
        multiplicity: m,
        gap,
        residuals,
        top_sector_weights: Vec::new(),
        scale,
        cluster_width: width,
        dense: Some(Arc::new(eig)),
    })
}

/// Locks Lanczos eigenvectors one at a time, each computed in the complement of
/// the previous ones, until one lands outside the cluster window. A final
/// Rayleigh-Ritz step over everything locked separates cluster from gap.
fn iterative_ground(h: &SparseMatrix, cfg: &SpectralConfig, scale: f64, width: f64) -> Result<GroundStateResult> {
    let n = h.nrows();
    let tol = cfg.eigen_tol * scale;
    let mut rng = seeded(cfg.seed);
    let mut locked: Vec<Vec<C64>> = Vec::new();
    let mut lowest = f64::INFINITY;
    loop {
        if locked.len() == n {
            break;
        }
        if locked.len() > cfg.max_cluster {
            return Err(Error::NoConvergence {
                method: "cluster detection",
                iterations: locked.len(),
                residual: f64::NAN,
            });
        }
        let pair = lanczos::lowest_in_complement(h, &locked, cfg.krylov_dim, cfg.max_restarts, tol, &mut rng)?;
        locked.push(pair.vector);
        if pair.value > lowest + width {
            break;
        }
        lowest = lowest.min(pair.value);
    }

    let m = locked.len();
    let proj = DMatrix::from_fn(m, m, |i, j| dot(&locked[i], &h.matvec(&locked[j])));
    let small = eigh(&proj);
    let e0 = small.values[0];
    let keep = small.values.iter().take_while(|&&l| l - e0 <= width).count();
    let gap = small.values.get(keep).map_or(f64::INFINITY, |&l| l - e0);
    let vectors: Vec<Vec<C64>> = (0..keep)
        .map(|c| {
            let mut v = zeros(n);
            for (i, li) in locked.iter().enumerate() {
                axpy(small.vectors[(i, c)], li, &mut v);
            }
            normalize(&mut v);
            v
        })
        .collect();
    let residuals = vectors.iter().map(|v| residual_norm(h, v, e0)).collect();
    Ok(GroundStateResult {
        energy: e0,
        vectors,
        multiplicity: keep,
        gap,
        residuals,
        top_sector_weights: Vec::new(),
        scale,
        cluster_width: width,
        dense: None,
    })
}

/// Solves `(H − E + ω) x = b` for real shifts `ω > 0`.
///
/// Reuses a dense eigendecomposition when one is available; otherwise runs
/// conjugate gradients and reports breakdown as indefiniteness.
pub struct ResolventSolver<'a> {
    h: &'a SparseMatrix,
    energy: f64,
    cfg: SpectralConfig,
    dense: Option<Arc<DenseEigen>>,
}

impl<'a> ResolventSolver<'a> {
    pub fn new(h: &'a SparseMatrix, energy: f64, cfg: &SpectralConfig, dense: Option<Arc<DenseEigen>>) -> Self {
        let dense = dense.or_else(|| {
            (h.nrows() <= cfg.dense_threshold).then(|| Arc::new(eigh(&h.to_dense())))
        });
        Self {
            h,
            energy,
            cfg: cfg.clone(),
            dense,
        }
    }

    /// Builds the solver from a ground-state result, reusing its factorization.
    pub fn for_ground_state(h: &'a SparseMatrix, gs: &GroundStateResult, cfg: &SpectralConfig) -> Self {
        Self::new(h, gs.energy, cfg, gs.dense.clone())
    }

    pub fn solve(&self, shift: f64, rhs: &[C64]) -> Result<Vec<C64>> {
        if !(shift > 0.0) {
            return Err(Error::invalid("shift", "must be positive"));
        }
        if rhs.len() != self.h.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.h.nrows(),
                found: rhs.len(),
            });
        }
        let rhs_norm = norm(rhs);
        if rhs_norm == 0.0 {
            return Ok(zeros(rhs.len()));
        }
        let x = match &self.dense {
            Some(eig) => {
                let lowest = eig.values[0] - self.energy + shift;
                if lowest <= 0.0 {
                    return Err(Error::Indefinite { shift });
                }
                let e = self.energy;
                eig.apply_function(rhs, |l| C64::new(1.0 / (l - e + shift), 0.0))
            }
            None => self.cg(shift, rhs, rhs_norm)?,
        };
        Ok(x)
    }

    /// `‖(H − E + ω)x − b‖`.
    pub fn residual(&self, shift: f64, x: &[C64], rhs: &[C64]) -> f64 {
        let mut r = self.h.matvec(x);
        axpy(C64::new(shift - self.energy, 0.0), x, &mut r);
        axpy(C64::new(-1.0, 0.0), rhs, &mut r);
        norm(&r)
    }

    fn cg(&self, shift: f64, rhs: &[C64], rhs_norm: f64) -> Result<Vec<C64>> {
        let n = rhs.len();
        let sigma = C64::new(shift - self.energy, 0.0);
        let mut x = zeros(n);
        let mut r = rhs.to_vec();
        let mut p = r.clone();
        let mut ap = zeros(n);
        let mut rr = norm_sqr(&r);
        let target = self.cfg.cg_tol * rhs_norm;
        for _ in 0..self.cfg.cg_max_iter {
            if rr.sqrt() <= target {
                // Guard against drift between the recursive and true residuals.
                if self.residual(shift, &x, rhs) <= target {
                    return Ok(x);
                }
                r = rhs.to_vec();
                let mut ax = self.h.matvec(&x);
                axpy(sigma, &x, &mut ax);
                axpy(C64::new(-1.0, 0.0), &ax, &mut r);
                p = r.clone();
                rr = norm_sqr(&r);
            }
            self.h.matvec_into(&p, &mut ap);
            axpy(sigma, &p, &mut ap);
            let pap = dot(&p, &ap).re;
            if !(pap > 0.0) {
                return Err(Error::Indefinite { shift });
            }
            let a = rr / pap;
            axpy(C64::new(a, 0.0), &p, &mut x);
            axpy(C64::new(-a, 0.0), &ap, &mut r);
            let rr_new = norm_sqr(&r);
            let b = rr_new / rr;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + *pi * b;
            }
            rr = rr_new;
        }
        Err(Error::NoConvergence {
            method: "conjugate gradient",
            iterations: self.cfg.cg_max_iter,
            residual: self.residual(shift, &x, rhs) / rhs_norm,
        })
    }
}

/// One-shot `(H − E + ω)⁻¹ b`.
pub fn resolvent_apply(h: &SparseMatrix, energy: f64, shift: f64, rhs: &[C64], cfg: &SpectralConfig) -> Result<Vec<C64>> {
    ResolventSolver::new(h, energy, cfg, None).solve(shift, rhs)
}

/// Largest singular value of a sparse matrix: dense SVD below the threshold,
/// power iteration on `X†X` above it.
pub fn operator_norm(x: &SparseMatrix, cfg: &SpectralConfig) -> Result<f64> {
    if x.nrows().max(x.ncols()) <= cfg.dense_threshold {
        return Ok(spectral_norm(&x.to_dense()));
    }
    let mut rng = seeded(cfg.seed ^ 0x5eed);
    let mut v = random_unit_vector(&mut rng, x.ncols());
    let mut est = 0.0f64;
    let max_iter = cfg.cg_max_iter;
    for _ in 0..max_iter {
        let w = x.adjoint_matvec(&x.matvec(&v));
        let lam = norm(&w);
        if lam == 0.0 {
            return Ok(0.0);
        }
        v = w;
        normalize(&mut v);
        let converged = (lam - est).abs() <= 1e-7 * lam;
        est = lam;
        if converged {
            return Ok(est.sqrt());
        }
    }
    Err(Error::NoConvergence {
        method: "power iteration",
        iterations: max_iter,
        residual: f64::NAN,
    })
}

pub fn operator_norm_diff(x: &SparseMatrix, y: &SparseMatrix, cfg: &SpectralConfig) -> Result<f64> {
    operator_norm(&x.sub(y)?, cfg)
}

/// All eigenvalues, ascending.
pub fn full_spectrum_small(h: &SparseMatrix, cfg: &SpectralConfig) -> Result<Vec<f64>> {
    if h.nrows() > cfg.dense_threshold {
        return Err(Error::TooLargeForDense {
            dim: h.nrows(),
            threshold: cfg.dense_threshold,
        });
    }
    check_hermitian("H", h)?;
    Ok(eigh(&h.to_dense()).values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::gaussian;
    use alloc::vec;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn random_hermitian(n: usize, density: f64, seed: u64) -> SparseMatrix {
        use rand::Rng;
        let mut rng = seeded(seed);
        let mut b = crate::sparse::TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, c(rng.random::<f64>() * 4.0));
            for j in (i + 1)..n {
                if rng.random::<f64>() < density {
                    let z = gaussian(&mut rng) * 0.3;
                    b.push(i, j, z);
                    b.push(j, i, z.conj());
                }
            }
        }
        b.build()
    }

    #[test]
    fn diagonal_cluster() {
        let h = SparseMatrix::from_real_diagonal(&[0.0, 0.0, 1.0]);
        let gs = ground_eigenspace(&h, &SpectralConfig::default()).unwrap();
        assert_eq!(gs.energy, 0.0);
        assert_eq!(gs.multiplicity, 2);
        assert_eq!(gs.gap, 1.0);
    }

    #[test]
    fn lanczos_matches_dense_with_degeneracy() {
        // Shift a random matrix so that its lowest level is exactly doubly degenerate.
        let n = 160;
        let base = eigh(&random_hermitian(n, 0.05, 11).to_dense());
        let mut vals = base.values.clone();
        vals[1] = vals[0];
        let m = DenseEigen {
            values: vals.clone(),
            vectors: base.vectors.clone(),
        }
        .function_matrix(c);
        let h = SparseMatrix::from_dense(&m);
        let dense_cfg = SpectralConfig::default();
        let iter_cfg = SpectralConfig {
            dense_threshold: 10,
            ..SpectralConfig::default()
        };
        let d = ground_eigenspace(&h, &dense_cfg).unwrap();
        let l = ground_eigenspace(&h, &iter_cfg).unwrap();
        assert_eq!(d.multiplicity, 2);
        assert_eq!(l.multiplicity, 2);
        assert!((d.energy - l.energy).abs() < 1e-9);
        assert!((d.gap - l.gap).abs() < 1e-7);
        for v in &l.vectors {
            assert!(residual_norm(&h, v, l.energy) < 1e-9 * l.scale);
        }
        assert!(dot(&l.vectors[0], &l.vectors[1]).norm() < 1e-10);
    }

    #[test]
    fn lanczos_is_deterministic() {
        let h = random_hermitian(200, 0.03, 5);
        let cfg = SpectralConfig {
            dense_threshold: 10,
            ..SpectralConfig::default()
        };
        let a = ground_eigenspace(&h, &cfg).unwrap();
        let b = ground_eigenspace(&h, &cfg).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.multiplicity, b.multiplicity);
    }

    #[test]
    fn resolvent_examples() {
        let cfg = SpectralConfig::default();
        let h = SparseMatrix::zeros(1, 1);
        let x = resolvent_apply(&h, 0.0, 2.0, &[c(1.0)], &cfg).unwrap();
        assert_eq!(x, vec![c(0.5)]);
        let x0 = resolvent_apply(&h, 0.0, 2.0, &[c(0.0)], &cfg).unwrap();
        assert_eq!(x0, vec![c(0.0)]);
    }

    #[test]
    fn cg_matches_dense_inverse() {
        let h = random_hermitian(50, 0.2, 3);
        let e0 = eigh(&h.to_dense()).values[0];
        let mut rng = seeded(9);
        let rhs = random_unit_vector(&mut rng, 50);
        let cg_cfg = SpectralConfig {
            dense_threshold: 1,
            ..SpectralConfig::default()
        };
        let solver = ResolventSolver::new(&h, e0, &cg_cfg, None);
        let x = solver.solve(0.3, &rhs).unwrap();
        assert!(solver.residual(0.3, &x, &rhs) <= 1e-10);
        let mut m = h.to_dense();
        for i in 0..50 {
            m[(i, i)] += c(0.3 - e0);
        }
        let exact = m.try_inverse().unwrap() * nalgebra::DVector::from_column_slice(&rhs);
        let diff = exact.iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8);
    }

    #[test]
    fn indefinite_shift_is_named() {
        let h = SparseMatrix::from_real_diagonal(&[-1.0, 0.0, 2.0]);
        let cfg = SpectralConfig {
            dense_threshold: 0,
            ..SpectralConfig::default()
        };
        let err = resolvent_apply(&h, 0.0, 0.5, &[c(1.0), c(1.0), c(1.0)], &cfg).unwrap_err();
        assert_eq!(err, Error::Indefinite { shift: 0.5 });
        let err = resolvent_apply(&h, 0.0, 0.5, &[c(1.0), c(1.0), c(1.0)], &SpectralConfig::default()).unwrap_err();
        assert_eq!(err, Error::Indefinite { shift: 0.5 });
    }

    #[test]
    fn norm_examples() {
        let cfg = SpectralConfig::default();
        let x = SparseMatrix::from_real_diagonal(&[3.0, -1.0]);
        assert_eq!(operator_norm_diff(&x, &x, &cfg).unwrap(), 0.0);
        let z = SparseMatrix::zeros(2, 2);
        assert!((operator_norm_diff(&x, &z, &cfg).unwrap() - 3.0).abs() < 1e-12);
        let a = random_hermitian(30, 0.3, 1);
        let b = random_hermitian(30, 0.3, 2);
        let dense = operator_norm_diff(&a, &b, &cfg).unwrap();
        let power = operator_norm_diff(
            &a,
            &b,
            &SpectralConfig {
                dense_threshold: 0,
                ..SpectralConfig::default()
            },
        )
        .unwrap();
        assert!((dense - power).abs() <= 1e-6 * dense);
    }

    #[test]
    fn full_spectrum_rejects_large() {
        let h = SparseMatrix::identity(5);
        let cfg = SpectralConfig {
            dense_threshold: 4,
            ..SpectralConfig::default()
        };
        assert!(matches!(full_spectrum_small(&h, &cfg), Err(Error::TooLargeForDense { .. })));
    }
}
