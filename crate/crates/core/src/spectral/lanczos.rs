use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::rng::{random_unit_vector, SeededRng};
use crate::sparse::SparseMatrix;
use crate::vecops::{axpy, dot, norm, normalize, orthogonalize_against, scale, zeros};

pub(crate) struct RitzPair {
    pub value: f64,
    pub vector: Vec<C64>,
    pub residual: f64,
}

fn project_out(x: &mut [C64], locked: &[Vec<C64>], krylov: &[Vec<C64>]) {
    // Two passes of classical Gram-Schmidt keep the basis orthogonal to
    // working precision.
    for _ in 0..2 {
        orthogonalize_against(x, locked);
        orthogonalize_against(x, krylov);
    }
}

/// Lowest eigenpair of `h` restricted to the orthogonal complement of
/// `locked`, by explicitly restarted Lanczos with full reorthogonalization.
pub(crate) fn lowest_in_complement(
    h: &SparseMatrix,
    locked: &[Vec<C64>],
    krylov_dim: usize,
    max_restarts: usize,
    tol: f64,
    rng: &mut SeededRng,
) -> Result<RitzPair> {
    let n = h.nrows();
    let avail = n - locked.len();
    let k_max = krylov_dim.clamp(2, avail.max(2)).min(avail);

    let mut v = random_unit_vector(rng, n);
    project_out(&mut v, locked, &[]);
    if normalize(&mut v) == 0.0 {
        return Err(Error::invalid("start vector", "lies in the locked subspace"));
    }

    let mut best = RitzPair {
        value: f64::NAN,
        vector: v.clone(),
        residual: f64::INFINITY,
    };
    let mut w = zeros(n);
    for _ in 0..max_restarts.max(1) {
        let mut q: Vec<Vec<C64>> = Vec::with_capacity(k_max);
        let mut alpha: Vec<f64> = Vec::with_capacity(k_max);
        let mut beta: Vec<f64> = Vec::with_capacity(k_max);
        q.push(v.clone());
        loop {
            let j = q.len() - 1;
            h.matvec_into(&q[j], &mut w);
            let a = dot(&q[j], &w).re;
            alpha.push(a);
            axpy(C64::new(-a, 0.0), &q[j], &mut w);
            if j > 0 {
                axpy(C64::new(-beta[j - 1], 0.0), &q[j - 1], &mut w);
            }
            project_out(&mut w, locked, &q);
            let b = norm(&w);
            if q.len() == k_max || b <= 1e-14 * (a.abs() + 1.0) {
                break;
            }
            beta.push(b);
            let mut next = w.clone();
            scale(C64::new(1.0 / b, 0.0), &mut next);
            q.push(next);
        }

        let kk = alpha.len();
        let t = DMatrix::from_fn(kk, kk, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let e = t.symmetric_eigen();
        let mut imin = 0;
        for i in 1..kk {
            if e.eigenvalues[i] < e.eigenvalues[imin] {
                imin = i;
            }
        }
        let mut y = zeros(n);
        for (i, qi) in q.iter().enumerate() {
            axpy(C64::new(e.eigenvectors[(i, imin)], 0.0), qi, &mut y);
        }
        project_out(&mut y, locked, &[]);
        normalize(&mut y);
        let hy = h.matvec(&y);
        let value = dot(&y, &hy).re;
        let mut r = hy;
        axpy(C64::new(-value, 0.0), &y, &mut r);
        let residual = norm(&r);

        if residual < best.residual {
            best = RitzPair {
                value,
                vector: y.clone(),
                residual,
            };
        }
        if residual <= tol {
            return Ok(best);
        }
        v = y;
    }
    Err(Error::NoConvergence {
        method: "lanczos",
        iterations: max_restarts,
        residual: best.residual,
    })
}
