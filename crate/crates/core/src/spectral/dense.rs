use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct DenseEigen {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: DMatrix<C64>,
}

impl DenseEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i).iter().copied().collect()
    }

    /// `Σ_i f(λ_i) v_i v_i† x`.
    pub fn apply_function(&self, x: &[C64], f: impl Fn(f64) -> C64) -> Vec<C64> {
        let xv = nalgebra::DVector::from_column_slice(x);
        let mut coef = self.vectors.ad_mul(&xv);
        for (c, &l) in coef.iter_mut().zip(&self.values) {
            *c *= f(l);
        }
        (&self.vectors * coef).iter().copied().collect()
    }

    /// Dense matrix `Σ_i f(λ_i) v_i v_i†`.
    pub fn function_matrix(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Hermitian eigendecomposition. Uses the real symmetric solver when every
/// entry is real, which is several times faster.
pub fn eigh(m: &DMatrix<C64>) -> DenseEigen {
    let n = m.nrows();
    if n == 0 {
        return DenseEigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let (values, vectors) = if is_real(m) {
        let re = m.map(|z| z.re);
        let e = re.symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let e = m.clone().symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    DenseEigen {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// Largest singular value of a dense matrix.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_orthonormal() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(2.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(-1.0, 0.0),
            ],
        );
        let e = eigh(&m);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let u = &e.vectors;
        assert!((u.adjoint() * u - DMatrix::<C64>::identity(3, 3)).norm() < 1e-13);
        let rebuilt = e.function_matrix(|l| C64::new(l, 0.0));
        assert!((rebuilt - m).norm() < 1e-13);
    }
}
