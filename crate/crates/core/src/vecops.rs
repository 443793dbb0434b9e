//! Small dense-vector kernels shared by the solvers and the verifiers.
//!
//! All reductions run in ascending index order so results are bit-reproducible.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

/// `<x, y>` with the first argument conjugated.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        acc += a.conj() * b;
    }
    acc
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    norm_sqr(x).sqrt()
}

/// `y += a * x`
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(a: C64, x: &mut [C64]) {
    for xi in x.iter_mut() {
        *xi *= a;
    }
}

pub fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn add(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// Normalizes in place and returns the original norm. A zero vector is left untouched.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(C64::new(1.0 / n, 0.0), x);
    }
    n
}

/// Removes the components of `x` along each (orthonormal) vector in `basis`.
pub fn orthogonalize_against(x: &mut [C64], basis: &[Vec<C64>]) {
    for b in basis {
        let c = dot(b, x);
        axpy(-c, b, x);
    }
}

pub fn zeros(n: usize) -> Vec<C64> {
    alloc::vec![C64::new(0.0, 0.0); n]
}

pub fn max_abs_diff(x: &[C64], y: &[C64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}
