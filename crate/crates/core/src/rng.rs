//! Seeded random test vectors and unitaries.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Uniformly distributed unit vector in `C^n`.
pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    let mut v = gaussian_vector(rng, n);
    crate::vecops::normalize(&mut v);
    v
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}
