use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::ModeGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dispersion {
    Massless,
    Massive(f64),
}

impl Dispersion {
    pub fn mass(&self) -> f64 {
        match *self {
            Dispersion::Massless => 0.0,
            Dispersion::Massive(nu) => nu,
        }
    }

    pub fn omega(&self, k: f64) -> f64 {
        let nu = self.mass();
        (k * k + nu * nu).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// M equal cells, nodes at cell midpoints.
    #[default]
    UniformMidpoint,
    /// M cells of equal logarithmic width, nodes at geometric midpoints.
    /// Suited to infrared studies: halving `k_min` while adding the same
    /// number of cells per octave leaves the existing cells untouched.
    GeometricMidpoint,
}

pub fn dispersion_grid(kind: Dispersion, k_min: f64, k_max: f64, modes: usize, quadrature: Quadrature) -> Result<ModeGrid> {
    if modes == 0 {
        return Err(Error::invalid("modes", "at least one mode is required"));
    }
    if !(k_min > 0.0 && k_max > k_min && k_max.is_finite()) {
        return Err(Error::invalid("k_min", "need 0 < k_min < k_max"));
    }
    if let Dispersion::Massive(nu) = kind {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::invalid("mass", "massive dispersion needs a positive mass"));
        }
    }
    let (k, w): (Vec<f64>, Vec<f64>) = match quadrature {
        Quadrature::UniformMidpoint => {
            let h = (k_max - k_min) / modes as f64;
            (0..modes).map(|m| (k_min + (m as f64 + 0.5) * h, h)).unzip()
        }
        Quadrature::GeometricMidpoint => {
            let r = (k_max / k_min).ln() / modes as f64;
            (0..modes)
                .map(|m| {
                    let lo = k_min * (m as f64 * r).exp();
                    let hi = k_min * ((m + 1) as f64 * r).exp();
                    ((lo * hi).sqrt(), hi - lo)
                })
                .unzip()
        }
    };
    let omega = k.iter().map(|&x| kind.omega(x)).collect();
    ModeGrid::new(k, w, omega, kind.mass(), k_min, k_max)
}

/// Cutoff function multiplying the power law in [`form_factor_preset`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Window {
    #[default]
    Unit,
    /// `exp(−(k/Λ)²)`
    Gaussian(f64),
}

impl Window {
    pub fn eval(&self, k: f64) -> f64 {
        match *self {
            Window::Unit => 1.0,
            Window::Gaussian(cut) => (-(k / cut) * (k / cut)).exp(),
        }
    }
}

/// `λ_m = ω_m^β · window(k_m) · √w_m`. The quadrature weight is folded in so
/// that continuum integrals over k become plain sums over modes.
pub fn form_factor_preset(grid: &ModeGrid, beta: f64, window: Window) -> Vec<C64> {
    grid.k_points()
        .iter()
        .zip(grid.omega())
        .zip(grid.weights())
        .map(|((&k, &om), &w)| C64::new(om.powf(beta) * window.eval(k) * w.sqrt(), 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_midpoint_example() {
        let g = dispersion_grid(Dispersion::Massless, 1.0, 2.0, 2, Quadrature::UniformMidpoint).unwrap();
        assert_eq!(g.k_points(), &[1.25, 1.75]);
        assert_eq!(g.omega(), &[1.25, 1.75]);
        assert_eq!(g.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn massive_floor() {
        let g = dispersion_grid(Dispersion::Massive(1.0), 0.0001, 0.0002, 1, Quadrature::UniformMidpoint).unwrap();
        assert!((g.omega()[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn weights_sum_to_interval() {
        for q in [Quadrature::UniformMidpoint, Quadrature::GeometricMidpoint] {
            let g = dispersion_grid(Dispersion::Massless, 0.1, 1.6, 8, q).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_cells_nest_under_octave_refinement() {
        let coarse = dispersion_grid(Dispersion::Massless, 0.1, 1.6, 8, Quadrature::GeometricMidpoint).unwrap();
        let fine = dispersion_grid(Dispersion::Massless, 0.05, 1.6, 10, Quadrature::GeometricMidpoint).unwrap();
        for (a, b) in coarse.k_points().iter().zip(&fine.k_points()[2..]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_zero_is_square_root_weight() {
        let g = dispersion_grid(Dispersion::Massless, 1.0, 2.0, 4, Quadrature::UniformMidpoint).unwrap();
        let l = form_factor_preset(&g, 0.0, Window::Unit);
        for (z, w) in l.iter().zip(g.weights()) {
            assert_eq!(z.re, w.sqrt());
        }
    }

    #[test]
    fn refinement_converges_to_the_integral() {
        // ∫_0.5^3 k e^{−k²} dk in closed form.
        let exact = 0.5 * ((-0.25f64).exp() - (-9.0f64).exp());
        let mut errs = Vec::new();
        for m in [8, 16, 32, 64] {
            let g = dispersion_grid(Dispersion::Massless, 0.5, 3.0, m, Quadrature::UniformMidpoint).unwrap();
            let l = form_factor_preset(&g, 0.5, Window::Gaussian(2f64.sqrt()));
            let s: f64 = l.iter().map(|z| z.norm_sqr()).sum();
            errs.push((s - exact).abs());
        }
        for w in errs.windows(2) {
            assert!(w[1] < w[0] / 3.0);
        }
    }
}
