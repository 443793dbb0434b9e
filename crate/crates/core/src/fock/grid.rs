use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Discretized one-particle space: momentum nodes, quadrature weights and
/// boson energies.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    k: Vec<f64>,
    weights: Vec<f64>,
    omega: Vec<f64>,
    mass: f64,
    k_min: f64,
    k_max: f64,
}

impl ModeGrid {
    /// Builds a grid from explicit samples, checking the structural invariants.
    pub fn new(k: Vec<f64>, weights: Vec<f64>, omega: Vec<f64>, mass: f64, k_min: f64, k_max: f64) -> Result<Self> {
        let m = k.len();
        if m == 0 {
            return Err(Error::invalid("modes", "at least one mode is required"));
        }
        if weights.len() != m || omega.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: weights.len().min(omega.len()),
            });
        }
        if !(mass >= 0.0) {
            return Err(Error::invalid("mass", "must be >= 0"));
        }
        if !(k_min > 0.0 && k_max > k_min) {
            return Err(Error::invalid("k_min", "need 0 < k_min < k_max"));
        }
        if k.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("k_points", "must be strictly increasing"));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("weights", "must be positive and finite"));
        }
        if omega.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("omega", "must be positive and finite"));
        }
        Ok(Self {
            k,
            weights,
            omega,
            mass,
            k_min,
            k_max,
        })
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn k_points(&self) -> &[f64] {
        &self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }
}
