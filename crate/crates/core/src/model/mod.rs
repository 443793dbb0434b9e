//! Coupled atom-field Hamiltonians on `C^n ⊗ Fock`.
//!
//! Product-space vectors are indexed `atom * fock_dim + fock`.

mod grid;
mod gsb;
mod pf;

pub use grid::{dispersion_grid, form_factor_preset, Dispersion, Quadrature, Window};
pub use gsb::{assemble_gsb, spin_boson_preset, CouplingTerm, GsbSpec};
pub use pf::{assemble_pf_toy, pf_positions, square_well, PfParts, PfToySpec, PF_FORM_FACTOR_LIMIT};

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::fock::{sector_weights, OccupationBasis};
use crate::sparse::SparseMatrix;
use crate::spectral::{eigh, ground_eigenspace, GroundStateResult, SpectralConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Gsb,
    PfToy,
}

/// Spectrum of the uncoupled left factor (the atom, or electron ⊗ spin).
#[derive(Debug, Clone)]
pub struct AtomSpectrum {
    pub values: Vec<f64>,
    /// Orthonormal basis of the lowest eigenspace.
    pub ground_vectors: Vec<Vec<C64>>,
    pub multiplicity: usize,
    /// Second-lowest distinct eigenvalue minus the lowest; infinite if the
    /// spectrum is a single point.
    pub gap: f64,
}

impl AtomSpectrum {
    pub fn of(m: &DMatrix<C64>) -> Self {
        let e = eigh(m);
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let e0 = e.values[0];
        let width = 1e-10 * scale;
        let mult = e.values.iter().take_while(|&&l| l - e0 <= width).count();
        let gap = e.values.get(mult).map_or(f64::INFINITY, |&l| l - e0);
        Self {
            ground_vectors: (0..mult).map(|i| e.vector(i)).collect(),
            values: e.values,
            multiplicity: mult,
            gap,
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }
}

/// `H₀`, `H_I` and `H = H₀ + g·H_I` with the operators the checks need.
#[derive(Debug, Clone)]
pub struct AssembledModel {
    pub kind: ModelKind,
    pub left_dim: usize,
    pub basis: Arc<OccupationBasis>,
    pub h0: SparseMatrix,
    pub h_int: SparseMatrix,
    pub h: SparseMatrix,
    pub coupling: f64,
    /// `T_m = [a_m, H_I]` on the product space.
    pub t_ops: Vec<SparseMatrix>,
    /// `1 ⊗ a_m`.
    pub lowers: Vec<SparseMatrix>,
    /// `1 ⊗ N`.
    pub number: SparseMatrix,
    /// `1 ⊗ dΓ(ω)`.
    pub field_energy: SparseMatrix,
    pub omega: Vec<f64>,
    pub mass: f64,
    pub left_hamiltonian: DMatrix<C64>,
    pub atom: AtomSpectrum,
    pub pf: Option<PfParts>,
}

impl AssembledModel {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn fock_dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn modes(&self) -> usize {
        self.omega.len()
    }

    /// `E(H₀) = E(A)`: the free field is non-negative with vacuum energy zero.
    pub fn e_h0(&self) -> f64 {
        self.atom.ground_energy()
    }

    /// `H̄₀ = H₀ − E(H₀)`.
    pub fn h0_bar(&self) -> SparseMatrix {
        let shift = SparseMatrix::identity(self.dim()).scaled(C64::new(-self.e_h0(), 0.0));
        self.h0.add(&shift).expect("same dimension")
    }

    /// Orthonormal basis of `P_A ⊗ P_Ω`.
    pub fn ground_product_vectors(&self) -> Vec<Vec<C64>> {
        let d = self.fock_dim();
        self.atom
            .ground_vectors
            .iter()
            .map(|a| {
                let mut v = crate::vecops::zeros(self.dim());
                for (i, &ai) in a.iter().enumerate() {
                    v[i * d] = ai;
                }
                v
            })
            .collect()
    }

    pub fn sector_weights(&self, v: &[C64]) -> Vec<f64> {
        sector_weights(&self.basis, self.left_dim, v)
    }

    /// Fraction of `‖v‖²` in the top boson-number sector.
    pub fn top_sector_weight(&self, v: &[C64]) -> f64 {
        let w = self.sector_weights(v);
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            0.0
        } else {
            w[w.len() - 1] / total
        }
    }

    /// Ground cluster of `H` with top-sector weights filled in.
    pub fn ground_state(&self, cfg: &SpectralConfig) -> Result<GroundStateResult> {
        let mut gs = ground_eigenspace(&self.h, cfg)?;
        gs.top_sector_weights = gs.vectors.iter().map(|v| self.top_sector_weight(v)).collect();
        Ok(gs)
    }
}

pub(crate) fn lift(left_dim: usize, x: &SparseMatrix) -> SparseMatrix {
    SparseMatrix::identity(left_dim).kron(x)
}
