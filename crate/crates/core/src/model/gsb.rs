use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{form_factor_preset, lift, AssembledModel, AtomSpectrum, ModelKind, Window};
use crate::error::{Error, Result};
use crate::fock::{
    check_dense_hermitian, field_operator, free_energy, number_operator, raise_matrix, ModeGrid, OccupationBasis,
    DEFAULT_DIMENSION_CAP,
};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct CouplingTerm {
    pub b: DMatrix<C64>,
    pub lambda: Vec<C64>,
}

/// Generalized spin-boson model `A ⊗ 1 + 1 ⊗ dΓ(ω) + α Σ_j B_j ⊗ φ(λ_j)`.
#[derive(Debug, Clone)]
pub struct GsbSpec {
    pub atom: DMatrix<C64>,
    pub couplings: Vec<CouplingTerm>,
    pub alpha: f64,
    pub grid: ModeGrid,
    pub n_max: usize,
    pub dimension_cap: usize,
}

impl GsbSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.atom.nrows();
        if n == 0 {
            return Err(Error::invalid("atom", "empty atom Hamiltonian"));
        }
        check_dense_hermitian("A", &self.atom)?;
        if self.couplings.is_empty() {
            return Err(Error::invalid("couplings", "at least one coupling term is required"));
        }
        for t in &self.couplings {
            if t.b.nrows() != n || t.b.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.b.nrows(),
                });
            }
            check_dense_hermitian("B", &t.b)?;
            if t.lambda.len() != self.grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.grid.len(),
                    found: t.lambda.len(),
                });
            }
            if t.lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::invalid("lambda", "non-finite form factor"));
            }
        }
        if !self.alpha.is_finite() {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        Ok(())
    }
}

fn pauli() -> (DMatrix<C64>, DMatrix<C64>) {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    (
        DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
    )
}

/// `A = (ε/2)σ_z + (Δ/2)σ_x`, `B = σ_z`, `λ` from the power-law preset.
pub fn spin_boson_preset(
    epsilon: f64,
    delta: f64,
    grid: ModeGrid,
    beta: f64,
    window: Window,
    alpha: f64,
    n_max: usize,
) -> GsbSpec {
    let (sz, sx) = pauli();
    let atom = sz.clone() * C64::new(epsilon / 2.0, 0.0) + sx * C64::new(delta / 2.0, 0.0);
    let lambda = form_factor_preset(&grid, beta, window);
    GsbSpec {
        atom,
        couplings: alloc::vec![CouplingTerm { b: sz, lambda }],
        alpha,
        grid,
        n_max,
        dimension_cap: DEFAULT_DIMENSION_CAP,
    }
}

pub fn assemble_gsb(spec: &GsbSpec) -> Result<AssembledModel> {
    spec.validate()?;
    let n = spec.atom.nrows();
    let basis = Arc::new(OccupationBasis::with_cap(spec.grid.len(), spec.n_max, spec.dimension_cap)?);
    let d = basis.dim();
    if (n as u128) * (d as u128) > spec.dimension_cap as u128 {
        return Err(Error::DimensionCap {
            requested: (n as u128) * (d as u128),
            cap: spec.dimension_cap,
            modes: spec.grid.len(),
            n_max: spec.n_max,
        });
    }

    let omega = spec.grid.omega().to_vec();
    let id_f = SparseMatrix::identity(d);
    let field_energy = lift(n, free_energy(&basis, &omega)?.matrix());
    let h0 = SparseMatrix::from_dense(&spec.atom).kron(&id_f).add(&field_energy)?;

    let mut h_int = SparseMatrix::zeros(n * d, n * d);
    let mut t_ops: Vec<SparseMatrix> = (0..omega.len()).map(|_| SparseMatrix::zeros(n * d, n * d)).collect();
    for term in &spec.couplings {
        let b = SparseMatrix::from_dense(&term.b);
        let phi = field_operator(&basis, &term.lambda)?;
        h_int = h_int.add(&b.kron(phi.matrix()))?;
        let b_lift = b.kron(&id_f);
        for (m, t) in t_ops.iter_mut().enumerate() {
            let c = term.lambda[m].conj() * core::f64::consts::FRAC_1_SQRT_2;
            *t = t.lin_comb(C64::new(1.0, 0.0), &b_lift, c)?;
        }
    }
    let h = h0.lin_comb(C64::new(1.0, 0.0), &h_int, C64::new(spec.alpha, 0.0))?;

    let lowers = (0..omega.len())
        .map(|m| Ok(lift(n, &raise_matrix(&basis, m)?.adjoint())))
        .collect::<Result<Vec<_>>>()?;
    let number = lift(n, number_operator(&basis).matrix());

    Ok(AssembledModel {
        kind: ModelKind::Gsb,
        left_dim: n,
        basis,
        h0,
        h_int,
        h,
        coupling: spec.alpha,
        t_ops,
        lowers,
        number,
        field_energy,
        omega,
        mass: spec.grid.mass(),
        left_hamiltonian: spec.atom.clone(),
        atom: AtomSpectrum::of(&spec.atom),
        pf: None,
    })
}
