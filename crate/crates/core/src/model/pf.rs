use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{lift, AssembledModel, AtomSpectrum, ModelKind};
use crate::error::{Error, Result};
use crate::fock::{free_energy, number_operator, raise_matrix, ModeGrid, OccupationBasis, DEFAULT_DIMENSION_CAP};
use crate::sparse::{SparseMatrix, TripletBuilder};

/// Largest accepted `|φ̂_m| / ω_m`.
pub const PF_FORM_FACTOR_LIMIT: f64 = 1e12;

/// One-dimensional charged particle with spin on a periodic grid, coupled to
/// scalar photons.
///
/// `H = ((p − eA)²)/2m + V + dΓ(ω) − (e/2m) σ_z B`, split as `H₀ + e·H_I`.
/// The kinetic term of `H₀` is the three-point Laplacian; `p` in the coupling is
/// the central difference. The magnetic field uses `b(k) = k` in place of the
/// three-dimensional curl factor and keeps the phase `−i` so that the model
/// retains a Kramers-type antiunitary symmetry and an exact spin doublet.
#[derive(Debug, Clone)]
pub struct PfToySpec {
    pub n_x: usize,
    pub length: f64,
    pub mass: f64,
    pub charge: f64,
    /// Samples `V(x_i)` at the cell centres from [`pf_positions`].
    pub potential: Vec<f64>,
    pub grid: ModeGrid,
    /// Ultraviolet form factor `φ̂(k_m)`.
    pub form_factor: Vec<f64>,
    pub n_max: usize,
    pub dimension_cap: usize,
}

impl PfToySpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(n_x: usize, length: f64, mass: f64, charge: f64, potential: Vec<f64>, grid: ModeGrid, form_factor: Vec<f64>, n_max: usize) -> Self {
        Self {
            n_x,
            length,
            mass,
            charge,
            potential,
            grid,
            form_factor,
            n_max,
            dimension_cap: DEFAULT_DIMENSION_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 4 {
            return Err(Error::invalid("n_x", "need at least 4 grid points"));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::invalid("length", "must be positive"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("electron_mass", "must be positive"));
        }
        if !self.charge.is_finite() {
            return Err(Error::invalid("charge", "must be finite"));
        }
        if self.potential.len() != self.n_x {
            return Err(Error::DimensionMismatch {
                expected: self.n_x,
                found: self.potential.len(),
            });
        }
        if self.potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("potential", "non-finite sample"));
        }
        if self.form_factor.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                found: self.form_factor.len(),
            });
        }
        for (&f, &w) in self.form_factor.iter().zip(self.grid.omega()) {
            let r = (f / w).abs();
            if !(r.is_finite() && r <= PF_FORM_FACTOR_LIMIT) || !(f * w.sqrt()).is_finite() {
                return Err(Error::invalid("form_factor", "φ̂/ω exceeds the accepted range"));
            }
        }
        Ok(())
    }
}

/// Cell centres `x_i = −L/2 + (i + ½)L/N` of the periodic grid.
pub fn pf_positions(n_x: usize, length: f64) -> Vec<f64> {
    let h = length / n_x as f64;
    (0..n_x).map(|i| -length / 2.0 + (i as f64 + 0.5) * h).collect()
}

/// `−depth` on `|x| < half_width`, zero elsewhere.
pub fn square_well(positions: &[f64], depth: f64, half_width: f64) -> Vec<f64> {
    positions
        .iter()
        .map(|&x| if x.abs() < half_width { -depth } else { 0.0 })
        .collect()
}

/// Operators kept for the PF-specific checks.
#[derive(Debug, Clone)]
pub struct PfParts {
    pub positions: Vec<f64>,
    pub potential: Vec<f64>,
    pub mass: f64,
    pub charge: f64,
    pub length: f64,
    /// `h_p = −Δ/2m + V` on the grid.
    pub h_p: DMatrix<C64>,
    /// `x ⊗ 1 ⊗ 1`.
    pub position: SparseMatrix,
    /// `p ⊗ 1 ⊗ 1` with `p` the central difference.
    pub momentum: SparseMatrix,
    /// Position-dependent vector potential on the full space.
    pub vector_potential: SparseMatrix,
}

fn electron_ops(n: usize, length: f64) -> (DMatrix<C64>, DMatrix<C64>) {
    let h = length / n as f64;
    let mut lap = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut p = lap.clone();
    for i in 0..n {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        lap[(i, i)] += C64::new(-2.0 / (h * h), 0.0);
        lap[(i, l)] += C64::new(1.0 / (h * h), 0.0);
        lap[(i, r)] += C64::new(1.0 / (h * h), 0.0);
        // p = −i d/dx
        p[(i, r)] += C64::new(0.0, -1.0 / (2.0 * h));
        p[(i, l)] += C64::new(0.0, 1.0 / (2.0 * h));
    }
    (lap, p)
}

/// Builds `Σ_i |i⟩⟨i| ⊗ s ⊗ X_i` on `C^{n_x} ⊗ C² ⊗ Fock`.
fn electron_diagonal(blocks: &[SparseMatrix], spin: [f64; 2]) -> SparseMatrix {
    let d = blocks[0].nrows();
    let n = blocks.len() * 2 * d;
    let mut b = TripletBuilder::with_capacity(n, n, blocks.iter().map(|x| 2 * x.nnz()).sum());
    for (i, x) in blocks.iter().enumerate() {
        for (s, &sign) in spin.iter().enumerate() {
            let off = (2 * i + s) * d;
            for (r, c, v) in x.triplets() {
                b.push(off + r, off + c, v * sign);
            }
        }
    }
    b.build()
}

/// `A_i` and `B_i` on a Fock basis.
fn field_blocks(basis: &OccupationBasis, grid: &ModeGrid, phihat: &[f64], positions: &[f64]) -> Result<(Vec<SparseMatrix>, Vec<SparseMatrix>)> {
    let d = basis.dim();
    let raises = (0..grid.len()).map(|m| raise_matrix(basis, m)).collect::<Result<Vec<_>>>()?;
    let coef: Vec<f64> = (0..grid.len())
        .map(|m| phihat[m] * grid.weights()[m].sqrt() / (2.0 * grid.omega()[m]).sqrt())
        .collect();
    let mut a_blocks = Vec::with_capacity(positions.len());
    let mut b_blocks = Vec::with_capacity(positions.len());
    for &x in positions {
        let mut ta = TripletBuilder::new(d, d);
        let mut tb = TripletBuilder::new(d, d);
        for (m, r) in raises.iter().enumerate() {
            let k = grid.k_points()[m];
            let ph = C64::new(0.0, -k * x).exp();
            let up = ph * coef[m];
            let up_b = C64::new(0.0, -1.0) * ph * (coef[m] * k);
            for (row, col, v) in r.triplets() {
                ta.push(row, col, up * v);
                ta.push(col, row, (up * v).conj());
                tb.push(row, col, up_b * v);
                tb.push(col, row, (up_b * v).conj());
            }
        }
        a_blocks.push(ta.build());
        b_blocks.push(tb.build());
    }
    Ok((a_blocks, b_blocks))
}

/// Interaction part for a given Fock basis (charge enters through the `A²` term).
fn interaction(spec: &PfToySpec, basis: &OccupationBasis, positions: &[f64], p_el: &SparseMatrix) -> Result<(SparseMatrix, SparseMatrix)> {
    let d = basis.dim();
    let (a_blocks, b_blocks) = field_blocks(basis, &spec.grid, &spec.form_factor, positions)?;
    let a = electron_diagonal(&a_blocks, [1.0, 1.0]);
    let sz_b = electron_diagonal(&b_blocks, [1.0, -1.0]);
    let p = p_el.kron(&SparseMatrix::identity(2 * d));
    let inv2m = 1.0 / (2.0 * spec.mass);
    let pa = p.matmul(&a)?;
    let ap = a.matmul(&p)?;
    let a2 = a.matmul(&a)?;
    let h_int = pa
        .add(&ap)?
        .scaled(C64::new(-inv2m, 0.0))
        .lin_comb(C64::new(1.0, 0.0), &a2, C64::new(spec.charge * inv2m, 0.0))?
        .lin_comb(C64::new(1.0, 0.0), &sz_b, C64::new(-inv2m, 0.0))?;
    Ok((h_int, a))
}

/// Maps an operator on `C^left ⊗ Fock(big)` to `C^left ⊗ Fock(small)` by
/// keeping the leading Fock block of every left index pair.
fn restrict_fock(x: &SparseMatrix, left: usize, big: usize, small: usize) -> SparseMatrix {
    let mut b = TripletBuilder::new(left * small, left * small);
    for (r, c, v) in x.triplets() {
        let (lr, fr) = (r / big, r % big);
        let (lc, fc) = (c / big, c % big);
        if fr < small && fc < small {
            b.push(lr * small + fr, lc * small + fc, v);
        }
    }
    b.build()
}

pub fn assemble_pf_toy(spec: &PfToySpec) -> Result<AssembledModel> {
    spec.validate()?;
    let modes = spec.grid.len();
    let basis = Arc::new(OccupationBasis::with_cap(modes, spec.n_max, spec.dimension_cap)?);
    let d = basis.dim();
    let left = 2 * spec.n_x;
    let total = (left as u128) * (d as u128);
    if total > spec.dimension_cap as u128 {
        return Err(Error::DimensionCap {
            requested: total,
            cap: spec.dimension_cap,
            modes,
            n_max: spec.n_max,
        });
    }

    let positions = pf_positions(spec.n_x, spec.length);
    let (lap, p_dense) = electron_ops(spec.n_x, spec.length);
    let mut h_p = -lap * C64::new(1.0 / (2.0 * spec.mass), 0.0);
    for (i, &v) in spec.potential.iter().enumerate() {
        h_p[(i, i)] += C64::new(v, 0.0);
    }
    let p_el = SparseMatrix::from_dense(&p_dense);
    let id2 = SparseMatrix::identity(2);
    let left_h = SparseMatrix::from_dense(&h_p).kron(&id2);

    let omega = spec.grid.omega().to_vec();
    let field_energy = lift(left, free_energy(&basis, &omega)?.matrix());
    let h0 = left_h.kron(&SparseMatrix::identity(d)).add(&field_energy)?;
    let (h_int, a_full) = interaction(spec, &basis, &positions, &p_el)?;
    let h = h0.lin_comb(C64::new(1.0, 0.0), &h_int, C64::new(spec.charge, 0.0))?;

    // T_m = [a_m, H_I] without truncation artefacts: evaluate on a basis two
    // sectors larger, then keep the physical block.
    let big = OccupationBasis::with_cap(modes, spec.n_max + 2, spec.dimension_cap)?;
    let db = big.dim();
    let (h_int_big, _) = interaction(spec, &big, &positions, &p_el)?;
    let mut t_ops = Vec::with_capacity(modes);
    let mut lowers = Vec::with_capacity(modes);
    for m in 0..modes {
        let lower_big = lift(left, &raise_matrix(&big, m)?.adjoint());
        let t_big = lower_big.commutator(&h_int_big)?;
        t_ops.push(restrict_fock(&t_big, left, db, d));
        lowers.push(lift(left, &raise_matrix(&basis, m)?.adjoint()));
    }
    let number = lift(left, number_operator(&basis).matrix());

    let x_el = SparseMatrix::from_real_diagonal(&positions);
    let id_rest = SparseMatrix::identity(2 * d);
    let left_dense = h_p.kronecker(&DMatrix::<C64>::identity(2, 2));
    let pf = PfParts {
        positions: positions.clone(),
        potential: spec.potential.clone(),
        mass: spec.mass,
        charge: spec.charge,
        length: spec.length,
        h_p: h_p.clone(),
        position: x_el.kron(&id_rest),
        momentum: p_el.kron(&id_rest),
        vector_potential: a_full,
    };

    Ok(AssembledModel {
        kind: ModelKind::PfToy,
        left_dim: left,
        basis,
        h0,
        h_int,
        h,
        coupling: spec.charge,
        t_ops,
        lowers,
        number,
        field_energy,
        omega,
        mass: spec.grid.mass(),
        atom: AtomSpectrum::of(&left_dense),
        left_hamiltonian: left_dense,
        pf: Some(pf),
    })
}
