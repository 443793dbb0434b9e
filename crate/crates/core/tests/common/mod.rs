#![allow(dead_code)]

use bosonlab_core::fock::ModeGrid;
use bosonlab_core::model::*;
use bosonlab_core::C64;
use nalgebra::DMatrix;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Single mode at `k = ω = 1` with `λ = 1`, atom `(ε/2)σ_z`, coupling `σ_z`.
pub fn displaced_oscillator(alpha: f64, n_max: usize) -> AssembledModel {
    let grid = ModeGrid::new(vec![1.0], vec![1.0], vec![1.0], 0.0, 0.5, 1.5).unwrap();
    let mut spec = spin_boson_preset(1.0, 0.0, grid, 0.0, Window::Unit, alpha, n_max);
    spec.couplings[0].lambda = vec![c(1.0)];
    assemble_gsb(&spec).unwrap()
}

pub fn massive_grid(nu: f64, modes: usize) -> ModeGrid {
    dispersion_grid(Dispersion::Massive(nu), 0.5, 2.0, modes, Quadrature::UniformMidpoint).unwrap()
}

pub fn spin_boson(epsilon: f64, delta: f64, grid: ModeGrid, alpha: f64, n_max: usize) -> AssembledModel {
    assemble_gsb(&spin_boson_preset(epsilon, delta, grid, 0.0, Window::Unit, alpha, n_max)).unwrap()
}

/// `A = 0₂`, `B = σ_x`.
pub fn degenerate_atom(grid: ModeGrid, alpha: f64, n_max: usize) -> AssembledModel {
    let lambda = form_factor_preset(&grid, 0.0, Window::Unit);
    let sx = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let spec = GsbSpec {
        atom: DMatrix::zeros(2, 2),
        couplings: vec![CouplingTerm { b: sx, lambda }],
        alpha,
        grid,
        n_max,
        dimension_cap: bosonlab_core::fock::DEFAULT_DIMENSION_CAP,
    };
    assemble_gsb(&spec).unwrap()
}

pub fn pf_toy(n_x: usize, depth: f64, charge: f64, modes: usize, n_max: usize) -> AssembledModel {
    let length = n_x as f64 / 2.0;
    let grid = dispersion_grid(Dispersion::Massless, 0.5, 2.0, modes, Quadrature::UniformMidpoint).unwrap();
    let pos = pf_positions(n_x, length);
    let v = square_well(&pos, depth, 1.5);
    assemble_pf_toy(&PfToySpec::new(n_x, length, 1.0, charge, v, grid, vec![1.0; modes], n_max)).unwrap()
}

/// Dense copy of a sparse operator through its triplets.
pub fn dense(m: &bosonlab_core::sparse::SparseMatrix) -> DMatrix<C64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (r, col, v) in m.triplets() {
        d[(r, col)] += v;
    }
    d
}

/// Lowest eigenvalue by an independent Hermitian eigensolver.
pub fn dense_ground_energy(m: &bosonlab_core::sparse::SparseMatrix) -> f64 {
    let e = nalgebra::linalg::SymmetricEigen::new(dense(m));
    e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
