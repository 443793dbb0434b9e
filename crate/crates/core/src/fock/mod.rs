//! Truncated bosonic Fock space: occupation basis, ladder operators,
//! second quantization and field operators.

mod basis;
mod grid;
mod ops;

pub use basis::{fock_dimension, OccupationBasis, DEFAULT_DIMENSION_CAP};
pub use grid::ModeGrid;
pub use ops::{
    annihilation, check_dense_hermitian, creation, field_operator, free_energy, ladder_op, number_operator,
    raise_matrix, second_quantization, sector_weights, FockOperator, FockVector, Ladder, HERMITIAN_TOL,
};
pub(crate) use ops::check_hermitian;

use alloc::sync::Arc;

use crate::error::Result;

/// Builds a shareable basis with the default dimension cap.
pub fn build_basis(modes: usize, n_max: usize) -> Result<Arc<OccupationBasis>> {
    OccupationBasis::new(modes, n_max).map(Arc::new)
}
