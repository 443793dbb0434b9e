//! Truncated bosonic Fock spaces, coupled atom-field Hamiltonians, ground-state
//! solvers and identity checks.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod fock;
pub mod model;
pub mod rng;
pub mod sparse;
pub mod spectral;
pub mod verifier;
pub mod vecops;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use num_complex::Complex64 as C64;
