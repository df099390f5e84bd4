//! Periodic grids, spectral fields and the differential operators used by
//! every other module.
//!
//! Conventions: `grad_tensor(v)[i][j] = ∂_j v_i`, `tensor_div(T)_i =
//! sum_j ∂_j T_ij`. The Nyquist mode is treated as non-differentiable, so
//! `laplacian == div ∘ grad` holds exactly on every stored mode.

mod grid;
mod ops;
mod scalar;
mod snapshot;
pub mod spectral;
mod vector;

pub use grid::Grid;
pub use ops::*;
pub use scalar::ScalarField;
pub use snapshot::{Snapshot, MAGIC};
pub use vector::{Symmetry, TensorField, VectorField};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("expected {expected} components, got {got}")]
    Components { expected: usize, got: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
