//! κ-entropy and its dissipation budget, bound and monotonicity monitors,
//! pointwise identities and the per-step diagnostics rows.

mod entropy;
mod identities;
mod monitors;
mod row;

pub use entropy::*;
pub use identities::*;
pub use monitors::*;
pub use row::*;

use crate::fields::Grid;

/// Grid quadrature `∫ f` of sampled values.
pub fn quad(grid: &Grid, values: &[f64]) -> f64 {
    values.iter().sum::<f64>() * grid.cell_volume()
}
