//! Viscosity laws, the associated potential `φ`, and the admissibility
//! conditions that guarantee a nonnegative κ-entropy dissipation.

mod conditions;
mod law;
mod potential;

pub use conditions::*;
pub use law::{LawKind, MonotoneCubic, ViscosityLaw};
pub use potential::{integrate, phi_from_mu, PotentialLaw};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConstitutiveError {
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("degenerate point: {0}")]
    Degenerate(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}
