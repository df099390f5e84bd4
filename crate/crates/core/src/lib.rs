//! Pseudo-spectral solver and verification toolkit for incompressible
//! Navier-Stokes-Korteweg type systems written in the κ-entropy form.
//!
//! The unknowns are the density `ρ`, a solenoidal velocity `w` and, in the
//! augmented formulation, an auxiliary field `v` that should track
//! `2∇φ(ρ)`. The physical velocity is `u = w - 2κ∇φ(ρ)`.

pub mod fields;
pub mod constitutive;
pub mod solver;
pub mod diagnostics;
pub mod applications;
pub mod verification;
pub mod limits;
