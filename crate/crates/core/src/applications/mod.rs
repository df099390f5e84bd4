//! Model instantiations: a binary gas mixture with one-way coupled species
//! transport, and the capillary (ghost effect) system.

mod ghost;
mod mixture;

pub use ghost::*;
pub use mixture::*;
