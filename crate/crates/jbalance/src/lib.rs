//! Quantisation of the J-flow on toric surfaces.
//!
//! Sections of `L₁ᵏ` are lattice points of the dilated polytope, metrics are
//! convex potentials in logarithmic coordinates, and the J-weights of
//! deformation-to-the-normal-cone test configurations are computed in exact
//! rational arithmetic.

pub mod cli;
pub mod error;
pub mod flows;
pub mod functionals;
pub mod geometry;
pub mod quantisation;
pub mod stability;

pub use error::{Error, Result};
