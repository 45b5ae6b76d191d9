//! Waveguide QED with travelling acoustic index modulation: Floquet band
//! structure, directional emission rates, exact single-excitation dynamics,
//! cascaded master equations and two-dimensional lattices.

pub mod cascade;
pub mod dynamics1d;
pub mod error;
pub mod floquet1d;
pub mod floquet2d;
pub mod linalg;
pub mod scales;

pub use error::{Error, Result};
