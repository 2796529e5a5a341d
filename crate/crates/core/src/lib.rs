//! Spectral wave propagation on metric cones with inverse-square potentials.
//!
//! The cross-section operator is diagonalized mode by mode, each radial mode
//! is moved to the frequency side with a Hankel transform, and the wave
//! evolution is synthesized exactly as a spectral multiplier. On top of that
//! sit the spacetime norms and the experiment drivers that fit scaling
//! exponents.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod cross_section;
pub mod cutoff;
pub mod error;
pub mod experiments;
pub mod hankel;
pub mod norms;
pub mod propagator;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
