//! bolab: a numerical laboratory for fractional-regularity diagnostics of
//! variable-density incompressible flow on the periodic torus.
//!
//! The crate provides:
//! - periodic scalar/vector fields with exact spectral calculus ([`field`]),
//! - mollifiers and their convergence-rate checks ([`mollify`]),
//! - Besov-norm and regularity-exponent estimation ([`besov`]),
//! - mollification commutators and their epsilon-scaling sweeps ([`commutator`]),
//! - a 2D pseudo-spectral solver with variable-coefficient pressure
//!   projection ([`solver`]),
//! - energy-equality diagnostics up to the initial time ([`energy`]).
//!
//! All operations are deterministic for a fixed seed: floating-point
//! reductions use a fixed chunked summation tree, so results are identical
//! with and without the `parallel` feature.

pub mod besov;
pub mod commutator;
pub mod energy;
pub mod error;
pub mod exec;
pub mod fft;
pub mod field;
pub mod flow;
pub mod grid;
pub mod io;
pub mod mollify;
pub mod scaling;
pub mod solver;
pub mod synth;
pub mod testfn;

pub use error::{Error, Result};
pub use field::PeriodicField;
pub use grid::Grid;
