//! Point interactions in three dimensions.
//!
//! The crate covers the free and perturbed resolvents of the Laplacian with
//! finitely many zero-range interactions, the associated stationary wave
//! operators, and a Nystrom discretization of Birman-Schwinger operators used
//! to approximate point interactions by scaled short-range potentials.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod birman;
pub mod error;
pub mod gamma;
pub mod geom;
pub mod green;
pub mod krein;
pub mod linalg;
pub mod opalg;
pub mod packet;
pub mod quad;
pub mod scaling;
pub mod waveop;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Imaginary unit.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };
