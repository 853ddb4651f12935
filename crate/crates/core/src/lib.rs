//! Numerical microlocal analysis on uniform grids.
//!
//! The crate estimates wave-front sets of sampled distributions with respect
//! to weighted Fourier-Lebesgue and modulation spaces, applies
//! pseudo-differential operators, and checks microlocal inclusions
//! between the resulting sets at desk scale.

pub mod coneharm;
pub mod error;
pub mod expr;
pub mod fields;
pub mod harness;
pub mod jet;
pub mod numerics;
pub mod pdo;
pub mod symcalc;
pub mod wavefront;
pub mod weights;

pub use error::{Error, Result};
