//! Bessel and Dunkl particle systems of types A and B.

pub mod error;
pub mod freeprob;
pub mod frozen;
pub mod harness;
pub mod moments;
pub mod ode;
pub mod quad;
pub mod rootsys;
pub mod stochastic;
pub mod zeros;

pub use error::{Error, Result};
