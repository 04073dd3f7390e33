//! Numerical laboratory for Wiener–Hopf operators on weighted function spaces
//! over the half-line: symbols, strips, spectra and quasi-eigenvectors.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN on purpose

pub mod error;
pub mod gridfn;
pub mod linalg;
pub mod operators;
pub mod profiles;
pub mod spaces;
pub mod spectra;
pub mod symbol;
pub mod vector;

pub use error::{Result, WhError};
pub use gridfn::{C64, FrequencyFunction, Grid, SampledFunction};
