//! Numerical laboratory for the sharp Onofri-type inequality on `R^N` and
//! the Carleson-Chang bound on the unit ball, for radial functions.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod experiments;
pub mod functionals;
pub mod geometry;
pub mod identities;
pub mod profile;
pub mod quadrature;
pub mod remainder;

pub use error::{Error, Result};
