//! Projection test for selective reporting in meta-analytic t-curves.

pub mod cli;
pub mod edgeworth;
pub mod error;
pub mod hermite;
pub mod inference;
pub mod preprocess;
pub mod projection;
pub mod quadrature;
pub mod simlab;
pub mod spectral;

pub use error::{Error, Result};
