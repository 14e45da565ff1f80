//! Spectral machinery for time-periodic waves on the Einstein cylinder.
//!
//! Three models are covered: the conformal cubic wave equation in spherical
//! symmetry (CW), its cohomogeneity-two reduction out of spherical symmetry
//! (CH), and the spherically symmetric Yang-Mills equation (YM).

pub mod dynamics;
pub mod fourier;
pub mod models;
pub mod nondegeneracy;
pub mod resonant;
pub mod special_functions;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("node solver did not converge: {0}")]
    Convergence(String),
    #[error("truncation too small: {0}")]
    Truncation(String),
    #[error("positivity check failed: {0}")]
    Positivity(String),
    #[error("fixed-point iteration did not contract (smallest divisor {divisor:e} at j={j}, l={l})")]
    NonContraction { divisor: f64, j: usize, l: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub use models::{ModeVector, ModelSpec};
