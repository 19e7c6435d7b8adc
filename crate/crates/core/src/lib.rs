//! Nonnegative matrix underapproximation and robust multi-model fitting.
//!
//! [`nmu`] computes rank-one factors `u vᵀ ≤ A` of a nonnegative matrix with
//! an ADMM scheme. [`robustfit`] applies it to the preference matrix of
//! sampled model hypotheses to recover several geometric models at once.

pub mod error;
pub mod io;
pub mod matlib;
pub mod model;
pub mod nmu;
pub mod plot;
pub mod preference;
pub mod robustfit;
pub mod synth;

pub use error::{Error, Result};
pub use matlib::{DenseMatrix, DenseVector};
pub use model::{ModelFamily, ModelParams};
pub use nmu::{extract_factors, solve_rank_one, NmuConfig, NmuFactor};
pub use robustfit::{fit_models, Bicluster, FitConfig, FitResult};
pub use synth::Dataset;
