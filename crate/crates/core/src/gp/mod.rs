//! Exact Gaussian-process regression.
//!
//! Kernels are stationary and isotropic over inputs normalized to the unit
//! cube. Observations are standardized before fitting and predictions are
//! mapped back to the original units.

mod hyper;
mod kernel;
mod posterior;

pub use hyper::{optimize_hyperparameters, optimize_hyperparameters_with, HyperBounds, HyperFit, HyperOptions};
pub use kernel::{gram_matrix, kernel_eval, KernelConfig, KernelFamily};
pub use posterior::{
    cross_covariance, fit, log_marginal_likelihood, log_marginal_likelihood_with_mean, Dataset, GpPosterior,
    PriorMean, Standardization, JITTER_LADDER,
};
