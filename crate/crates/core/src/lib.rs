//! Sample-efficient calibration of two-photon interference.
//!
//! The crate couples a Gaussian-process Bayesian optimizer with a
//! Gaussian-state model of a Hong-Ou-Mandel setup:
//!
//! * [`gp`]: kernels, exact posterior, marginal-likelihood hyperparameter fitting
//! * [`acquisition`]: PI / EI / LCB scoring and next-point selection
//! * [`design`]: random, Latin hypercube, maximin LHS, Sobol and Halton designs
//! * [`optics`]: covariance-matrix simulation of the interference pipeline and g²(0)
//! * [`measurement`]: Poisson count sampling, the g²(0) estimator, objective handles
//! * [`bayes_opt`]: the optimization loop and a finite-difference gradient-descent baseline
//! * [`bench`]: baseline grids, repeated-trial benchmarks and ablation sweeps
//! * [`seed`]: derivation of independent per-trial random streams
//! * [`cli`]: the `qncal` command-line front end

pub mod acquisition;
pub mod bayes_opt;
pub mod bench;
pub mod cli;
pub mod design;
pub mod error;
pub mod gp;
pub mod measurement;
pub mod optics;
pub mod seed;

pub use error::{Error, Result};
