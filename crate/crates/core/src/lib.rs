//! Least-squares estimation of a regression function by single-hidden-layer
//! sigmoid networks grown with the sample size (a sieve), together with the
//! diagnostics and test statistics needed to study the estimator: growth
//! rate checks, covering-number bounds, subgradient training under an l1
//! budget on the output weights, and normality testing of the scaled fit
//! error over Monte Carlo replicates.

pub mod error;
pub mod network;
pub mod sieve;
pub mod simlab;
pub mod stats;
pub mod trainer;

pub use error::{Error, Result};
pub use network::{Dataset, Theta};
pub use sieve::{SieveDims, SieveSchedule};
pub use simlab::{ExperimentReport, Scenario, Truth};
pub use trainer::{FitResult, TrainConfig};
