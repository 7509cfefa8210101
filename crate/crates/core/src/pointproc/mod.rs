//! Point-process samplers on a cubic window, with deterministic seeded
//! randomness, optional uniform marks, and empirical correlation estimation.

mod config;
mod correlation;
mod dpp;
mod gibbs;
mod kernel;
mod marks;
mod poisson;
mod window;

pub use config::PointConfig;
pub use correlation::{estimate_correlation, BinEstimate, CorrelationEstimate};
pub use dpp::{sample_alpha_dpp, sample_dpp, DppSampler, GridParams};
pub use gibbs::{sample_gibbs, Constraint, GibbsClass, GibbsDiagnostics, GibbsSpec, McmcParams};
pub use kernel::{Envelope, KernelKind, KernelSpec, ProcessParams};
pub use marks::attach_marks;
pub use poisson::sample_poisson;
pub use window::Window;

use thiserror::Error;

/// Hard cap on points generated by a single sampler call.
pub const POINT_BUDGET: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum PointProcessError {
    #[error("expected point count {0:.0} exceeds the budget {1}")]
    Budget(f64, usize),
    #[error("dimension mismatch: got {0}, kernel/window needs {1}")]
    Dimension(usize, usize),
    #[error("invalid point configuration: {0}")]
    InvalidConfig(String),
    #[error("config already carries marks")]
    AlreadyMarked,
    #[error("discretized kernel is not positive semi-definite (min eigenvalue {0:.3e})")]
    KernelNotPsd(f64),
    #[error("kernel error: {0}")]
    Kernel(String),
    #[error("need at least {0} replicate configs, got {1}")]
    TooFewReplicates(usize, usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}
