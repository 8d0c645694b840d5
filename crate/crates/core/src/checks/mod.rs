//! Self-checks of the filters against exact and statistical references.
//!
//! Each check returns the measured quantities with a `passed` verdict, so
//! the same numbers back the test suite and the command-line `check`.

mod joseph;
mod linear;
mod monte_carlo;
pub mod random;
mod resampling;
mod stationary;

pub use joseph::{joseph_identity, JosephReport};
pub use linear::{linear_oracle, LinearOracleReport};
pub use monte_carlo::{log_log_slope, monte_carlo_convergence, ConvergenceReport};
pub use resampling::{resampling_check, ResamplingReport};
pub use stationary::{ou_stationary_variance, StationaryReport};
