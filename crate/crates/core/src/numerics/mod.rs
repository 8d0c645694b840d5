//! Linear algebra, random streams, and fixed-step integrators.

pub mod integrate;
pub mod linalg;
pub mod rng;

pub use integrate::{euler_maruyama_step, rk4_step};
pub use linalg::{cholesky, cholesky_with_jitter, psd_sqrt, solve_spd};
pub use rng::{sample_standard_normal, RngStream};
