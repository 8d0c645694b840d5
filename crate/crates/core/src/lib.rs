//! Continuous-discrete state estimation for stochastic differential equation
//! models: simulation, four nonlinear filters, and a benchmark harness on a
//! modified four-tank system.

pub mod checks;
pub mod error;
pub mod experiment;
pub mod filters;
pub mod mfts;
pub mod model;
pub mod models;
pub mod numerics;
pub mod simulator;

pub use error::{Error, Result};
pub use filters::{Filter, FilterKind};
pub use model::{Dims, EvalPoint, GaussianBelief, Model, NoiseSpec, SignalProfile};
