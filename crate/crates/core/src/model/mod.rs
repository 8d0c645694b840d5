//! The continuous-discrete model abstraction
//!
//! ```text
//! dx(t) = f(t, x, u, d, θ) dt + σ(t, x, u, d, θ) dω(t),   dω ~ N(0, I dt)
//! y(t_k) = h(t_k, x(t_k), θ) + v(t_k),                     v  ~ N(0, R)
//! ```
//!
//! Every filter and the simulator consume a [`Model`]. Parameters θ live
//! inside the implementing type and are exposed as a flat vector with a
//! name map for reporting.

mod belief;
mod jacobian;
mod noise;
mod signal;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::RngStream;

pub use belief::GaussianBelief;
pub use jacobian::{
    check_jacobians, finite_difference_jacobian, JacobianFailure, JacobianKind, JacobianReport,
    JACOBIAN_TOLERANCE,
};
pub use noise::NoiseSpec;
pub use signal::SignalProfile;

/// Declared dimensions of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub nx: usize,
    pub nu: usize,
    pub nd: usize,
    pub nw: usize,
    pub ny: usize,
}

/// A point at which the model evaluators are sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    pub t: f64,
    pub x: DVector<f64>,
    pub u: DVector<f64>,
    pub d: DVector<f64>,
}

/// A continuous-discrete stochastic system.
///
/// Evaluators must be pure: the ensemble filters call them from many
/// members with distinct states.
pub trait Model: Send + Sync {
    fn dims(&self) -> Dims;

    /// Drift `f(t, x, u, d, θ)`, length `nx`.
    fn drift(&self, t: f64, x: &DVector<f64>, u: &DVector<f64>, d: &DVector<f64>) -> DVector<f64>;

    /// Diffusion `σ(t, x, u, d, θ)`, shape `nx × nw`.
    fn diffusion(&self, t: f64, x: &DVector<f64>, u: &DVector<f64>, d: &DVector<f64>)
        -> DMatrix<f64>;

    /// Measurement function `h(t, x, θ)`, length `ny`.
    fn measurement(&self, t: f64, x: &DVector<f64>) -> DVector<f64>;

    /// `∂f/∂x`. Defaults to central finite differences.
    fn drift_jacobian(
        &self,
        t: f64,
        x: &DVector<f64>,
        u: &DVector<f64>,
        d: &DVector<f64>,
    ) -> DMatrix<f64> {
        finite_difference_jacobian(|x| self.drift(t, x, u, d), x, f64::EPSILON.sqrt())
    }

    /// `∂h/∂x`. Defaults to central finite differences.
    fn measurement_jacobian(&self, t: f64, x: &DVector<f64>) -> DMatrix<f64> {
        finite_difference_jacobian(|x| self.measurement(t, x), x, f64::EPSILON.sqrt())
    }

    /// Maps a simulated truth state back into the physical domain after each
    /// integration step (e.g. non-negative masses). Filters never call it.
    fn project_state(&self, _x: &mut DVector<f64>) {}

    /// Flat parameter vector θ.
    fn parameters(&self) -> DVector<f64> {
        DVector::zeros(0)
    }

    /// Names of the entries of [`Model::parameters`], in order.
    fn parameter_names(&self) -> Vec<&'static str> {
        Vec::new()
    }

    /// A random point in the interior of the model's domain, used by
    /// [`check_jacobians`].
    fn sample_point(&self, rng: &mut RngStream) -> EvalPoint {
        let dims = self.dims();
        let mut draw = |n| DVector::from_fn(n, |_, _| rng.standard_normal());
        EvalPoint {
            t: 0.0,
            x: draw(dims.nx),
            u: draw(dims.nu),
            d: draw(dims.nd),
        }
    }
}

/// Index of a named parameter in [`Model::parameters`].
pub fn parameter_index(model: &dyn Model, name: &str) -> Option<usize> {
    model.parameter_names().iter().position(|n| *n == name)
}

fn expect_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}

/// Construction-time check that a model, initial belief, signals, and
/// measurement noise agree on dimensions, including the shapes the model's
/// evaluators actually return.
pub fn validate_dimensions<M: Model + ?Sized>(
    model: &M,
    belief: &GaussianBelief,
    u: &SignalProfile,
    d: &SignalProfile,
    noise: &NoiseSpec,
) -> Result<()> {
    let dims = model.dims();
    expect_len("initial mean", dims.nx, belief.dim())?;
    expect_len("input profile", dims.nu, u.dim())?;
    expect_len("disturbance profile", dims.nd, d.dim())?;
    expect_len("measurement noise", dims.ny, noise.dim())?;

    let t = u.start().max(d.start()).max(0.0);
    let (uu, dd) = (u.eval(t)?, d.eval(t)?);
    let x = belief.mean();
    expect_len("drift output", dims.nx, model.drift(t, x, uu, dd).len())?;
    let sigma = model.diffusion(t, x, uu, dd);
    expect_len("diffusion rows", dims.nx, sigma.nrows())?;
    expect_len("diffusion columns", dims.nw, sigma.ncols())?;
    expect_len("measurement output", dims.ny, model.measurement(t, x).len())?;
    let a = model.drift_jacobian(t, x, uu, dd);
    expect_len("drift jacobian rows", dims.nx, a.nrows())?;
    expect_len("drift jacobian columns", dims.nx, a.ncols())?;
    let c = model.measurement_jacobian(t, x);
    expect_len("measurement jacobian rows", dims.ny, c.nrows())?;
    expect_len("measurement jacobian columns", dims.nx, c.ncols())?;
    Ok(())
}
