//! Random linear models and beliefs for the reference checks.

use nalgebra::{DMatrix, DVector};

use crate::model::GaussianBelief;
use crate::models::LinearModel;
use crate::numerics::RngStream;

pub fn matrix(rng: &mut RngStream, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.standard_normal())
}

/// `A Aᵀ + shift·I` for a standard-normal `A`.
pub fn spd(rng: &mut RngStream, n: usize, shift: f64) -> DMatrix<f64> {
    let a = matrix(rng, n, n);
    &a * a.transpose() + DMatrix::identity(n, n) * shift
}

/// Stable drift `F = −(M Mᵀ/n + I/2) + (S − Sᵀ)` with random `G` and `C`.
pub fn stable_model(rng: &mut RngStream, nx: usize, nw: usize, ny: usize) -> LinearModel {
    let m = matrix(rng, nx, nx);
    let s = matrix(rng, nx, nx) * 0.5;
    let f = -(&m * m.transpose() / nx as f64 + DMatrix::identity(nx, nx) * 0.5) + (&s - s.transpose());
    LinearModel::new(f, DMatrix::zeros(nx, 0), matrix(rng, nx, nw) * 0.5, matrix(rng, ny, nx))
        .expect("dimensions are consistent by construction")
}

pub fn belief(rng: &mut RngStream, n: usize) -> GaussianBelief {
    let mean = DVector::from_fn(n, |_, _| rng.standard_normal());
    GaussianBelief::new(mean, spd(rng, n, 0.1)).expect("shifted Gram matrix is positive definite")
}

/// `‖a − b‖_max / max(1, ‖b‖_max)`.
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

pub fn rel_err_v(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}
