//! Builders shared by the filter unit tests.

use nalgebra::{DMatrix, DVector};

use crate::model::{GaussianBelief, SignalProfile};
use crate::models::LinearModel;
use crate::numerics::RngStream;

pub fn none() -> SignalProfile {
    SignalProfile::constant(DVector::zeros(0))
}

/// `dx = a x dt + g dω`, `y = c x + v`.
pub fn scalar(a: f64, g: f64, c: f64) -> LinearModel {
    linear(
        DMatrix::from_element(1, 1, a),
        DMatrix::from_element(1, 1, g),
        DMatrix::from_element(1, 1, c),
    )
}

pub fn linear(f: DMatrix<f64>, g: DMatrix<f64>, c: DMatrix<f64>) -> LinearModel {
    let n = f.nrows();
    LinearModel::new(f, DMatrix::zeros(n, 0), g, c).unwrap()
}

pub fn belief1(x: f64, p: f64) -> GaussianBelief {
    GaussianBelief::new(DVector::from_element(1, x), DMatrix::from_element(1, 1, p)).unwrap()
}

pub fn random_matrix(rng: &mut RngStream, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.standard_normal())
}

/// `A Aᵀ + shift·I` for a standard-normal `A`.
pub fn random_spd(rng: &mut RngStream, n: usize, shift: f64) -> DMatrix<f64> {
    let a = random_matrix(rng, n, n);
    &a * a.transpose() + DMatrix::identity(n, n) * shift
}

/// A random model with stable drift: `F = −(M Mᵀ/n + 0.5 I) + skew`.
pub fn random_stable(rng: &mut RngStream, nx: usize, nw: usize, ny: usize) -> LinearModel {
    let m = random_matrix(rng, nx, nx);
    let s = random_matrix(rng, nx, nx) * 0.5;
    let f = -(&m * m.transpose() / nx as f64 + DMatrix::identity(nx, nx) * 0.5) + (&s - s.transpose());
    linear(f, random_matrix(rng, nx, nw) * 0.5, random_matrix(rng, ny, nx))
}

pub fn random_belief(rng: &mut RngStream, n: usize) -> GaussianBelief {
    let mean = DVector::from_fn(n, |_, _| rng.standard_normal());
    GaussianBelief::new(mean, random_spd(rng, n, 0.1)).unwrap()
}

/// `‖a − b‖_max / max(1, ‖b‖_max)`.
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

pub fn rel_err_v(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}
