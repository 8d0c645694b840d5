use nalgebra::{DMatrix, DVector};

use super::Model;
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Relative error above which [`check_jacobians`] flags an entry.
pub const JACOBIAN_TOLERANCE: f64 = 1e-5;

/// Central-difference Jacobian of `f` at `x` with per-coordinate step
/// `rel_step · max(1, |x_i|)`.
///
/// The step is rounded so that `x_i ± h` are exactly representable
/// offsets, which removes the step-size rounding term from the error.
pub fn finite_difference_jacobian<F>(f: F, x: &DVector<f64>, rel_step: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len();
    let mut probe = x.clone();
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        let xj = x[j];
        let h = {
            let h = rel_step * xj.abs().max(1.0);
            (xj + h) - xj
        };
        probe[j] = xj + h;
        let plus = f(&probe);
        probe[j] = xj - h;
        let minus = f(&probe);
        probe[j] = xj;
        columns.push((plus - minus) / (2.0 * h));
    }
    if columns.is_empty() {
        return DMatrix::zeros(f(x).len(), 0);
    }
    DMatrix::from_columns(&columns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianKind {
    Drift,
    Measurement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianFailure {
    pub point: usize,
    pub kind: JacobianKind,
    pub row: usize,
    pub col: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub error: f64,
}

/// Outcome of comparing analytic Jacobians against central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianReport {
    pub points: usize,
    pub max_drift_error: f64,
    pub max_measurement_error: f64,
    pub failures: Vec<JacobianFailure>,
}

impl JacobianReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn max_error(&self) -> f64 {
        self.max_drift_error.max(self.max_measurement_error)
    }
}

// Entries are compared relative to their own magnitude, floored at 1e-8 of
// the Jacobian's largest entry so structural zeros are compared absolutely.
fn compare(
    analytic: &DMatrix<f64>,
    numeric: &DMatrix<f64>,
    point: usize,
    kind: JacobianKind,
    failures: &mut Vec<JacobianFailure>,
) -> f64 {
    let floor = 1e-8 * numeric.amax().max(1.0);
    let mut worst = 0.0f64;
    for ((row, col), (&a, &b)) in analytic
        .iter()
        .zip(numeric.iter())
        .enumerate()
        .map(|(k, pair)| ((k % analytic.nrows(), k / analytic.nrows()), pair))
    {
        let error = (a - b).abs() / b.abs().max(floor);
        worst = worst.max(error);
        if error > JACOBIAN_TOLERANCE {
            failures.push(JacobianFailure {
                point,
                kind,
                row,
                col,
                analytic: a,
                numeric: b,
                error,
            });
        }
    }
    worst
}

fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Compares the model's analytic drift and measurement Jacobians against
/// central differences at `n_points` points from [`Model::sample_point`].
///
/// Uses the cube-root-of-epsilon step, which balances truncation and
/// rounding for central differences.
pub fn check_jacobians<M: Model + ?Sized>(
    model: &M,
    n_points: usize,
    rng: &mut RngStream,
) -> Result<JacobianReport> {
    let step = f64::EPSILON.cbrt();
    let mut failures = Vec::new();
    let mut max_drift_error = 0.0f64;
    let mut max_measurement_error = 0.0f64;
    for point in 0..n_points {
        let p = model.sample_point(rng);
        let a = model.drift_jacobian(p.t, &p.x, &p.u, &p.d);
        let a_fd = finite_difference_jacobian(|x| model.drift(p.t, x, &p.u, &p.d), &p.x, step);
        let c = model.measurement_jacobian(p.t, &p.x);
        let c_fd = finite_difference_jacobian(|x| model.measurement(p.t, x), &p.x, step);
        if !(all_finite(&a) && all_finite(&a_fd) && all_finite(&c) && all_finite(&c_fd)) {
            return Err(Error::NonFiniteState { t: p.t });
        }
        for (analytic, numeric) in [(&a, &a_fd), (&c, &c_fd)] {
            if analytic.shape() != numeric.shape() {
                return Err(Error::DimensionMismatch {
                    context: "analytic jacobian",
                    expected: numeric.len(),
                    actual: analytic.len(),
                });
            }
        }
        max_drift_error =
            max_drift_error.max(compare(&a, &a_fd, point, JacobianKind::Drift, &mut failures));
        max_measurement_error = max_measurement_error.max(compare(
            &c,
            &c_fd,
            point,
            JacobianKind::Measurement,
            &mut failures,
        ));
    }
    Ok(JacobianReport {
        points: n_points,
        max_drift_error,
        max_measurement_error,
        failures,
    })
}
