//! Fixed-step explicit integrators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn finite_or(x: DVector<f64>, t: f64) -> Result<DVector<f64>> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::NonFiniteState { t })
    }
}

/// One Euler–Maruyama step `x + f(t,x)·dt + σ(t,x)·dω`.
pub fn euler_maruyama_step<F, S>(
    drift: F,
    diffusion: S,
    x: &DVector<f64>,
    t: f64,
    dt: f64,
    dw: &DVector<f64>,
) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
    S: Fn(f64, &DVector<f64>) -> DMatrix<f64>,
{
    debug_assert!(dt > 0.0);
    let mut next = x + drift(t, x) * dt;
    next.gemv(1.0, &diffusion(t, x), dw, 1.0);
    finite_or(next, t + dt)
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<F>(rhs: F, x: &DVector<f64>, t: f64, dt: f64) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    debug_assert!(dt > 0.0);
    let half = 0.5 * dt;
    let k1 = rhs(t, x);
    let k2 = rhs(t + half, &(x + &k1 * half));
    let k3 = rhs(t + half, &(x + &k2 * half));
    let k4 = rhs(t + dt, &(x + &k3 * dt));
    let next = x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
    finite_or(next, t + dt)
}
