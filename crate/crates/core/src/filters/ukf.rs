//! Continuous-discrete unscented Kalman filter.
//!
//! The time update samples `2n̄ + 1` sigma points, `n̄ = nx + nω`: `2nx + 1`
//! points spread by the Cholesky factor of `P` and propagated through the
//! drift alone, plus `2nω` copies of the mean driven by deterministic noise
//! increments `±√(c̄·dt)·eᵢ` at every internal step. The measurement update
//! re-samples `2nx + 1` points from the predicted belief.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ekf::KalmanUpdate;
use super::{check_dim, check_steps, internal_grid, propagate_drift, Filter, FilterKind};
use crate::error::{Error, Result};
use crate::model::{GaussianBelief, Model, NoiseSpec, SignalProfile};
use crate::numerics::linalg::{ensure_psd, right_solve_spd, symmetrize_mut};
use crate::numerics::{cholesky, rk4_step};

/// Eigenvalue tolerance, relative to the trace, for UKF covariances. With
/// small `α` the central covariance weight is large and negative, so the
/// weighted sum can lose definiteness; that is reported, not clipped.
pub const UKF_PSD_TOL: f64 = 1e-9;

/// Scaling parameters `(α, β, κ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UkfParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for UkfParams {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            beta: 2.0,
            kappa: 0.0,
        }
    }
}

impl UkfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) || !(self.kappa >= 0.0) || !(self.beta >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "ukf parameters need alpha in (0, 1], beta >= 0, kappa >= 0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Sigma-point weights for dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaWeights {
    /// `W_m⁽⁰⁾, …, W_m⁽²ⁿ⁾`.
    pub mean: Vec<f64>,
    /// `W_c⁽⁰⁾, …, W_c⁽²ⁿ⁾`.
    pub cov: Vec<f64>,
    /// Spread scale `c = α²(n + κ)`.
    pub scale: f64,
    /// `λ = c − n`.
    pub lambda: f64,
}

/// Weights and scale for `2n + 1` sigma points.
pub fn ukf_weights(n: usize, p: &UkfParams) -> Result<SigmaWeights> {
    p.validate()?;
    if n == 0 {
        return Err(Error::InvalidConfig("sigma points need n >= 1".into()));
    }
    let nf = n as f64;
    let scale = p.alpha * p.alpha * (nf + p.kappa);
    let lambda = scale - nf;
    let denom = nf + lambda;
    if denom <= 1e-12 {
        return Err(Error::DegenerateScaling(denom));
    }
    let w0 = lambda / denom;
    let wi = 1.0 / (2.0 * denom);
    let mut mean = vec![wi; 2 * n + 1];
    let mut cov = mean.clone();
    mean[0] = w0;
    cov[0] = w0 + 1.0 - p.alpha * p.alpha + p.beta;
    Ok(SigmaWeights {
        mean,
        cov,
        scale,
        lambda,
    })
}

/// `x̂`, then `x̂ + √c·Lᵢ` for each column `Lᵢ` of the Cholesky factor, then
/// `x̂ − √c·Lᵢ`.
pub fn sigma_points(belief: &GaussianBelief, scale: f64) -> Result<Vec<DVector<f64>>> {
    let l = cholesky(belief.cov())? * scale.sqrt();
    let x = belief.mean();
    let n = x.len();
    let mut points = Vec::with_capacity(2 * n + 1);
    points.push(x.clone());
    points.extend((0..n).map(|i| x + l.column(i)));
    points.extend((0..n).map(|i| x - l.column(i)));
    Ok(points)
}

/// Weighted mean and covariance of a sigma set whose weights sum to one.
pub fn weighted_moments(
    points: &[DVector<f64>],
    mean_weights: &[f64],
    cov_weights: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let n = points[0].len();
    // offsets from the central point avoid cancelling against a large
    // negative central weight
    let center = &points[0];
    let mut offset = DVector::zeros(n);
    for (x, w) in points.iter().zip(mean_weights).skip(1) {
        offset.axpy(*w, &(x - center), 1.0);
    }
    let mean = center + offset;
    let mut cov = DMatrix::zeros(n, n);
    for (x, w) in points.iter().zip(cov_weights) {
        let dx = x - &mean;
        cov.ger(*w, &dx, &dx, 1.0);
    }
    symmetrize_mut(&mut cov);
    (mean, cov)
}

/// Predicts the belief from `t0` to `t1`.
#[allow(clippy::too_many_arguments)]
pub fn ukf_time_update<M: Model + ?Sized>(
    model: &M,
    belief: &GaussianBelief,
    params: &UkfParams,
    t0: f64,
    t1: f64,
    u: &SignalProfile,
    d: &SignalProfile,
    internal_steps: usize,
) -> Result<GaussianBelief> {
    check_steps(internal_steps)?;
    let dims = model.dims();
    check_dim("ukf mean", dims.nx, belief.dim())?;
    let n_bar = dims.nx + dims.nw;
    let weights = ukf_weights(n_bar, params)?;

    let mut points = Vec::with_capacity(2 * n_bar + 1);
    for x in sigma_points(belief, weights.scale)? {
        points.push(propagate_drift(model, &x, t0, t1, u, d, internal_steps)?);
    }

    // Stochastic points: the mean driven by ±√(c̄·dt)·eᵢ at every sub-step.
    let (grid, dt) = internal_grid(t0, t1, internal_steps);
    let grid: Vec<f64> = grid.collect();
    let increment = (weights.scale * dt).sqrt();
    for sign in [1.0, -1.0] {
        for i in 0..dims.nw {
            let mut x = belief.mean().clone();
            for &t in &grid {
                let (uu, dd) = (u.eval(t)?, d.eval(t)?);
                let sigma = model.diffusion(t, &x, uu, dd);
                let noise = sigma.column(i) * (sign * increment);
                x = rk4_step(|t, x| model.drift(t, x, uu, dd), &x, t, dt)? + noise;
            }
            points.push(x);
        }
    }

    let (mean, cov) = weighted_moments(&points, &weights.mean, &weights.cov);
    if !mean.iter().chain(cov.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteState { t: t1 });
    }
    ensure_psd(&cov, UKF_PSD_TOL, "ukf predicted covariance")?;
    Ok(GaussianBelief::new_unchecked(mean, cov))
}

/// Corrects the predicted belief with the measurement `y` taken at `t`.
pub fn ukf_measurement_update<M: Model + ?Sized>(
    model: &M,
    belief: &GaussianBelief,
    params: &UkfParams,
    t: f64,
    y: &DVector<f64>,
    noise: &NoiseSpec,
) -> Result<KalmanUpdate> {
    let dims = model.dims();
    check_dim("ukf mean", dims.nx, belief.dim())?;
    check_dim("measurement", dims.ny, y.len())?;
    check_dim("measurement noise", dims.ny, noise.dim())?;
    let weights = ukf_weights(dims.nx, params)?;
    let points = sigma_points(belief, weights.scale)?;
    let z: Vec<DVector<f64>> = points.iter().map(|x| model.measurement(t, x)).collect();
    let (y_hat, rzz) = weighted_moments(&z, &weights.mean, &weights.cov);

    let x_hat = belief.mean();
    let mut rxy = DMatrix::zeros(dims.nx, dims.ny);
    for ((x, zi), w) in points.iter().zip(&z).zip(&weights.cov) {
        rxy.ger(*w, &(x - x_hat), &(zi - &y_hat), 1.0);
    }
    let mut re = rzz + noise.covariance();
    symmetrize_mut(&mut re);
    let gain = right_solve_spd(&rxy, &re)?;
    let innovation = y - y_hat;
    let mean = x_hat + &gain * &innovation;
    let mut cov = belief.cov() - &gain * &re * gain.transpose();
    symmetrize_mut(&mut cov);
    if !mean.iter().chain(cov.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteState { t });
    }
    ensure_psd(&cov, UKF_PSD_TOL, "ukf filtered covariance")?;
    Ok(KalmanUpdate {
        belief: GaussianBelief::new_unchecked(mean, cov),
        innovation,
        innovation_cov: re,
        gain,
    })
}

/// Unscented Kalman filter over an owned model.
pub struct Ukf<M> {
    model: M,
    noise: NoiseSpec,
    params: UkfParams,
    internal_steps: usize,
    belief: GaussianBelief,
}

impl<M: Model> Ukf<M> {
    pub fn new(
        model: M,
        noise: NoiseSpec,
        params: UkfParams,
        initial: GaussianBelief,
        internal_steps: usize,
    ) -> Result<Self> {
        params.validate()?;
        check_steps(internal_steps)?;
        check_dim("ukf initial mean", model.dims().nx, initial.dim())?;
        Ok(Self {
            model,
            noise,
            params,
            internal_steps,
            belief: initial,
        })
    }
}

impl<M: Model> Filter for Ukf<M> {
    fn kind(&self) -> FilterKind {
        FilterKind::Ukf
    }

    fn time_update(&mut self, t0: f64, t1: f64, u: &SignalProfile, d: &SignalProfile) -> Result<()> {
        self.belief = ukf_time_update(
            &self.model,
            &self.belief,
            &self.params,
            t0,
            t1,
            u,
            d,
            self.internal_steps,
        )?;
        Ok(())
    }

    fn measurement_update(&mut self, t: f64, y: &DVector<f64>) -> Result<()> {
        let update = ukf_measurement_update(&self.model, &self.belief, &self.params, t, y, &self.noise)?;
        self.belief = update.belief;
        Ok(())
    }

    fn belief(&self) -> GaussianBelief {
        self.belief.clone()
    }
}
