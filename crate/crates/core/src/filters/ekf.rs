//! Continuous-discrete extended Kalman filter.
//!
//! The time update integrates the mean ODE `dx̂/dt = f` jointly with the
//! covariance ODE `dP/dt = A P + P Aᵀ + σσᵀ` under RK4, re-evaluating the
//! Jacobian `A` and diffusion `σ` at every stage. The measurement update uses
//! the Joseph form, which keeps `P` symmetric PSD for any gain.

use nalgebra::{DMatrix, DVector};

use super::{check_dim, check_steps, internal_grid, Filter, FilterKind};
use crate::error::{Error, Result};
use crate::model::{GaussianBelief, Model, NoiseSpec, SignalProfile};
use crate::numerics::linalg::{ensure_psd, right_solve_spd, symmetrize_mut};

/// Eigenvalue tolerance, relative to the trace, for the predicted covariance.
pub const PREDICTED_PSD_TOL: f64 = 1e-6;

/// Filter state: the belief plus the last innovation and its covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct EkfState {
    pub belief: GaussianBelief,
    pub innovation: Option<DVector<f64>>,
    pub innovation_cov: Option<DMatrix<f64>>,
}

impl EkfState {
    pub fn new(belief: GaussianBelief) -> Self {
        Self {
            belief,
            innovation: None,
            innovation_cov: None,
        }
    }
}

/// Result of a Kalman measurement update.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanUpdate {
    pub belief: GaussianBelief,
    pub innovation: DVector<f64>,
    pub innovation_cov: DMatrix<f64>,
    pub gain: DMatrix<f64>,
}

/// Scratch buffers for one RK4 step of the moment ODEs.
struct MomentStages {
    x: DVector<f64>,
    p: DMatrix<f64>,
    m: DMatrix<f64>,
    kx: [DVector<f64>; 4],
    kp: [DMatrix<f64>; 4],
}

impl MomentStages {
    fn new(n: usize) -> Self {
        Self {
            x: DVector::zeros(n),
            p: DMatrix::zeros(n, n),
            m: DMatrix::zeros(n, n),
            kx: std::array::from_fn(|_| DVector::zeros(n)),
            kp: std::array::from_fn(|_| DMatrix::zeros(n, n)),
        }
    }
}

/// `y += a·x` over matrices of equal shape.
fn axpy(y: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

/// Right-hand side of the moment ODEs, `(f, A P + P Aᵀ + σσᵀ)`, written to
/// `out_x` and `out_p`. For symmetric `P`, `A P = Mᵀ` with `M = P Aᵀ`, and
/// column `i` of `M` combines the columns of `P` with weights `A[i, ·]`;
/// zero weights are skipped, as drift Jacobians are typically sparse.
#[allow(clippy::too_many_arguments)]
fn moment_rhs<M: Model + ?Sized>(
    model: &M,
    t: f64,
    x: &DVector<f64>,
    p: &DMatrix<f64>,
    u: &DVector<f64>,
    d: &DVector<f64>,
    m: &mut DMatrix<f64>,
    out_x: &mut DVector<f64>,
    out_p: &mut DMatrix<f64>,
) {
    let a = model.drift_jacobian(t, x, u, d);
    let sigma = model.diffusion(t, x, u, d);
    let n = x.len();
    let (a, ps) = (a.as_slice(), p.as_slice());
    let ms = m.as_mut_slice();
    ms.fill(0.0);
    for (k, pk) in ps.chunks_exact(n).enumerate() {
        for (i, mi) in ms.chunks_exact_mut(n).enumerate() {
            let aik = a[k * n + i];
            if aik != 0.0 {
                for (mv, pv) in mi.iter_mut().zip(pk) {
                    *mv += aik * pv;
                }
            }
        }
    }
    for j in 0..n {
        for i in 0..=j {
            let mut acc = m[(i, j)] + m[(j, i)];
            for l in 0..sigma.ncols() {
                acc += sigma[(i, l)] * sigma[(j, l)];
            }
            out_p[(i, j)] = acc;
            out_p[(j, i)] = acc;
        }
    }
    out_x.copy_from(&model.drift(t, x, u, d));
}

/// Predicts the belief from `t0` to `t1` with `internal_steps` RK4 steps on
/// the joint mean/covariance system.
#[allow(clippy::too_many_arguments)]
pub fn ekf_time_update<M: Model + ?Sized>(
    model: &M,
    belief: &GaussianBelief,
    t0: f64,
    t1: f64,
    u: &SignalProfile,
    d: &SignalProfile,
    internal_steps: usize,
) -> Result<GaussianBelief> {
    check_steps(internal_steps)?;
    check_dim("ekf mean", model.dims().nx, belief.dim())?;
    let mut x = belief.mean().clone();
    let mut p = belief.cov().clone();
    symmetrize_mut(&mut p);
    let mut s = MomentStages::new(x.len());
    let (grid, dt) = internal_grid(t0, t1, internal_steps);
    let half = 0.5 * dt;
    for t in grid {
        let (uu, dd) = (u.eval(t)?, d.eval(t)?);
        let MomentStages { x: xs, p: ps, m, kx, kp } = &mut s;
        for (stage, (h, w)) in [(0.0, 0.0), (half, half), (half, half), (dt, dt)].into_iter().enumerate() {
            xs.copy_from(&x);
            ps.copy_from(&p);
            if stage > 0 {
                xs.axpy(w, &kx[stage - 1], 1.0);
                axpy(ps, w, &kp[stage - 1]);
            }
            moment_rhs(model, t + h, xs, ps, uu, dd, m, &mut kx[stage], &mut kp[stage]);
        }
        for (k, w) in [1.0, 2.0, 2.0, 1.0].into_iter().enumerate() {
            x.axpy(w * dt / 6.0, &kx[k], 1.0);
            axpy(&mut p, w * dt / 6.0, &kp[k]);
        }
        symmetrize_mut(&mut p);
        if !x.iter().chain(p.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { t: t + dt });
        }
    }
    ensure_psd(&p, PREDICTED_PSD_TOL, "ekf predicted covariance")?;
    Ok(GaussianBelief::new_unchecked(x, p))
}

/// Joseph stabilising form `(I − K C) P (I − K C)ᵀ + K R Kᵀ`.
pub fn joseph_update(
    p: &DMatrix<f64>,
    c: &DMatrix<f64>,
    k: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = p.nrows();
    let i_kc = DMatrix::identity(n, n) - k * c;
    let mut out = &i_kc * p * i_kc.transpose() + k * r * k.transpose();
    symmetrize_mut(&mut out);
    out
}

/// Standard form `P − K R_e Kᵀ`.
pub fn standard_update(p: &DMatrix<f64>, k: &DMatrix<f64>, re: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = p - k * re * k.transpose();
    symmetrize_mut(&mut out);
    out
}

/// Corrects the predicted belief with measurement `y` taken at `t`.
pub fn ekf_measurement_update<M: Model + ?Sized>(
    model: &M,
    belief: &GaussianBelief,
    t: f64,
    y: &DVector<f64>,
    noise: &NoiseSpec,
) -> Result<KalmanUpdate> {
    let dims = model.dims();
    check_dim("ekf mean", dims.nx, belief.dim())?;
    check_dim("measurement", dims.ny, y.len())?;
    check_dim("measurement noise", dims.ny, noise.dim())?;
    let (x, p) = (belief.mean(), belief.cov());
    let y_hat = model.measurement(t, x);
    let c = model.measurement_jacobian(t, x);
    let innovation = y - y_hat;
    let pct = p * c.transpose();
    let mut re = &c * &pct + noise.covariance();
    symmetrize_mut(&mut re);
    let gain = right_solve_spd(&pct, &re)?;
    let mean = x + &gain * &innovation;
    let cov = joseph_update(p, &c, &gain, noise.covariance());
    if !mean.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteState { t });
    }
    Ok(KalmanUpdate {
        belief: GaussianBelief::new_unchecked(mean, cov),
        innovation,
        innovation_cov: re,
        gain,
    })
}

/// Extended Kalman filter over an owned model.
pub struct Ekf<M> {
    model: M,
    noise: NoiseSpec,
    internal_steps: usize,
    state: EkfState,
}

impl<M: Model> Ekf<M> {
    pub fn new(model: M, noise: NoiseSpec, initial: GaussianBelief, internal_steps: usize) -> Result<Self> {
        check_steps(internal_steps)?;
        check_dim("ekf initial mean", model.dims().nx, initial.dim())?;
        Ok(Self {
            model,
            noise,
            internal_steps,
            state: EkfState::new(initial),
        })
    }

    pub fn state(&self) -> &EkfState {
        &self.state
    }

    pub fn model(&self) -> &M {
        &self.model
    }
}

impl<M: Model> Filter for Ekf<M> {
    fn kind(&self) -> FilterKind {
        FilterKind::Ekf
    }

    fn time_update(&mut self, t0: f64, t1: f64, u: &SignalProfile, d: &SignalProfile) -> Result<()> {
        self.state.belief =
            ekf_time_update(&self.model, &self.state.belief, t0, t1, u, d, self.internal_steps)?;
        Ok(())
    }

    fn measurement_update(&mut self, t: f64, y: &DVector<f64>) -> Result<()> {
        let update = ekf_measurement_update(&self.model, &self.state.belief, t, y, &self.noise)?;
        self.state = EkfState {
            belief: update.belief,
            innovation: Some(update.innovation),
            innovation_cov: Some(update.innovation_cov),
        };
        Ok(())
    }

    fn belief(&self) -> GaussianBelief {
        self.state.belief.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LinearModel;
    use proptest::prelude::*;

    fn scalar(a: f64, g: f64, c: f64) -> LinearModel {
        LinearModel::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::zeros(1, 0),
            DMatrix::from_element(1, 1, g),
            DMatrix::from_element(1, 1, c),
        )
        .unwrap()
    }

    fn belief1(x: f64, p: f64) -> GaussianBelief {
        GaussianBelief::new(DVector::from_element(1, x), DMatrix::from_element(1, 1, p)).unwrap()
    }

    fn none() -> SignalProfile {
        SignalProfile::constant(DVector::zeros(0))
    }

    #[test]
    fn mean_follows_exponential_decay() {
        let out = ekf_time_update(&scalar(-1.0, 0.0, 1.0), &belief1(1.0, 0.0), 0.0, 1.0, &none(), &none(), 100)
            .unwrap();
        assert!((out.mean()[0] - (-1.0f64).exp()).abs() < 1e-8);
        assert_eq!(out.cov()[(0, 0)], 0.0);
    }

    #[test]
    fn covariance_follows_lyapunov_solution() {
        let model = scalar(-1.0, 2f64.sqrt(), 1.0);
        let out = ekf_time_update(&model, &belief1(0.0, 0.0), 0.0, 1.0, &none(), &none(), 100).unwrap();
        let exact = 1.0 - (-2.0f64).exp();
        assert!((out.cov()[(0, 0)] - exact).abs() < 1e-6, "{}", out.cov()[(0, 0)]);
    }

    #[test]
    fn zero_dynamics_leave_belief_unchanged() {
        let b = GaussianBelief::new(
            DVector::from_vec(vec![1.0, -2.0]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
        )
        .unwrap();
        let model = LinearModel::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 0),
            DMatrix::zeros(2, 1),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let out = ekf_time_update(&model, &b, 0.0, 5.0, &none(), &none(), 10).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn scalar_measurement_update_by_hand() {
        let noise = NoiseSpec::from_std(&[1.0]).unwrap();
        let y = DVector::from_element(1, 1.0);
        let up = ekf_measurement_update(&scalar(0.0, 0.0, 1.0), &belief1(0.0, 1.0), 0.0, &y, &noise).unwrap();
        assert!((up.gain[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((up.belief.mean()[0] - 0.5).abs() < 1e-15);
        assert!((up.belief.cov()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((up.innovation_cov[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn unobservable_measurement_changes_nothing() {
        let noise = NoiseSpec::from_std(&[0.7]).unwrap();
        let prior = belief1(3.0, 2.0);
        let up = ekf_measurement_update(&scalar(0.0, 0.0, 0.0), &prior, 0.0, &DVector::from_element(1, 9.0), &noise)
            .unwrap();
        assert_eq!(up.gain[(0, 0)], 0.0);
        assert_eq!(up.belief, prior);
        assert_eq!(&up.innovation_cov, noise.covariance());
    }

    #[test]
    fn perfect_prior_ignores_measurement() {
        let noise = NoiseSpec::from_std(&[1.0]).unwrap();
        let prior = belief1(3.0, 0.0);
        let up = ekf_measurement_update(&scalar(0.0, 0.0, 1.0), &prior, 0.0, &DVector::from_element(1, 9.0), &noise)
            .unwrap();
        assert_eq!(up.gain[(0, 0)], 0.0);
        assert_eq!(up.belief, prior);
    }

    #[test]
    fn filter_records_innovation() {
        let mut ekf = Ekf::new(scalar(-0.5, 0.1, 1.0), NoiseSpec::from_std(&[0.1]).unwrap(), belief1(1.0, 1.0), 10)
            .unwrap();
        ekf.time_update(0.0, 1.0, &none(), &none()).unwrap();
        ekf.measurement_update(1.0, &DVector::from_element(1, 0.4)).unwrap();
        assert!(ekf.state().innovation.is_some());
        assert!(ekf.state().innovation_cov.as_ref().unwrap()[(0, 0)] > 0.01);
    }

    fn spd(n: usize, entries: &[f64], shift: f64) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |i, j| entries[(i * 7 + j * 3) % entries.len()]);
        &a * a.transpose() + DMatrix::identity(n, n) * shift
    }

    proptest! {
        #[test]
        fn measurement_update_never_increases_trace(
            n in 1usize..6,
            m in 1usize..4,
            entries in prop::collection::vec(-1.0f64..1.0, 60),
            ys in prop::collection::vec(-5.0f64..5.0, 4),
        ) {
            let p = spd(n, &entries, 0.1);
            let c = DMatrix::from_fn(m, n, |i, j| entries[(i * 5 + j + 11) % entries.len()]);
            let r = spd(m, &entries[20..], 0.05);
            let model = LinearModel::new(DMatrix::zeros(n, n), DMatrix::zeros(n, 0), DMatrix::zeros(n, 1), c).unwrap();
            let prior = GaussianBelief::new(DVector::zeros(n), p.clone()).unwrap();
            let y = DVector::from_fn(m, |i, _| ys[i]);
            let up = ekf_measurement_update(&model, &prior, 0.0, &y, &NoiseSpec::new(r).unwrap()).unwrap();
            prop_assert!(up.belief.cov().trace() <= p.trace() + 1e-12);
        }
    }
}
