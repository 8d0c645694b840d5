use nalgebra::{DMatrix, DVector};

use super::random::{belief, rel_err, rel_err_v, spd, stable_model};
use crate::error::Result;
use crate::filters::ekf::{ekf_measurement_update, ekf_time_update};
use crate::filters::ukf::{ukf_measurement_update, ukf_time_update};
use crate::filters::UkfParams;
use crate::model::{GaussianBelief, NoiseSpec, SignalProfile};
use crate::models::LinearModel;
use crate::numerics::linalg::{right_solve_spd, symmetrize_mut};
use crate::numerics::RngStream;

pub const EKF_EXACT_TOL: f64 = 1e-6;
pub const UKF_EKF_TOL: f64 = 1e-8;
/// Independent UKF and EKF runs drift apart through rounding in the
/// small-α sigma set; this bounds the accumulated difference.
pub const UKF_RUN_TOL: f64 = 1e-6;

const STEPS: usize = 100;
const TS: f64 = 0.1;
/// Without diffusion the covariance contracts like `e^{2Ft}`; the short
/// interval keeps it factorable over all steps.
const TS_NO_DIFFUSION: f64 = 0.01;
const INTERNAL_STEPS: usize = 50;

/// Largest relative errors, `‖a − b‖_max / max(1, ‖b‖_max)`, over every
/// model and step.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOracleReport {
    pub models: usize,
    pub steps: usize,
    /// EKF against the exact discrete Kalman filter.
    pub ekf_vs_exact: f64,
    /// UKF measurement update from the EKF prior.
    pub ukf_update_vs_ekf: f64,
    /// One UKF time and measurement update from the EKF posterior, no diffusion.
    pub ukf_step_vs_ekf: f64,
    /// Independent UKF and EKF runs, no diffusion.
    pub ukf_run_vs_ekf: f64,
}

impl LinearOracleReport {
    pub fn passed(&self) -> bool {
        self.ekf_vs_exact <= EKF_EXACT_TOL
            && self.ukf_update_vs_ekf <= UKF_EKF_TOL
            && self.ukf_step_vs_ekf <= UKF_EKF_TOL
            && self.ukf_run_vs_ekf <= UKF_RUN_TOL
    }
}

fn none() -> SignalProfile {
    SignalProfile::constant(DVector::zeros(0))
}

fn kalman_update(b: &GaussianBelief, c: &DMatrix<f64>, r: &DMatrix<f64>, y: &DVector<f64>) -> Result<GaussianBelief> {
    let p = b.cov();
    let s = c * p * c.transpose() + r;
    let k = right_solve_spd(&(p * c.transpose()), &s)?;
    let mean = b.mean() + &k * (y - c * b.mean());
    let mut cov = p - &k * c * p;
    symmetrize_mut(&mut cov);
    GaussianBelief::new(mean, cov)
}

struct Case {
    model: LinearModel,
    noise: NoiseSpec,
    ys: Vec<DVector<f64>>,
    initial: GaussianBelief,
}

fn case(rng: &mut RngStream, index: usize, diffusion: bool) -> Result<Case> {
    let nx = 1 + index % 4;
    let ny = 1 + index % 3;
    let model = stable_model(rng, nx, nx, ny);
    let model = if diffusion { model } else { model.without_diffusion() };
    let noise = NoiseSpec::new(spd(rng, ny, 0.1))?;
    let ys = (0..STEPS).map(|_| DVector::from_fn(ny, |_, _| rng.standard_normal())).collect();
    let initial = belief(rng, nx);
    Ok(Case { model, noise, ys, initial })
}

/// EKF and UKF on `models` random stable linear models (`n_x ≤ 4`) over 100
/// steps each.
pub fn linear_oracle(models: usize, seed: u64) -> Result<LinearOracleReport> {
    let mut rng = RngStream::new(seed);
    let params = UkfParams::default();
    let mut report = LinearOracleReport {
        models,
        steps: STEPS,
        ekf_vs_exact: 0.0,
        ukf_update_vs_ekf: 0.0,
        ukf_step_vs_ekf: 0.0,
        ukf_run_vs_ekf: 0.0,
    };
    let worst = |acc: &mut f64, a: &GaussianBelief, b: &GaussianBelief| {
        *acc = acc.max(rel_err_v(a.mean(), b.mean())).max(rel_err(a.cov(), b.cov()));
    };

    for index in 0..models {
        let Case { model, noise, ys, initial } = case(&mut rng, index, true)?;
        let disc = model.discretize(TS);
        let (mut exact, mut ekf) = (initial.clone(), initial);
        for (k, y) in ys.iter().enumerate() {
            let t0 = k as f64 * TS;
            exact = kalman_update(&disc.predict(&exact, &DVector::zeros(0)), model.c(), noise.covariance(), y)?;
            let prior = ekf_time_update(&model, &ekf, t0, t0 + TS, &none(), &none(), INTERNAL_STEPS)?;
            ekf = ekf_measurement_update(&model, &prior, t0 + TS, y, &noise)?.belief;
            let ukf = ukf_measurement_update(&model, &prior, &params, t0 + TS, y, &noise)?.belief;
            worst(&mut report.ekf_vs_exact, &ekf, &exact);
            worst(&mut report.ukf_update_vs_ekf, &ukf, &ekf);
        }

        let Case { model, noise, ys, initial } = case(&mut rng, index, false)?;
        let (mut ekf, mut ukf) = (initial.clone(), initial);
        for (k, y) in ys.iter().enumerate() {
            let (t0, t1) = (k as f64 * TS_NO_DIFFUSION, (k + 1) as f64 * TS_NO_DIFFUSION);
            let prior = ekf_time_update(&model, &ekf, t0, t1, &none(), &none(), INTERNAL_STEPS)?;
            let next = ekf_measurement_update(&model, &prior, t1, y, &noise)?.belief;
            let step = ukf_time_update(&model, &ekf, &params, t0, t1, &none(), &none(), INTERNAL_STEPS)?;
            worst(&mut report.ukf_step_vs_ekf, &step, &prior);
            let step = ukf_measurement_update(&model, &step, &params, t1, y, &noise)?.belief;
            worst(&mut report.ukf_step_vs_ekf, &step, &next);
            ekf = next;

            ukf = ukf_time_update(&model, &ukf, &params, t0, t1, &none(), &none(), INTERNAL_STEPS)?;
            ukf = ukf_measurement_update(&model, &ukf, &params, t1, y, &noise)?.belief;
            worst(&mut report.ukf_run_vs_ekf, &ukf, &ekf);
        }
    }
    Ok(report)
}
