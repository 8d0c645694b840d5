use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::filters::{Enkf, Filter, ParticleFilter};
use crate::model::{GaussianBelief, NoiseSpec, SignalProfile};
use crate::models::LinearModel;
use crate::numerics::RngStream;

/// Accepted log-log slopes of the RMSE against the sample size.
pub const SLOPE_RANGE: (f64, f64) = (-0.65, -0.35);

// dx = 0.5 dω over one unit of time, y = x + v with R = 0.25, prior N(1, 1).
// Euler–Maruyama is exact for a pure random walk, so any error is Monte Carlo.
const G: f64 = 0.5;
const R: f64 = 0.25;
const Y: f64 = 2.0;
const PRIOR: (f64, f64) = (1.0, 1.0);

/// RMSE of the Monte Carlo posterior mean against the Kalman posterior for
/// each ensemble size, and the fitted log-log slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub exact_mean: f64,
    pub enkf_rmse: Vec<f64>,
    pub pf_rmse: Vec<f64>,
    pub enkf_slope: f64,
    pub pf_slope: f64,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        let ok = |s: f64| (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&s);
        ok(self.enkf_slope) && ok(self.pf_slope)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn one_step(filter: &mut dyn Filter) -> Result<f64> {
    let none = SignalProfile::constant(DVector::zeros(0));
    filter.time_update(0.0, 1.0, &none, &none)?;
    filter.measurement_update(1.0, &DVector::from_element(1, Y))?;
    Ok(filter.belief().mean()[0])
}

/// One time and one measurement update of a scalar random walk, repeated
/// with independent streams for every size.
pub fn monte_carlo_convergence(sizes: &[usize], repetitions: usize, seed: u64) -> Result<ConvergenceReport> {
    let one = |v: f64| DMatrix::from_element(1, 1, v);
    let model = LinearModel::new(one(0.0), DMatrix::zeros(1, 0), one(G), one(1.0))?;
    let noise = NoiseSpec::new(one(R))?;
    let prior = GaussianBelief::new(DVector::from_element(1, PRIOR.0), one(PRIOR.1))?;
    let predicted = PRIOR.1 + G * G;
    let exact_mean = PRIOR.0 + predicted / (predicted + R) * (Y - PRIOR.0);

    let mut enkf_rmse = Vec::with_capacity(sizes.len());
    let mut pf_rmse = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let (mut se_enkf, mut se_pf) = (0.0, 0.0);
        for rep in 0..repetitions {
            let stream = ((i as u64) << 32 | rep as u64) << 1;
            let mut enkf = Enkf::new(model.clone(), noise.clone(), &prior, n, 1, RngStream::derive(seed, stream))?;
            se_enkf += (one_step(&mut enkf)? - exact_mean).powi(2);
            let mut pf = ParticleFilter::new(model.clone(), noise.clone(), &prior, n, 1, RngStream::derive(seed, stream | 1))?;
            se_pf += (one_step(&mut pf)? - exact_mean).powi(2);
        }
        enkf_rmse.push((se_enkf / repetitions as f64).sqrt());
        pf_rmse.push((se_pf / repetitions as f64).sqrt());
    }
    let x: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    Ok(ConvergenceReport {
        sizes: sizes.to_vec(),
        repetitions,
        exact_mean,
        enkf_slope: log_log_slope(&x, &enkf_rmse),
        pf_slope: log_log_slope(&x, &pf_rmse),
        enkf_rmse,
        pf_rmse,
    })
}
