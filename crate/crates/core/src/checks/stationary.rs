use crate::error::{Error, Result};
use crate::experiment::{simulate_truth, BenchConfig};
use crate::mfts::DISTURBANCE_STATES;

/// Accepted relative deviation from `σ̃²/(2λ)`.
pub const RELATIVE_TOL: f64 = 0.15;
const BURN_IN: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryReport {
    pub samples: usize,
    pub expected: f64,
    /// Sample variance of each disturbance state.
    pub measured: Vec<f64>,
}

impl StationaryReport {
    pub fn max_relative_error(&self) -> f64 {
        self.measured
            .iter()
            .map(|v| (v - self.expected).abs() / self.expected)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_relative_error() <= RELATIVE_TOL
    }
}

/// Simulates the four-tank truth at a constant disturbance level for
/// `samples` sampling intervals and measures the disturbance variance.
pub fn ou_stationary_variance(cfg: &BenchConfig, samples: usize) -> Result<StationaryReport> {
    if samples < 2 * BURN_IN {
        return Err(Error::InvalidConfig(format!("need at least {} samples, got {samples}", 2 * BURN_IN)));
    }
    let mut cfg = cfg.clone();
    cfg.horizon = cfg.sample_interval() * samples as f64;
    cfg.samples = samples;
    cfg.simulation.levels.truncate(1);
    let truth = simulate_truth(&cfg)?;
    let measured = DISTURBANCE_STATES
        .iter()
        .map(|&i| {
            let v: Vec<f64> = truth.states[BURN_IN..].iter().map(|x| x[i]).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        })
        .collect();
    let (lambda, sigma) = (cfg.simulation.lambda, cfg.simulation.sigma);
    Ok(StationaryReport {
        samples,
        expected: sigma * sigma / (2.0 * lambda),
        measured,
    })
}
