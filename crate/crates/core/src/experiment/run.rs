use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::filters::{Ekf, Enkf, Filter, FilterKind, ParticleFilter, Ukf};
use crate::mfts::{MftsModel, DISTURBANCE_STATES, MASS_STATES};
use crate::model::{GaussianBelief, NoiseSpec, SignalProfile};
use crate::numerics::RngStream;
use crate::simulator::{simulate, InitialState, SimConfig, TruthRecord};

use super::config::{BenchConfig, Tuning};
use super::metrics::mape;

/// Random stream of the truth simulation (process and measurement noise).
pub const TRUTH_STREAM: u64 = 1;
/// Random stream of the ensemble Kalman filter.
pub const ENKF_STREAM: u64 = 2;
/// Random stream of the particle filter.
pub const PF_STREAM: u64 = 3;

pub fn model(cfg: &BenchConfig, tuning: Tuning) -> Result<MftsModel> {
    MftsModel::with_measured_tanks(cfg.model_params(tuning), &cfg.measured_tanks()?)
}

pub fn measurement_noise(cfg: &BenchConfig) -> Result<NoiseSpec> {
    let ny = cfg.measurement.tanks.len();
    NoiseSpec::new(DMatrix::from_diagonal_element(ny, ny, cfg.measurement.std.powi(2)))
}

pub fn pump_profile(cfg: &BenchConfig) -> SignalProfile {
    SignalProfile::constant(DVector::from_column_slice(&cfg.simulation.pumps))
}

/// Stepped nominal disturbance driving the truth.
pub fn truth_disturbance_profile(cfg: &BenchConfig) -> Result<SignalProfile> {
    let values = cfg
        .simulation
        .levels
        .iter()
        .map(|l| DVector::from_element(2, *l))
        .collect();
    SignalProfile::equal_segments(0.0, cfg.horizon, values)
}

/// Constant nominal disturbance assumed by the estimators.
pub fn nominal_disturbance_profile(cfg: &BenchConfig) -> SignalProfile {
    SignalProfile::constant(DVector::from_element(2, cfg.estimation.nominal_disturbance))
}

/// Steady state of the plant at the pump flows and the first disturbance level.
pub fn initial_state(cfg: &BenchConfig) -> Result<DVector<f64>> {
    let model = model(cfg, cfg.simulation_tuning())?;
    let u = DVector::from_column_slice(&cfg.simulation.pumps);
    let d = DVector::from_element(2, cfg.simulation.levels[0]);
    model.steady_state(&u, &d)
}

pub fn initial_belief(cfg: &BenchConfig) -> Result<GaussianBelief> {
    let e = &cfg.estimation;
    let var = DVector::from_fn(6, |i, _| {
        if i < 4 {
            e.mass_std.powi(2)
        } else {
            e.flow_std.powi(2)
        }
    });
    GaussianBelief::new(initial_state(cfg)?, DMatrix::from_diagonal(&var))
}

pub fn simulate_truth(cfg: &BenchConfig) -> Result<TruthRecord> {
    cfg.validate()?;
    let sim = SimConfig {
        t0: 0.0,
        tf: cfg.horizon,
        samples: cfg.samples,
        internal_steps: cfg.simulation.internal_steps,
    };
    simulate(
        &model(cfg, cfg.simulation_tuning())?,
        &sim,
        &InitialState::Fixed(initial_state(cfg)?),
        &pump_profile(cfg),
        &truth_disturbance_profile(cfg)?,
        &measurement_noise(cfg)?,
        &mut RngStream::derive(cfg.seed, TRUTH_STREAM),
    )
}

pub fn build_filter(cfg: &BenchConfig, kind: FilterKind) -> Result<Box<dyn Filter>> {
    let model = model(cfg, cfg.tuning(kind))?;
    let noise = measurement_noise(cfg)?;
    let initial = initial_belief(cfg)?;
    let steps = cfg.estimation.internal_steps;
    Ok(match kind {
        FilterKind::Ekf => Box::new(Ekf::new(model, noise, initial, steps)?),
        FilterKind::Ukf => Box::new(Ukf::new(model, noise, cfg.ukf.params(), initial, steps)?),
        FilterKind::Enkf => Box::new(Enkf::new(
            model,
            noise,
            &initial,
            cfg.enkf.members,
            steps,
            RngStream::derive(cfg.seed, ENKF_STREAM),
        )?),
        FilterKind::Pf => Box::new(ParticleFilter::new(
            model,
            noise,
            &initial,
            cfg.pf.particles,
            steps,
            RngStream::derive(cfg.seed, PF_STREAM),
        )?),
    })
}

/// One filter's pass over a truth record. Per-step vectors cover the
/// samples `k = 1..=N` that completed before any error.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRun {
    pub kind: FilterKind,
    pub estimates: Vec<DVector<f64>>,
    pub variances: Vec<DVector<f64>>,
    /// Effective sample size before resampling (particle filter only).
    pub ess: Vec<f64>,
    /// Cumulative time-update wall clock, s.
    pub tu_seconds: Vec<f64>,
    /// Cumulative measurement-update wall clock, s.
    pub mu_seconds: Vec<f64>,
    /// Filtered members per step, when requested.
    pub members: Vec<Vec<DVector<f64>>>,
    pub error: Option<Error>,
}

impl FilterRun {
    fn new(kind: FilterKind) -> Self {
        Self {
            kind,
            estimates: Vec::new(),
            variances: Vec::new(),
            ess: Vec::new(),
            tu_seconds: Vec::new(),
            mu_seconds: Vec::new(),
            members: Vec::new(),
            error: None,
        }
    }

    pub fn steps(&self) -> usize {
        self.estimates.len()
    }

    pub fn tu_total(&self) -> f64 {
        self.tu_seconds.last().copied().unwrap_or(0.0)
    }

    pub fn mu_total(&self) -> f64 {
        self.mu_seconds.last().copied().unwrap_or(0.0)
    }

    /// MAPE over the states in `mask`, or `None` if the run did not finish.
    pub fn mape(&self, truth: &TruthRecord, mask: &[usize]) -> Result<Option<f64>> {
        if self.error.is_some() || self.steps() != truth.samples() {
            return Ok(None);
        }
        mape(&truth.states[1..], &self.estimates, mask).map(Some)
    }

    pub fn mape_x(&self, truth: &TruthRecord) -> Result<Option<f64>> {
        self.mape(truth, &MASS_STATES)
    }

    pub fn mape_d(&self, truth: &TruthRecord) -> Result<Option<f64>> {
        self.mape(truth, &DISTURBANCE_STATES)
    }
}

/// Runs one filter over all measurements of `truth`. Errors end the run and
/// are kept in the result.
pub fn run_filter(cfg: &BenchConfig, kind: FilterKind, truth: &TruthRecord, keep_members: bool) -> FilterRun {
    let mut run = FilterRun::new(kind);
    if let Err(e) = drive(cfg, kind, truth, keep_members, &mut run) {
        run.error = Some(e);
    }
    run
}

fn drive(
    cfg: &BenchConfig,
    kind: FilterKind,
    truth: &TruthRecord,
    keep_members: bool,
    run: &mut FilterRun,
) -> Result<()> {
    let mut filter = build_filter(cfg, kind)?;
    let u = pump_profile(cfg);
    let d = nominal_disturbance_profile(cfg);
    let (mut tu, mut mu) = (0.0, 0.0);
    for (k, y) in truth.measurements.iter().enumerate() {
        let (t0, t1) = (truth.times[k], truth.times[k + 1]);
        let start = Instant::now();
        filter.time_update(t0, t1, &u, &d)?;
        tu += start.elapsed().as_secs_f64();
        let start = Instant::now();
        filter.measurement_update(t1, y)?;
        mu += start.elapsed().as_secs_f64();

        let belief = filter.belief();
        run.estimates.push(belief.mean().clone());
        run.variances.push(belief.variances());
        if let Some(ess) = filter.effective_sample_size() {
            run.ess.push(ess);
        }
        if keep_members {
            if let Some(m) = filter.members() {
                run.members.push(m.to_vec());
            }
        }
        run.tu_seconds.push(tu);
        run.mu_seconds.push(mu);
    }
    Ok(())
}

/// Runs every enabled filter, in configuration order, on the same truth.
pub fn estimate(cfg: &BenchConfig, truth: &TruthRecord, keep_members: bool) -> Result<Vec<FilterRun>> {
    cfg.validate()?;
    if truth.samples() != cfg.samples || truth.times.len() != cfg.samples + 1 {
        return Err(Error::InvalidConfig(format!(
            "truth has {} samples, configuration expects {}",
            truth.samples(),
            cfg.samples
        )));
    }
    Ok(cfg
        .filters
        .iter()
        .map(|kind| run_filter(cfg, *kind, truth, keep_members))
        .collect())
}

/// A truth realization and the filter runs on it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub truth: TruthRecord,
    pub runs: Vec<FilterRun>,
}

impl RunRecord {
    pub fn run(&self, kind: FilterKind) -> Option<&FilterRun> {
        self.runs.iter().find(|r| r.kind == kind)
    }
}

pub fn run_benchmark(cfg: &BenchConfig, keep_members: bool) -> Result<RunRecord> {
    let truth = simulate_truth(cfg)?;
    let runs = estimate(cfg, &truth, keep_members)?;
    Ok(RunRecord { truth, runs })
}
