use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{FilterKind, UkfParams};
use crate::mfts::{MftsParams, MftsPlant};

/// End-to-end benchmark configuration.
///
/// Every table and field has a default, so an empty file is the reference
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Master seed; every random consumer derives its own stream from it.
    pub seed: u64,
    /// Simulated duration, s.
    pub horizon: f64,
    /// Number of measurement samples.
    pub samples: usize,
    /// Enabled filters, run in this order.
    pub filters: Vec<FilterKind>,
    pub plant: MftsPlant,
    pub simulation: SimulationConfig,
    pub estimation: EstimationConfig,
    pub measurement: MeasurementConfig,
    pub ekf: Tuning,
    pub ukf: UkfConfig,
    pub enkf: EnkfConfig,
    pub pf: PfConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            horizon: 1800.0,
            samples: 120,
            filters: FilterKind::ALL.to_vec(),
            plant: MftsPlant::default(),
            simulation: SimulationConfig::default(),
            estimation: EstimationConfig::default(),
            measurement: MeasurementConfig::default(),
            ekf: Tuning {
                lambda: 0.0,
                sigma: 5.0,
            },
            ukf: UkfConfig::default(),
            enkf: EnkfConfig::default(),
            pf: PfConfig::default(),
        }
    }
}

/// Truth process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub internal_steps: usize,
    /// Disturbance mean-reversion rate.
    pub lambda: f64,
    /// Disturbance diffusion.
    pub sigma: f64,
    /// Nominal disturbance levels, held over equal-length segments of the
    /// horizon and shared by both disturbance channels.
    pub levels: Vec<f64>,
    /// Pump flows F₁, F₂, cm³/s.
    pub pumps: [f64; 2],
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            internal_steps: 1000,
            lambda: 0.1,
            sigma: 5.0,
            levels: vec![100.0, 200.0, 300.0],
            pumps: [300.0, 300.0],
        }
    }
}

/// Settings shared by all estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationConfig {
    pub internal_steps: usize,
    /// Nominal disturbance level assumed by every estimator.
    pub nominal_disturbance: f64,
    /// Initial standard deviation of the mass states, g.
    pub mass_std: f64,
    /// Initial standard deviation of the disturbance states, cm³/s.
    pub flow_std: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            internal_steps: 100,
            nominal_disturbance: 150.0,
            mass_std: 100.0,
            flow_std: 10.0,
        }
    }
}

/// Measured tank levels and their noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementConfig {
    /// Level noise standard deviation, cm. Zero is allowed except for the
    /// particle filter, whose weights need a definite noise covariance.
    pub std: f64,
    /// Measured tanks, 1-based.
    pub tanks: Vec<usize>,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            std: 3.5,
            tanks: vec![1, 2, 3, 4],
        }
    }
}

/// Disturbance model assumed by an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tuning {
    pub lambda: f64,
    pub sigma: f64,
}

impl Default for Tuning {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            sigma: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UkfConfig {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub sigma: f64,
}

impl Default for UkfConfig {
    fn default() -> Self {
        let p = UkfParams::default();
        Self {
            alpha: p.alpha,
            beta: p.beta,
            kappa: p.kappa,
            lambda: 0.0,
            sigma: 1.0,
        }
    }
}

impl UkfConfig {
    pub fn params(&self) -> UkfParams {
        UkfParams {
            alpha: self.alpha,
            beta: self.beta,
            kappa: self.kappa,
        }
    }

    pub fn tuning(&self) -> Tuning {
        Tuning {
            lambda: self.lambda,
            sigma: self.sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnkfConfig {
    pub members: usize,
    pub lambda: f64,
    pub sigma: f64,
}

impl Default for EnkfConfig {
    fn default() -> Self {
        Self {
            members: 250,
            lambda: 2e-3,
            sigma: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PfConfig {
    pub particles: usize,
    pub lambda: f64,
    pub sigma: f64,
}

impl Default for PfConfig {
    fn default() -> Self {
        Self {
            particles: 1000,
            lambda: 2e-3,
            sigma: 5.0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.samples < 1 {
            return bad("samples must be at least 1".into());
        }
        if self.simulation.internal_steps < 1 || self.estimation.internal_steps < 1 {
            return bad("internal steps must be at least 1".into());
        }
        if self.enkf.members < 2 {
            return bad("the ensemble needs at least 2 members".into());
        }
        if self.pf.particles < 1 {
            return bad("the particle filter needs at least 1 particle".into());
        }
        if self.simulation.levels.is_empty() {
            return bad("at least one disturbance level is required".into());
        }
        let mut seen = self.filters.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.filters.len() {
            return bad(format!("duplicate filters in {:?}", self.filters));
        }
        if !(self.measurement.std >= 0.0) {
            return bad("measurement std must be non-negative".into());
        }
        if !(self.estimation.mass_std >= 0.0 && self.estimation.flow_std >= 0.0) {
            return bad("initial standard deviations must be non-negative".into());
        }
        self.ukf.params().validate()?;
        self.measured_tanks()?;
        for tuning in [self.simulation_tuning(), self.ekf, self.ukf.tuning()] {
            self.model_params(tuning).validate()?;
        }
        Ok(())
    }

    /// Measured tanks as 0-based indices.
    pub fn measured_tanks(&self) -> Result<Vec<usize>> {
        if self.measurement.tanks.iter().any(|t| !(1..=4).contains(t)) {
            return Err(Error::InvalidConfig(format!(
                "measured tanks must be within 1..=4: {:?}",
                self.measurement.tanks
            )));
        }
        Ok(self.measurement.tanks.iter().map(|t| t - 1).collect())
    }

    pub fn simulation_tuning(&self) -> Tuning {
        Tuning {
            lambda: self.simulation.lambda,
            sigma: self.simulation.sigma,
        }
    }

    pub fn tuning(&self, kind: FilterKind) -> Tuning {
        match kind {
            FilterKind::Ekf => self.ekf,
            FilterKind::Ukf => self.ukf.tuning(),
            FilterKind::Enkf => Tuning {
                lambda: self.enkf.lambda,
                sigma: self.enkf.sigma,
            },
            FilterKind::Pf => Tuning {
                lambda: self.pf.lambda,
                sigma: self.pf.sigma,
            },
        }
    }

    pub fn model_params(&self, tuning: Tuning) -> MftsParams {
        MftsParams {
            plant: self.plant,
            lambda: [tuning.lambda; 2],
            sigma: [tuning.sigma; 2],
        }
    }

    pub fn sample_interval(&self) -> f64 {
        self.horizon / self.samples as f64
    }
}
