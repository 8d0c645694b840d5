//! The four continuous-discrete filters and their common interface.

pub mod ekf;
pub mod enkf;
pub mod ensemble;
pub mod pf;
pub mod ukf;

#[cfg(test)]
pub(crate) mod testutil;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GaussianBelief, Model, SignalProfile};
use crate::numerics::rk4_step;

pub use ekf::Ekf;
pub use enkf::Enkf;
pub use pf::ParticleFilter;
pub use ukf::{Ukf, UkfParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Ekf,
    Ukf,
    Enkf,
    Pf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 4] = [FilterKind::Ekf, FilterKind::Ukf, FilterKind::Enkf, FilterKind::Pf];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Ekf => "ekf",
            FilterKind::Ukf => "ukf",
            FilterKind::Enkf => "enkf",
            FilterKind::Pf => "pf",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FilterKind::Ekf => "EKF",
            FilterKind::Ukf => "UKF",
            FilterKind::Enkf => "EnKF",
            FilterKind::Pf => "PF",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ekf" => Ok(FilterKind::Ekf),
            "ukf" => Ok(FilterKind::Ukf),
            "enkf" => Ok(FilterKind::Enkf),
            "pf" => Ok(FilterKind::Pf),
            other => Err(Error::InvalidConfig(format!("unknown filter '{other}'"))),
        }
    }
}

/// A recursive estimator driven by alternating time and measurement updates.
pub trait Filter: Send {
    fn kind(&self) -> FilterKind;

    /// Predicts from `t0` to `t1`.
    fn time_update(&mut self, t0: f64, t1: f64, u: &SignalProfile, d: &SignalProfile) -> Result<()>;

    /// Corrects with the measurement `y` taken at `t`.
    fn measurement_update(&mut self, t: f64, y: &DVector<f64>) -> Result<()>;

    /// Current mean and covariance estimate.
    fn belief(&self) -> GaussianBelief;

    /// Effective sample size before the last resampling, for weighted sets.
    fn effective_sample_size(&self) -> Option<f64> {
        None
    }

    /// Current ensemble or particle cloud, for sampling filters.
    fn members(&self) -> Option<&[DVector<f64>]> {
        None
    }
}

/// Start times of the `steps` equal sub-steps of `[t0, t1]` and their length.
pub(crate) fn internal_grid(t0: f64, t1: f64, steps: usize) -> (impl Iterator<Item = f64>, f64) {
    let dt = (t1 - t0) / steps as f64;
    ((0..steps).map(move |j| t0 + j as f64 * dt), dt)
}

/// Drift-only RK4 propagation of one state over `[t0, t1]`, with `u` and `d`
/// held at their value at the start of each sub-step.
pub(crate) fn propagate_drift<M: Model + ?Sized>(
    model: &M,
    x: &DVector<f64>,
    t0: f64,
    t1: f64,
    u: &SignalProfile,
    d: &SignalProfile,
    steps: usize,
) -> Result<DVector<f64>> {
    let (grid, dt) = internal_grid(t0, t1, steps);
    let mut x = x.clone();
    for t in grid {
        let (uu, dd) = (u.eval(t)?, d.eval(t)?);
        x = rk4_step(|t, x| model.drift(t, x, uu, dd), &x, t, dt)?;
    }
    Ok(x)
}

pub(crate) fn check_steps(steps: usize) -> Result<()> {
    if steps == 0 {
        Err(Error::InvalidConfig("internal_steps must be >= 1".into()))
    } else {
        Ok(())
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_round_trips_through_names() {
        for kind in FilterKind::ALL {
            assert_eq!(kind.name().parse::<FilterKind>().unwrap(), kind);
        }
        assert!("kf".parse::<FilterKind>().is_err());
    }
}
