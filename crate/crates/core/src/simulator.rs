//! Ground-truth trajectories and noisy measurements from a [`Model`].

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{GaussianBelief, Model, NoiseSpec, SignalProfile};
use crate::numerics::{euler_maruyama_step, psd_sqrt, RngStream};

/// Sampling grid and integration resolution of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub t0: f64,
    pub tf: f64,
    /// Number of measurement samples `N`.
    pub samples: usize,
    /// Euler–Maruyama steps per sampling interval.
    pub internal_steps: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tf > self.t0) || self.samples < 1 || self.internal_steps < 1 {
            return Err(Error::InvalidConfig(format!(
                "simulation needs tf > t0, N >= 1, internal_steps >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }

    pub fn sample_interval(&self) -> f64 {
        (self.tf - self.t0) / self.samples as f64
    }

    /// `t_0, …, t_N`.
    pub fn sample_times(&self) -> Vec<f64> {
        let ts = self.sample_interval();
        (0..=self.samples).map(|k| self.t0 + k as f64 * ts).collect()
    }
}

/// How the simulated initial state is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Fixed(DVector<f64>),
    /// Drawn from `N(x̄₀, P₀)`.
    Sampled(GaussianBelief),
}

/// Simulated states at `t_0..t_N` and measurements at `t_1..t_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub measurements: Vec<DVector<f64>>,
}

impl TruthRecord {
    pub fn samples(&self) -> usize {
        self.measurements.len()
    }
}

/// Integrates the stochastic model from `t0` to `tf`.
///
/// Each sampling interval is split into `internal_steps` Euler–Maruyama
/// steps with a fresh `dω ~ N(0, I·dt)` per step. Inputs and disturbances are
/// held at their value at the start of each step. After every step the state
/// passes through [`Model::project_state`].
#[allow(clippy::too_many_arguments)]
pub fn simulate<M: Model + ?Sized>(
    model: &M,
    cfg: &SimConfig,
    x0: &InitialState,
    u: &SignalProfile,
    d: &SignalProfile,
    noise: &NoiseSpec,
    rng: &mut RngStream,
) -> Result<TruthRecord> {
    cfg.validate()?;
    let dims = model.dims();
    if noise.dim() != dims.ny {
        return Err(Error::DimensionMismatch {
            context: "measurement noise",
            expected: dims.ny,
            actual: noise.dim(),
        });
    }
    let mut x = match x0 {
        InitialState::Fixed(x) => x.clone(),
        InitialState::Sampled(belief) => {
            let l = psd_sqrt(belief.cov(), 1e-12)?;
            let z = DVector::from_fn(belief.dim(), |_, _| rng.standard_normal());
            belief.mean() + l * z
        }
    };
    if x.len() != dims.nx {
        return Err(Error::DimensionMismatch {
            context: "initial state",
            expected: dims.nx,
            actual: x.len(),
        });
    }

    let times = cfg.sample_times();
    let dt = cfg.sample_interval() / cfg.internal_steps as f64;
    let sqrt_dt = dt.sqrt();
    let mut states = Vec::with_capacity(cfg.samples + 1);
    let mut measurements = Vec::with_capacity(cfg.samples);
    states.push(x.clone());

    for k in 0..cfg.samples {
        let t_k = times[k];
        for j in 0..cfg.internal_steps {
            let t = t_k + j as f64 * dt;
            let (uu, dd) = (u.eval(t)?, d.eval(t)?);
            let dw = DVector::from_fn(dims.nw, |_, _| sqrt_dt * rng.standard_normal());
            x = euler_maruyama_step(
                |t, x| model.drift(t, x, uu, dd),
                |t, x| model.diffusion(t, x, uu, dd),
                &x,
                t,
                dt,
                &dw,
            )?;
            model.project_state(&mut x);
        }
        let t_next = times[k + 1];
        let y = model.measurement(t_next, &x) + noise.sample(rng);
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        states.push(x.clone());
        measurements.push(y);
    }

    Ok(TruthRecord {
        times,
        states,
        measurements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LinearModel, OrnsteinUhlenbeck};
    use crate::numerics::rk4_step;
    use nalgebra::DMatrix;

    fn decay() -> LinearModel {
        LinearModel::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::zeros(1, 0),
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 2.0),
        )
        .unwrap()
    }

    fn run_decay(internal_steps: usize) -> TruthRecord {
        let cfg = SimConfig {
            t0: 0.0,
            tf: 1.0,
            samples: 1,
            internal_steps,
        };
        simulate(
            &decay(),
            &cfg,
            &InitialState::Fixed(DVector::from_element(1, 1.0)),
            &SignalProfile::constant(DVector::zeros(0)),
            &SignalProfile::constant(DVector::zeros(0)),
            &NoiseSpec::new(DMatrix::zeros(1, 1)).unwrap(),
            &mut RngStream::new(1),
        )
        .unwrap()
    }

    #[test]
    fn noiseless_decay_matches_exponential() {
        let rec = run_decay(10_000);
        assert!((rec.states[1][0] - (-1.0f64).exp()).abs() < 1e-3);
        // noiseless measurement is exactly h(x)
        assert_eq!(rec.measurements[0][0], 2.0 * rec.states[1][0]);
    }

    #[test]
    fn euler_error_halves_with_step() {
        let exact = (-1.0f64).exp();
        let e1 = (run_decay(100).states[1][0] - exact).abs();
        let e2 = (run_decay(200).states[1][0] - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn noiseless_simulation_tracks_rk4_within_euler_bound() {
        let n = 1000;
        let rec = run_decay(n);
        let mut x = DVector::from_element(1, 1.0);
        let dt = 1.0 / n as f64;
        for i in 0..n {
            x = rk4_step(|_, x| -x, &x, i as f64 * dt, dt).unwrap();
        }
        // global Euler error for x' = -x on [0,1] is about dt·e⁻¹/2
        assert!((rec.states[1][0] - x[0]).abs() < dt);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let model = OrnsteinUhlenbeck::new(&[0.1], &[5.0]);
        let cfg = SimConfig {
            t0: 0.0,
            tf: 100.0,
            samples: 20,
            internal_steps: 10,
        };
        let run = |seed| {
            simulate(
                &model,
                &cfg,
                &InitialState::Fixed(DVector::from_element(1, 3.0)),
                &SignalProfile::constant(DVector::zeros(0)),
                &SignalProfile::constant(DVector::from_element(1, 1.0)),
                &NoiseSpec::from_std(&[0.5]).unwrap(),
                &mut RngStream::new(seed),
            )
            .unwrap()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SimConfig {
            t0: 1.0,
            tf: 1.0,
            samples: 1,
            internal_steps: 1,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn reports_time_of_blow_up() {
        let model = LinearModel::new(
            DMatrix::from_element(1, 1, 1e40),
            DMatrix::zeros(1, 0),
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        let cfg = SimConfig {
            t0: 0.0,
            tf: 10.0,
            samples: 10,
            internal_steps: 1,
        };
        let err = simulate(
            &model,
            &cfg,
            &InitialState::Fixed(DVector::from_element(1, 1.0)),
            &SignalProfile::constant(DVector::zeros(0)),
            &SignalProfile::constant(DVector::zeros(0)),
            &NoiseSpec::from_std(&[1.0]).unwrap(),
            &mut RngStream::new(1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { t } if t > 0.0));
    }
}
