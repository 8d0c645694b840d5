//! The modified four-tank system.
//!
//! Four gravity-drained tanks fed by two pumps through two three-way valves.
//! Tanks 3 and 4 drain into tanks 1 and 2; tanks 1 and 2 drain out of the
//! system. Two unmeasured inflows `F₃`, `F₄` into the upper tanks are
//! augmented states following mean-reverting SDEs
//! `dFᵢ = λ(F̄ᵢ − Fᵢ) dt + σ̃ dω`.
//!
//! State `x = (m₁, m₂, m₃, m₄, F₃, F₄)` in g and cm³/s, input
//! `u = (F₁, F₂)` pump flows, disturbance input `d = (F̄₃, F̄₄)`.
//!
//! The physical defaults follow the quadruple-tank literature; they are
//! configuration, not measured plant data.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dims, EvalPoint, Model};
use crate::numerics::RngStream;

pub const NX: usize = 6;
pub const NW: usize = 2;
/// Indices of the liquid-mass states.
pub const MASS_STATES: [usize; 4] = [0, 1, 2, 3];
/// Indices of the disturbance-flow states.
pub const DISTURBANCE_STATES: [usize; 2] = [4, 5];
/// Masses at or below this (g) are treated as an empty tank.
pub const EMPTY_TANK_TOL: f64 = 1e-9;

/// Tank geometry and physical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MftsPlant {
    /// Tank cross-sections A₁..A₄, cm².
    pub area: [f64; 4],
    /// Outlet areas a₁..a₄, cm².
    pub outlet_area: [f64; 4],
    /// Valve splits γ₁, γ₂.
    pub gamma: [f64; 2],
    /// cm/s².
    pub gravity: f64,
    /// g/cm³.
    pub density: f64,
}

impl Default for MftsPlant {
    fn default() -> Self {
        Self {
            area: [380.1327; 4],
            outlet_area: [1.2272; 4],
            gamma: [0.58, 0.68],
            gravity: 981.0,
            density: 1.0,
        }
    }
}

impl MftsPlant {
    pub fn validate(&self) -> Result<()> {
        let positive = self
            .area
            .iter()
            .chain(&self.outlet_area)
            .chain([&self.gravity, &self.density])
            .all(|v| *v > 0.0 && v.is_finite());
        let splits = self.gamma.iter().all(|g| *g > 0.0 && *g < 1.0);
        if !positive || !splits {
            return Err(Error::InvalidConfig(format!(
                "plant geometry must be positive with valve splits in (0, 1): {self:?}"
            )));
        }
        Ok(())
    }
}

/// Plant plus disturbance-model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MftsParams {
    pub plant: MftsPlant,
    /// Mean-reversion rates λ₁, λ₂, 1/s.
    pub lambda: [f64; 2],
    /// Disturbance diffusions σ̃₁, σ̃₂.
    pub sigma: [f64; 2],
}

impl MftsParams {
    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        if self.lambda.iter().chain(&self.sigma).any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "disturbance rates and diffusions must be >= 0: {self:?}"
            )));
        }
        Ok(())
    }
}

pub const PARAMETER_NAMES: [&str; 16] = [
    "A1", "A2", "A3", "A4", "a1", "a2", "a3", "a4", "gamma1", "gamma2", "g", "rho", "lambda1",
    "lambda2", "sigma1", "sigma2",
];

/// The four-tank model with a configurable set of measured tank levels.
#[derive(Debug, Clone, PartialEq)]
pub struct MftsModel {
    params: MftsParams,
    measured: Vec<usize>,
}

impl MftsModel {
    /// Model measuring all four tank levels.
    pub fn new(params: MftsParams) -> Result<Self> {
        Self::with_measured_tanks(params, &[0, 1, 2, 3])
    }

    /// Model measuring the levels of the given tanks (0-based).
    pub fn with_measured_tanks(params: MftsParams, tanks: &[usize]) -> Result<Self> {
        params.validate()?;
        if tanks.is_empty() || tanks.iter().any(|t| *t > 3) || tanks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "measured tanks must be distinct, ascending, within 0..=3: {tanks:?}"
            )));
        }
        Ok(Self {
            params,
            measured: tanks.to_vec(),
        })
    }

    pub fn params(&self) -> &MftsParams {
        &self.params
    }

    pub fn measured_tanks(&self) -> &[usize] {
        &self.measured
    }

    /// Liquid level `hᵢ = mᵢ / (ρ Aᵢ)` in cm.
    pub fn height(&self, tank: usize, mass: f64) -> f64 {
        mass / (self.params.plant.density * self.params.plant.area[tank])
    }

    fn outflow(&self, tank: usize, mass: f64) -> f64 {
        let p = &self.params.plant;
        p.outlet_area[tank] * (2.0 * p.gravity * self.height(tank, mass).max(0.0)).sqrt()
    }

    /// `∂qᵢ/∂mᵢ`; zero at and below the empty-tank tolerance.
    fn outflow_slope(&self, tank: usize, mass: f64) -> f64 {
        if mass <= EMPTY_TANK_TOL {
            return 0.0;
        }
        let p = &self.params.plant;
        let h = self.height(tank, mass);
        p.outlet_area[tank] * (2.0 * p.gravity).sqrt() / (2.0 * h.sqrt()) / (p.density * p.area[tank])
    }

    fn inflows(&self, u: &DVector<f64>) -> [f64; 4] {
        let [g1, g2] = self.params.plant.gamma;
        [g1 * u[0], g2 * u[1], (1.0 - g2) * u[1], (1.0 - g1) * u[0]]
    }

    /// Analytic drift Jacobian, refusing states with an empty tank where the
    /// outflow derivative is singular.
    pub fn try_drift_jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if let Some(tank) = (0..4).find(|&i| x[i] <= EMPTY_TANK_TOL) {
            return Err(Error::SingularAtEmptyTank { tank, mass: x[tank] });
        }
        Ok(self.jacobian(x))
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let rho = self.params.plant.density;
        let s: [f64; 4] = std::array::from_fn(|i| self.outflow_slope(i, x[i]));
        let mut a = DMatrix::zeros(NX, NX);
        a[(0, 0)] = -rho * s[0];
        a[(0, 2)] = rho * s[2];
        a[(1, 1)] = -rho * s[1];
        a[(1, 3)] = rho * s[3];
        a[(2, 2)] = -rho * s[2];
        a[(2, 4)] = rho;
        a[(3, 3)] = -rho * s[3];
        a[(3, 5)] = rho;
        a[(4, 4)] = -self.params.lambda[0];
        a[(5, 5)] = -self.params.lambda[1];
        a
    }

    /// Equilibrium with pump flows `u` and disturbance flows held at `d`.
    pub fn steady_state(&self, u: &DVector<f64>, d: &DVector<f64>) -> Result<DVector<f64>> {
        let p = &self.params.plant;
        let qin = self.inflows(u);
        let q3 = qin[2] + d[0];
        let q4 = qin[3] + d[1];
        let q = [qin[0] + q3, qin[1] + q4, q3, q4];
        if q.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidConfig("negative steady-state outflow".into()));
        }
        let mut x = DVector::zeros(NX);
        for i in 0..4 {
            let h = (q[i] / p.outlet_area[i]).powi(2) / (2.0 * p.gravity);
            x[i] = p.density * p.area[i] * h;
        }
        x[4] = d[0];
        x[5] = d[1];
        Ok(x)
    }
}

impl Model for MftsModel {
    fn dims(&self) -> Dims {
        Dims {
            nx: NX,
            nu: 2,
            nd: 2,
            nw: NW,
            ny: self.measured.len(),
        }
    }

    fn drift(&self, _t: f64, x: &DVector<f64>, u: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
        let rho = self.params.plant.density;
        let qin = self.inflows(u);
        let q: [f64; 4] = std::array::from_fn(|i| self.outflow(i, x[i]));
        let [l1, l2] = self.params.lambda;
        DVector::from_column_slice(&[
            rho * (qin[0] + q[2] - q[0]),
            rho * (qin[1] + q[3] - q[1]),
            rho * (qin[2] + x[4] - q[2]),
            rho * (qin[3] + x[5] - q[3]),
            l1 * (d[0] - x[4]),
            l2 * (d[1] - x[5]),
        ])
    }

    fn diffusion(&self, _t: f64, _x: &DVector<f64>, _u: &DVector<f64>, _d: &DVector<f64>) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(NX, NW);
        s[(4, 0)] = self.params.sigma[0];
        s[(5, 1)] = self.params.sigma[1];
        s
    }

    fn measurement(&self, _t: f64, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.measured.len(),
            self.measured.iter().map(|&i| self.height(i, x[i])),
        )
    }

    fn drift_jacobian(&self, _t: f64, x: &DVector<f64>, _u: &DVector<f64>, _d: &DVector<f64>) -> DMatrix<f64> {
        self.jacobian(x)
    }

    fn measurement_jacobian(&self, _t: f64, _x: &DVector<f64>) -> DMatrix<f64> {
        let p = &self.params.plant;
        let mut c = DMatrix::zeros(self.measured.len(), NX);
        for (row, &i) in self.measured.iter().enumerate() {
            c[(row, i)] = 1.0 / (p.density * p.area[i]);
        }
        c
    }

    fn project_state(&self, x: &mut DVector<f64>) {
        for i in MASS_STATES {
            x[i] = x[i].max(0.0);
        }
    }

    fn parameters(&self) -> DVector<f64> {
        let p = &self.params;
        let mut theta = Vec::with_capacity(16);
        theta.extend_from_slice(&p.plant.area);
        theta.extend_from_slice(&p.plant.outlet_area);
        theta.extend_from_slice(&p.plant.gamma);
        theta.push(p.plant.gravity);
        theta.push(p.plant.density);
        theta.extend_from_slice(&p.lambda);
        theta.extend_from_slice(&p.sigma);
        DVector::from_vec(theta)
    }

    fn parameter_names(&self) -> Vec<&'static str> {
        PARAMETER_NAMES.to_vec()
    }

    /// Levels between 5 and 100 cm, flows between 50 and 350 cm³/s.
    fn sample_point(&self, rng: &mut RngStream) -> EvalPoint {
        let p = &self.params.plant;
        let mut x = DVector::zeros(NX);
        for i in 0..4 {
            x[i] = p.density * p.area[i] * (5.0 + 95.0 * rng.uniform());
        }
        x[4] = 50.0 + 300.0 * rng.uniform();
        x[5] = 50.0 + 300.0 * rng.uniform();
        let u = DVector::from_fn(2, |_, _| 200.0 + 200.0 * rng.uniform());
        let d = DVector::from_fn(2, |_, _| 100.0 + 200.0 * rng.uniform());
        EvalPoint {
            t: 0.0,
            x,
            u,
            d,
        }
    }
}
