use nalgebra::{DMatrix, DVector};

use crate::model::{Dims, Model};

/// Independent Ornstein–Uhlenbeck processes `dF = λ(F̄ − F) dt + σ dω`.
///
/// The mean levels `F̄` enter through the disturbance input `d`, and every
/// state is measured directly.
#[derive(Debug, Clone, PartialEq)]
pub struct OrnsteinUhlenbeck {
    lambda: DVector<f64>,
    sigma: DVector<f64>,
}

impl OrnsteinUhlenbeck {
    pub fn new(lambda: &[f64], sigma: &[f64]) -> Self {
        assert_eq!(lambda.len(), sigma.len(), "one rate per diffusion");
        Self {
            lambda: DVector::from_column_slice(lambda),
            sigma: DVector::from_column_slice(sigma),
        }
    }

    /// Stationary variance `σ² / (2λ)` of each component.
    pub fn stationary_variance(&self) -> DVector<f64> {
        self.sigma.zip_map(&self.lambda, |s, l| s * s / (2.0 * l))
    }
}

impl Model for OrnsteinUhlenbeck {
    fn dims(&self) -> Dims {
        let n = self.lambda.len();
        Dims {
            nx: n,
            nu: 0,
            nd: n,
            nw: n,
            ny: n,
        }
    }

    fn drift(&self, _t: f64, x: &DVector<f64>, _u: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
        self.lambda.component_mul(&(d - x))
    }

    fn diffusion(&self, _t: f64, _x: &DVector<f64>, _u: &DVector<f64>, _d: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.sigma)
    }

    fn measurement(&self, _t: f64, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }

    fn drift_jacobian(&self, _t: f64, _x: &DVector<f64>, _u: &DVector<f64>, _d: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&(-&self.lambda))
    }

    fn measurement_jacobian(&self, _t: f64, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(x.len(), x.len())
    }
}
