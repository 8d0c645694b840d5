use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::{cholesky, psd_sqrt, RngStream};

/// Measurement-noise covariance `R` together with a square-root factor.
///
/// Filters require `R` positive definite (the particle filter's likelihood
/// needs `R⁻¹`); the simulator also accepts a semidefinite `R`, including
/// `R = 0` for noiseless measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    r: DMatrix<f64>,
    factor: DMatrix<f64>,
    definite: bool,
}

impl NoiseSpec {
    /// `r` must be symmetric positive semidefinite.
    pub fn new(r: DMatrix<f64>) -> Result<Self> {
        let (factor, definite) = match cholesky(&r) {
            Ok(l) => (l, true),
            Err(Error::NotPositiveDefinite(_)) => (psd_sqrt(&r, 1e-12)?, false),
            Err(e) => return Err(e),
        };
        Ok(Self {
            r,
            factor,
            definite,
        })
    }

    /// `R = diag(stds²)`.
    pub fn from_std(stds: &[f64]) -> Result<Self> {
        let diag = DVector::from_iterator(stds.len(), stds.iter().map(|s| s * s));
        Self::new(DMatrix::from_diagonal(&diag))
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Lower-triangular square root of `R`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn is_definite(&self) -> bool {
        self.definite
    }

    /// Errors unless `R` is positive definite.
    pub fn require_definite(&self) -> Result<()> {
        if self.definite {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite(
                "measurement noise covariance is singular".into(),
            ))
        }
    }

    /// One draw `v ~ N(0, R)`.
    pub fn sample(&self, rng: &mut RngStream) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.standard_normal());
        &self.factor * z
    }

    /// `n` draws as the columns of a matrix, consuming the stream in the
    /// same order as `n` calls to [`NoiseSpec::sample`].
    pub fn sample_columns(&self, rng: &mut RngStream, n: usize) -> DMatrix<f64> {
        let mut z = DMatrix::zeros(self.dim(), n);
        rng.fill_standard_normal(z.as_mut_slice());
        &self.factor * z
    }

    /// `eᵀ R⁻¹ e`.
    pub fn mahalanobis_sq(&self, e: &DVector<f64>) -> Result<f64> {
        self.require_definite()?;
        let w = self
            .factor
            .solve_lower_triangular(e)
            .expect("cholesky factor has positive diagonal");
        Ok(w.norm_squared())
    }

    /// `eᵢᵀ R⁻¹ eᵢ` for every column `eᵢ` of `e`.
    pub fn mahalanobis_sq_columns(&self, e: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.require_definite()?;
        let w = self
            .factor
            .solve_lower_triangular(e)
            .expect("cholesky factor has positive diagonal");
        Ok(w.column_iter().map(|c| c.norm_squared()).collect())
    }
}
