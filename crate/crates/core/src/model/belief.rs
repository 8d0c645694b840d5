use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::linalg::{ensure_psd, relative_asymmetry};

/// Mean and covariance of a Gaussian state estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianBelief {
    /// Validating constructor: `cov` must be square, match `mean`, be
    /// symmetric within 1e-9 (relative) and PSD within `-1e-9 · trace`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::DimensionMismatch {
                context: "belief covariance",
                expected: mean.len(),
                actual: cov.nrows().max(cov.ncols()),
            });
        }
        if !mean.iter().chain(cov.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { t: f64::NAN });
        }
        let asym = relative_asymmetry(&cov);
        if asym > 1e-9 {
            return Err(Error::NotSymmetric(asym));
        }
        ensure_psd(&cov, 1e-9, "belief covariance")?;
        Ok(Self { mean, cov })
    }

    /// Constructor for values the caller has already checked.
    pub(crate) fn new_unchecked(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Diagonal of the covariance.
    pub fn variances(&self) -> DVector<f64> {
        self.cov.diagonal()
    }

    pub fn into_parts(self) -> (DVector<f64>, DMatrix<f64>) {
        (self.mean, self.cov)
    }
}
