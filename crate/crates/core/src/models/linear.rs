use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Dims, GaussianBelief, Model};

/// `dx = (F x + B u) dt + G dω`, `y = C x + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    f: DMatrix<f64>,
    b: DMatrix<f64>,
    g: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl LinearModel {
    pub fn new(f: DMatrix<f64>, b: DMatrix<f64>, g: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let nx = f.nrows();
        let check = |context, expected, actual| {
            if expected == actual {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    context,
                    expected,
                    actual,
                })
            }
        };
        check("F columns", nx, f.ncols())?;
        check("B rows", nx, b.nrows())?;
        check("G rows", nx, g.nrows())?;
        check("C columns", nx, c.ncols())?;
        Ok(Self { f, b, g, c })
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Exact transition over `ts` with the input held constant: `x⁺ = A x + B u + w`,
    /// `w ~ N(0, Q)`. `A` and `Q` come from Van Loan's block exponential.
    pub fn discretize(&self, ts: f64) -> Discretized {
        let n = self.f.nrows();
        let nu = self.b.ncols();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&(-&self.f));
        m.view_mut((0, n), (n, n)).copy_from(&(&self.g * self.g.transpose()));
        m.view_mut((n, n), (n, n)).copy_from(&self.f.transpose());
        let e = (m * ts).exp();
        let a = e.view((n, n), (n, n)).transpose();
        let mut q = &a * e.view((0, n), (n, n));
        crate::numerics::linalg::symmetrize_mut(&mut q);

        let mut mb = DMatrix::zeros(n + nu, n + nu);
        mb.view_mut((0, 0), (n, n)).copy_from(&self.f);
        mb.view_mut((0, n), (n, nu)).copy_from(&self.b);
        let b = (mb * ts).exp().view((0, n), (n, nu)).into_owned();
        Discretized { a, b, q }
    }

    /// Same dynamics with the diffusion removed.
    pub fn without_diffusion(&self) -> Self {
        Self {
            g: DMatrix::zeros(self.g.nrows(), self.g.ncols()),
            ..self.clone()
        }
    }
}

/// Discrete-time equivalent of a [`LinearModel`] over one sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl Discretized {
    /// Exact prediction of a Gaussian belief.
    pub fn predict(&self, belief: &GaussianBelief, u: &DVector<f64>) -> GaussianBelief {
        let mean = &self.a * belief.mean() + &self.b * u;
        let mut cov = &self.a * belief.cov() * self.a.transpose() + &self.q;
        crate::numerics::linalg::symmetrize_mut(&mut cov);
        GaussianBelief::new_unchecked(mean, cov)
    }
}

impl Model for LinearModel {
    fn dims(&self) -> Dims {
        Dims {
            nx: self.f.nrows(),
            nu: self.b.ncols(),
            nd: 0,
            nw: self.g.ncols(),
            ny: self.c.nrows(),
        }
    }

    fn drift(&self, _t: f64, x: &DVector<f64>, u: &DVector<f64>, _d: &DVector<f64>) -> DVector<f64> {
        &self.f * x + &self.b * u
    }

    fn diffusion(&self, _t: f64, _x: &DVector<f64>, _u: &DVector<f64>, _d: &DVector<f64>) -> DMatrix<f64> {
        self.g.clone()
    }

    fn measurement(&self, _t: f64, x: &DVector<f64>) -> DVector<f64> {
        &self.c * x
    }

    fn drift_jacobian(&self, _t: f64, _x: &DVector<f64>, _u: &DVector<f64>, _d: &DVector<f64>) -> DMatrix<f64> {
        self.f.clone()
    }

    fn measurement_jacobian(&self, _t: f64, _x: &DVector<f64>) -> DMatrix<f64> {
        self.c.clone()
    }
}
