use nalgebra::DVector;

use crate::error::{Error, Result};

/// Piecewise-constant (zero-order hold) time signal.
///
/// Interval `i` covers `[breakpoints[i], breakpoints[i+1])`; the last
/// interval extends to infinity. Evaluating exactly at a breakpoint returns
/// the new interval's value.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalProfile {
    breakpoints: Vec<f64>,
    values: Vec<DVector<f64>>,
}

impl SignalProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<DVector<f64>>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidProfile("no breakpoints".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidProfile(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| b.is_nan()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidProfile(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidProfile("values differ in length".into()));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// A signal equal to `value` at every time.
    pub fn constant(value: DVector<f64>) -> Self {
        Self {
            breakpoints: vec![f64::NEG_INFINITY],
            values: vec![value],
        }
    }

    /// Equal-length segments over `[t0, t1)` with the given values.
    pub fn equal_segments(t0: f64, t1: f64, values: Vec<DVector<f64>>) -> Result<Self> {
        let n = values.len();
        if n == 0 || t1 <= t0 {
            return Err(Error::InvalidProfile("empty segment schedule".into()));
        }
        let breakpoints = (0..n)
            .map(|i| t0 + (t1 - t0) * i as f64 / n as f64)
            .collect();
        Self::new(breakpoints, values)
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> Result<&DVector<f64>> {
        let idx = self.breakpoints.partition_point(|b| *b <= t);
        if idx == 0 {
            return Err(Error::OutOfRange {
                t,
                start: self.breakpoints[0],
            });
        }
        Ok(&self.values[idx - 1])
    }
}
