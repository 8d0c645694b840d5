//! Sample-based machinery shared by the ensemble Kalman filter and the
//! particle filter.
//!
//! Statistics are accumulated in a canonical member order (lexicographic on
//! the state vectors) so that permuting the members leaves the mean,
//! covariance, and derived gains bit-identical.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use super::{check_steps, internal_grid};
use crate::error::{Error, Result};
use crate::model::{GaussianBelief, Model, SignalProfile};
use crate::numerics::{euler_maruyama_step, psd_sqrt, RngStream};

/// `n` draws `x̄ + L ξ`, `ξ ~ N(0, I)`, with `L` the lower square root of
/// the covariance. A semidefinite covariance is allowed.
pub fn sample_members(belief: &GaussianBelief, n: usize, rng: &mut RngStream) -> Result<Vec<DVector<f64>>> {
    let l = psd_sqrt(belief.cov(), 1e-12)?;
    let dim = belief.dim();
    Ok((0..n)
        .map(|_| {
            let xi = DVector::from_fn(dim, |_, _| rng.standard_normal());
            belief.mean() + &l * xi
        })
        .collect())
}

/// Advances every member over `[t0, t1]` by Euler–Maruyama with independent
/// Wiener increments. Members are processed in order, each consuming its
/// `internal_steps · nω` normal draws consecutively.
#[allow(clippy::too_many_arguments)]
pub fn propagate_members<M: Model + ?Sized>(
    model: &M,
    members: &mut [DVector<f64>],
    t0: f64,
    t1: f64,
    u: &SignalProfile,
    d: &SignalProfile,
    internal_steps: usize,
    rng: &mut RngStream,
) -> Result<()> {
    check_steps(internal_steps)?;
    let nw = model.dims().nw;
    let (grid, dt) = internal_grid(t0, t1, internal_steps);
    let grid: Vec<f64> = grid.collect();
    let mut signals = Vec::with_capacity(grid.len());
    for &t in &grid {
        signals.push((u.eval(t)?, d.eval(t)?));
    }
    let sqrt_dt = dt.sqrt();
    let mut dw = DVector::zeros(nw);
    for (member, x) in members.iter_mut().enumerate() {
        for (&t, &(uu, dd)) in grid.iter().zip(&signals) {
            for v in dw.iter_mut() {
                *v = sqrt_dt * rng.standard_normal();
            }
            *x = euler_maruyama_step(
                |t, x| model.drift(t, x, uu, dd),
                |t, x| model.diffusion(t, x, uu, dd),
                x,
                t,
                dt,
                &dw,
            )
            .map_err(|_| Error::NonFiniteMember { member, t: t + dt })?;
        }
    }
    Ok(())
}

fn lexicographic(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Member indices sorted lexicographically by state.
pub fn canonical_order(members: &[DVector<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&i, &j| lexicographic(&members[i], &members[j]));
    order
}

/// `(1/N) Σ xᵢ`, summed in `order`.
pub fn sample_mean(members: &[DVector<f64>], order: &[usize]) -> DVector<f64> {
    let mut sum = DVector::zeros(members[0].len());
    for &i in order {
        sum += &members[i];
    }
    sum / members.len() as f64
}

/// Deviations `xᵢ − x̄` as columns, in `order`.
pub fn deviations(members: &[DVector<f64>], mean: &DVector<f64>, order: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(mean.len(), order.len());
    for (col, &i) in order.iter().enumerate() {
        for (r, (x, m)) in members[i].iter().zip(mean.iter()).enumerate() {
            out[(r, col)] = x - m;
        }
    }
    out
}

/// `1/(N−1) Σ (aᵢ − ā)(bᵢ − b̄)ᵀ`, summed in `order`.
pub fn sample_cross_covariance(
    a: &[DVector<f64>],
    a_mean: &DVector<f64>,
    b: &[DVector<f64>],
    b_mean: &DVector<f64>,
    order: &[usize],
) -> DMatrix<f64> {
    let da = deviations(a, a_mean, order);
    let db = deviations(b, b_mean, order);
    da * db.transpose() / (a.len() as f64 - 1.0)
}

/// Ensemble mean (`1/N`) and covariance (`1/(N−1)`) in member order.
pub fn sample_belief(members: &[DVector<f64>]) -> GaussianBelief {
    sample_belief_in(members, &natural_order(members.len()))
}

/// [`sample_belief`] summed in `order`; with [`canonical_order`] the result
/// does not depend on the member order at all.
pub fn sample_belief_in(members: &[DVector<f64>], order: &[usize]) -> GaussianBelief {
    let mean = sample_mean(members, order);
    let mut cov = sample_cross_covariance(members, &mean, members, &mean, order);
    crate::numerics::linalg::symmetrize_mut(&mut cov);
    GaussianBelief::new_unchecked(mean, cov)
}

pub fn natural_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub(crate) fn check_members(members: &[DVector<f64>], context: &'static str) -> Result<()> {
    if members.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "{context} needs at least 2 members, got {}",
            members.len()
        )));
    }
    let dim = members[0].len();
    for (i, m) in members.iter().enumerate() {
        if m.len() != dim {
            return Err(Error::DimensionMismatch {
                context,
                expected: dim,
                actual: m.len(),
            });
        }
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteMember { member: i, t: f64::NAN });
        }
    }
    Ok(())
}
