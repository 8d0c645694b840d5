//! Bootstrap particle filter with Gaussian likelihood weights and systematic
//! resampling after every measurement.

use nalgebra::{DMatrix, DVector};

use super::ensemble::{check_members, propagate_members, sample_belief, sample_members};
use super::{check_dim, check_steps, Filter, FilterKind};
use crate::error::{Error, Result};
use crate::model::{GaussianBelief, Model, NoiseSpec, SignalProfile};
use crate::numerics::RngStream;

/// Tolerance on `|Σw − 1|` accepted by [`systematic_resample`].
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Particles with normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<DVector<f64>>,
    weights: Vec<f64>,
}

impl ParticleSet {
    /// Uniformly weighted set.
    pub fn uniform(particles: Vec<DVector<f64>>) -> Result<Self> {
        check_members(&particles, "particle set")?;
        let w = 1.0 / particles.len() as f64;
        let weights = vec![w; particles.len()];
        Ok(Self { particles, weights })
    }

    pub fn particles(&self) -> &[DVector<f64>] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

/// Propagates every particle through the stochastic dynamics.
#[allow(clippy::too_many_arguments)]
pub fn pf_time_update<M: Model + ?Sized>(
    set: &mut ParticleSet,
    model: &M,
    t0: f64,
    t1: f64,
    u: &SignalProfile,
    d: &SignalProfile,
    internal_steps: usize,
    rng: &mut RngStream,
) -> Result<()> {
    propagate_members(model, &mut set.particles, t0, t1, u, d, internal_steps, rng)
}

/// Normalized likelihood weights `w ∝ exp(−½ eᵀR⁻¹e)`, `e = y − h(x)`.
///
/// Evaluated in log space with the maximum subtracted before
/// exponentiation; the Gaussian normalizing constant cancels.
pub fn pf_likelihood_weights<M: Model + ?Sized>(
    particles: &[DVector<f64>],
    model: &M,
    t: f64,
    y: &DVector<f64>,
    noise: &NoiseSpec,
) -> Result<Vec<f64>> {
    check_dim("measurement", model.dims().ny, y.len())?;
    check_dim("measurement noise", model.dims().ny, noise.dim())?;
    let mut residuals = DMatrix::zeros(y.len(), particles.len());
    for (i, x) in particles.iter().enumerate() {
        residuals.set_column(i, &(y - model.measurement(t, x)));
    }
    let log_w: Vec<f64> = noise
        .mahalanobis_sq_columns(&residuals)?
        .into_iter()
        .map(|m| -0.5 * m)
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::AllWeightsZero);
    }
    let mut weights: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::AllWeightsZero);
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// `1 / Σ wᵢ²`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// Copy counts `mᵢ` of systematic resampling with offset `q1 ∈ [0, 1)`:
/// point `q⁽ˡ⁾ = (l + q1)/N` selects the particle whose cumulative-weight
/// interval `(s⁽ⁱ⁻¹⁾, s⁽ⁱ⁾]` contains it.
pub fn systematic_counts(weights: &[f64], q1: f64) -> Result<Vec<usize>> {
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::WeightSumMismatch(total));
    }
    if !(0.0..1.0).contains(&q1) {
        return Err(Error::InvalidConfig(format!("resampling offset {q1} not in [0, 1)")));
    }
    let mut counts = vec![0usize; n];
    let mut i = 0;
    let mut lower = 0.0;
    let mut upper = weights[0];
    for l in 0..n {
        let q = (l as f64 + q1) / n as f64;
        // advance to the interval (lower, upper] containing q; empty
        // intervals never contain a point, and rounding in the running sum
        // is absorbed by the last particle
        while i + 1 < n && (q > upper || upper <= lower) {
            i += 1;
            lower = upper;
            upper += weights[i];
        }
        counts[i] += 1;
    }
    Ok(counts)
}

/// Systematic resampling: an equally weighted set of `N` copies of the
/// input particles.
pub fn systematic_resample(set: &ParticleSet, weights: &[f64], q1: f64) -> Result<ParticleSet> {
    check_dim("weights", set.len(), weights.len())?;
    let counts = systematic_counts(weights, q1)?;
    let mut particles = Vec::with_capacity(set.len());
    for (x, &m) in set.particles.iter().zip(&counts) {
        particles.extend(std::iter::repeat_n(x, m).cloned());
    }
    ParticleSet::uniform(particles)
}

/// Mean (`1/N`) and covariance (`1/(N−1)`) of an equally weighted set.
pub fn pf_estimate(set: &ParticleSet) -> GaussianBelief {
    sample_belief(&set.particles)
}

/// Particle filter over an owned model and a dedicated random stream.
pub struct ParticleFilter<M> {
    model: M,
    noise: NoiseSpec,
    internal_steps: usize,
    set: ParticleSet,
    rng: RngStream,
    last_ess: Option<f64>,
}

impl<M: Model> ParticleFilter<M> {
    pub fn new(
        model: M,
        noise: NoiseSpec,
        initial: &GaussianBelief,
        particles: usize,
        internal_steps: usize,
        mut rng: RngStream,
    ) -> Result<Self> {
        check_steps(internal_steps)?;
        check_dim("pf initial mean", model.dims().nx, initial.dim())?;
        noise.require_definite()?;
        let set = ParticleSet::uniform(sample_members(initial, particles, &mut rng)?)?;
        Ok(Self {
            model,
            noise,
            internal_steps,
            set,
            rng,
            last_ess: None,
        })
    }

    pub fn particle_set(&self) -> &ParticleSet {
        &self.set
    }
}

impl<M: Model> Filter for ParticleFilter<M> {
    fn kind(&self) -> FilterKind {
        FilterKind::Pf
    }

    fn time_update(&mut self, t0: f64, t1: f64, u: &SignalProfile, d: &SignalProfile) -> Result<()> {
        pf_time_update(
            &mut self.set,
            &self.model,
            t0,
            t1,
            u,
            d,
            self.internal_steps,
            &mut self.rng,
        )
    }

    fn measurement_update(&mut self, t: f64, y: &DVector<f64>) -> Result<()> {
        let weights = pf_likelihood_weights(&self.set.particles, &self.model, t, y, &self.noise)?;
        self.last_ess = Some(effective_sample_size(&weights));
        // an offset of exactly 0 would put the first point on no interval
        let q1 = self.rng.open_uniform();
        self.set = systematic_resample(&self.set, &weights, q1)?;
        Ok(())
    }

    fn belief(&self) -> GaussianBelief {
        pf_estimate(&self.set)
    }

    fn effective_sample_size(&self) -> Option<f64> {
        self.last_ess
    }

    fn members(&self) -> Option<&[DVector<f64>]> {
        Some(self.set.particles())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::testutil::*;
    use proptest::prelude::*;

    fn xs(values: &[f64]) -> Vec<DVector<f64>> {
        values.iter().map(|v| DVector::from_element(1, *v)).collect()
    }

    fn weights_for(values: &[f64], y: f64, r: f64) -> Vec<f64> {
        let noise = NoiseSpec::from_std(&[r.sqrt()]).unwrap();
        pf_likelihood_weights(&xs(values), &scalar(0.0, 0.0, 1.0), 0.0, &DVector::from_element(1, y), &noise).unwrap()
    }

    #[test]
    fn symmetric_weights() {
        let w = weights_for(&[-1.0, 1.0], 0.0, 1.0);
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weights_by_hand() {
        let w = weights_for(&[0.0, 1.0], 0.0, 1.0);
        let expected = 1.0 / (1.0 + (-0.5f64).exp());
        assert!((w[0] - expected).abs() < 1e-15);
        assert!((w[0] - 0.6225).abs() < 1e-4);
        assert!((w[1] - 0.3775).abs() < 1e-4);
    }

    #[test]
    fn distant_particles_underflow_without_failing() {
        let w = weights_for(&[0.0, 100.0, 200.0], 0.0, 1.0);
        assert_eq!(w, vec![1.0, 0.0, 0.0]);
        let w = weights_for(&[1e3, 1e3 + 1.0], 0.0, 1.0);
        assert!((w[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ess_bounds() {
        assert!((effective_sample_size(&[0.25; 4]) - 4.0).abs() < 1e-12);
        assert_eq!(effective_sample_size(&[1.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn degenerate_weights_copy_one_particle() {
        let counts = systematic_counts(&[1.0, 0.0, 0.0, 0.0], 0.9).unwrap();
        assert_eq!(counts, vec![4, 0, 0, 0]);
    }

    #[test]
    fn uniform_weights_keep_every_particle() {
        assert_eq!(systematic_counts(&[0.25; 4], 0.5).unwrap(), vec![1, 1, 1, 1]);
        let set = ParticleSet::uniform(xs(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        let out = systematic_resample(&set, &[0.25; 4], 0.5).unwrap();
        assert_eq!(out.particles(), set.particles());
        assert_eq!(out.weights(), &[0.25; 4]);
    }

    #[test]
    fn resampling_is_unbiased() {
        let mut rng = RngStream::new(7);
        let trials = 10_000;
        let mut copies = 0usize;
        for _ in 0..trials {
            copies += systematic_counts(&[0.7, 0.3], rng.uniform()).unwrap()[0];
        }
        let mean = copies as f64 / trials as f64;
        assert!((mean - 1.4).abs() < 0.02, "{mean}");
    }

    #[test]
    fn rejects_unnormalized_weights() {
        assert!(matches!(systematic_counts(&[0.5, 0.6], 0.1), Err(Error::WeightSumMismatch(_))));
        assert!(systematic_counts(&[0.5, 0.5], 1.0).is_err());
    }

    fn normalized(raw: Vec<f64>) -> Vec<f64> {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    proptest! {
        #[test]
        fn counts_sum_to_n_and_stay_within_one(
            raw in prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], 2..40)
                .prop_filter("positive total", |v| v.iter().sum::<f64>() > 1e-3),
            q1 in 0.0..1.0f64,
        ) {
            let w = normalized(raw);
            let n = w.len();
            let counts = systematic_counts(&w, q1).unwrap();
            prop_assert_eq!(counts.iter().sum::<usize>(), n);
            for (m, wi) in counts.iter().zip(&w) {
                prop_assert!((*m as f64 - n as f64 * wi).abs() < 1.0 + 1e-9);
                if *wi == 0.0 {
                    prop_assert_eq!(*m, 0);
                }
            }
        }
    }

    #[test]
    fn estimate_of_two_points() {
        let b = pf_estimate(&ParticleSet::uniform(xs(&[-1.0, 1.0])).unwrap());
        assert_eq!(b.mean()[0], 0.0);
        assert_eq!(b.cov()[(0, 0)], 2.0);
    }

    #[test]
    fn standard_normal_cloud() {
        let mut rng = RngStream::new(3);
        let set = ParticleSet::uniform(sample_members(&belief1(0.0, 1.0), 100_000, &mut rng).unwrap()).unwrap();
        let b = pf_estimate(&set);
        assert!(b.mean()[0].abs() < 0.01);
        assert!((b.cov()[(0, 0)] - 1.0).abs() < 0.02);
    }

    #[test]
    fn posterior_matches_kalman() {
        // prior N(0, 1), y = 1 with R = 1: posterior N(0.5, 0.5)
        let model = scalar(0.0, 0.0, 1.0);
        let noise = NoiseSpec::from_std(&[1.0]).unwrap();
        let mut f = ParticleFilter::new(model, noise, &belief1(0.0, 1.0), 100_000, 1, RngStream::new(13)).unwrap();
        f.measurement_update(0.0, &DVector::from_element(1, 1.0)).unwrap();
        let b = f.belief();
        assert!((b.mean()[0] - 0.5).abs() < 0.01);
        assert!((b.cov()[(0, 0)] - 0.5).abs() < 0.015);
        let ess = f.effective_sample_size().unwrap();
        assert!(ess > 50_000.0 && ess < 100_000.0);
    }

    #[test]
    fn requires_definite_noise() {
        let noise = NoiseSpec::new(DMatrix::zeros(1, 1)).unwrap();
        let f = ParticleFilter::new(scalar(0.0, 0.0, 1.0), noise, &belief1(0.0, 1.0), 10, 1, RngStream::new(1));
        assert!(f.is_err());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let run = |seed| {
            let noise = NoiseSpec::from_std(&[0.3]).unwrap();
            let mut f = ParticleFilter::new(scalar(-0.5, 0.4, 1.0), noise, &belief1(1.0, 0.5), 64, 5, RngStream::new(seed)).unwrap();
            for k in 0..4 {
                let t = k as f64 * 0.1;
                f.time_update(t, t + 0.1, &none(), &none()).unwrap();
                f.measurement_update(t + 0.1, &DVector::from_element(1, 0.6)).unwrap();
            }
            f.particle_set().clone()
        };
        assert_eq!(run(2), run(2));
        assert_ne!(run(2), run(3));
    }
}
