//! Continuous-discrete ensemble Kalman filter with perturbed observations.

use nalgebra::{DMatrix, DVector};

use super::ensemble::{
    check_members, deviations, natural_order, propagate_members, sample_belief,
    sample_members, sample_mean,
};
use super::{check_dim, check_steps, Filter, FilterKind};
use crate::error::Result;
use crate::model::{GaussianBelief, Model, NoiseSpec, SignalProfile};
use crate::numerics::linalg::{right_solve_spd, symmetrize_mut};
use crate::numerics::RngStream;

/// An ensemble of at least two state vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<DVector<f64>>,
}

impl Ensemble {
    pub fn new(members: Vec<DVector<f64>>) -> Result<Self> {
        check_members(&members, "ensemble")?;
        Ok(Self { members })
    }

    pub fn members(&self) -> &[DVector<f64>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Mean (`1/N`) and covariance (`1/(N−1)`) of the members.
    pub fn belief(&self) -> GaussianBelief {
        sample_belief(&self.members)
    }
}

/// Draws `n` members from the initial belief.
pub fn enkf_init(belief: &GaussianBelief, n: usize, rng: &mut RngStream) -> Result<Ensemble> {
    Ensemble::new(sample_members(belief, n, rng)?)
}

/// Propagates every member through the stochastic dynamics.
#[allow(clippy::too_many_arguments)]
pub fn enkf_time_update<M: Model + ?Sized>(
    ensemble: &mut Ensemble,
    model: &M,
    t0: f64,
    t1: f64,
    u: &SignalProfile,
    d: &SignalProfile,
    internal_steps: usize,
    rng: &mut RngStream,
) -> Result<()> {
    propagate_members(model, &mut ensemble.members, t0, t1, u, d, internal_steps, rng)
}

/// Ensemble statistics used by one measurement update.
#[derive(Debug, Clone, PartialEq)]
pub struct EnkfUpdate {
    pub predicted_measurement: DVector<f64>,
    pub innovation_cov: DMatrix<f64>,
    pub cross_cov: DMatrix<f64>,
    pub gain: DMatrix<f64>,
}

/// Gain and statistics of the perturbed-observation update for members `x`
/// with predicted measurements `z`, summed in `order`.
pub fn ensemble_gain(
    x: &[DVector<f64>],
    z: &[DVector<f64>],
    noise: &NoiseSpec,
    order: &[usize],
) -> Result<EnkfUpdate> {
    check_dim("predicted measurements", x.len(), z.len())?;
    let scale = 1.0 / (x.len() as f64 - 1.0);
    let x_mean = sample_mean(x, order);
    let z_mean = sample_mean(z, order);
    let dx = deviations(x, &x_mean, order);
    let dz = deviations(z, &z_mean, order);
    let mut re = &dz * dz.transpose() * scale + noise.covariance();
    symmetrize_mut(&mut re);
    let rxy = dx * dz.transpose() * scale;
    let gain = right_solve_spd(&rxy, &re)?;
    Ok(EnkfUpdate {
        predicted_measurement: z_mean,
        innovation_cov: re,
        cross_cov: rxy,
        gain,
    })
}

/// Perturbed-observation update: one gain from the ensemble statistics,
/// applied to every member with its own noisy copy of `y`.
pub fn enkf_measurement_update<M: Model + ?Sized>(
    ensemble: &mut Ensemble,
    model: &M,
    t: f64,
    y: &DVector<f64>,
    noise: &NoiseSpec,
    rng: &mut RngStream,
) -> Result<EnkfUpdate> {
    let dims = model.dims();
    check_dim("measurement", dims.ny, y.len())?;
    check_dim("measurement noise", dims.ny, noise.dim())?;
    let members = &mut ensemble.members;
    let n = members.len();
    let z: Vec<DVector<f64>> = members.iter().map(|x| model.measurement(t, x)).collect();
    let update = ensemble_gain(members, &z, noise, &natural_order(n))?;
    let mut innovations = noise.sample_columns(rng, n);
    for (i, zi) in z.iter().enumerate() {
        for (r, (yr, zr)) in y.iter().zip(zi.iter()).enumerate() {
            innovations[(r, i)] += yr - zr;
        }
    }
    let corrections = &update.gain * innovations;
    for (i, x) in members.iter_mut().enumerate() {
        *x += corrections.column(i);
    }
    check_members(members, "ensemble")?;
    Ok(update)
}

/// Ensemble Kalman filter over an owned model and a dedicated random stream.
pub struct Enkf<M> {
    model: M,
    noise: NoiseSpec,
    internal_steps: usize,
    ensemble: Ensemble,
    rng: RngStream,
}

impl<M: Model> Enkf<M> {
    pub fn new(
        model: M,
        noise: NoiseSpec,
        initial: &GaussianBelief,
        members: usize,
        internal_steps: usize,
        mut rng: RngStream,
    ) -> Result<Self> {
        check_steps(internal_steps)?;
        check_dim("enkf initial mean", model.dims().nx, initial.dim())?;
        let ensemble = enkf_init(initial, members, &mut rng)?;
        Ok(Self {
            model,
            noise,
            internal_steps,
            ensemble,
            rng,
        })
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }
}

impl<M: Model> Filter for Enkf<M> {
    fn kind(&self) -> FilterKind {
        FilterKind::Enkf
    }

    fn time_update(&mut self, t0: f64, t1: f64, u: &SignalProfile, d: &SignalProfile) -> Result<()> {
        enkf_time_update(
            &mut self.ensemble,
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
        enkf_measurement_update(&mut self.ensemble, &self.model, t, y, &self.noise, &mut self.rng)?;
        Ok(())
    }

    fn belief(&self) -> GaussianBelief {
        self.ensemble.belief()
    }

    fn members(&self) -> Option<&[DVector<f64>]> {
        Some(self.ensemble.members())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::ekf::{ekf_measurement_update, ekf_time_update};
    use crate::filters::ensemble::canonical_order;
    use crate::filters::testutil::*;

    fn y1(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn zero_prior_covariance_gives_identical_members() {
        let e = enkf_init(&belief1(3.0, 0.0), 5, &mut RngStream::new(1)).unwrap();
        assert!(e.members().iter().all(|m| m[0] == 3.0));
    }

    #[test]
    fn initial_ensemble_matches_prior() {
        let mut rng = RngStream::new(11);
        let prior = random_belief(&mut rng, 3);
        let e = enkf_init(&prior, 100_000, &mut RngStream::new(12)).unwrap();
        let b = e.belief();
        let p = prior.cov();
        for i in 0..3 {
            for j in 0..3 {
                let scale = (p[(i, i)] * p[(j, j)]).sqrt();
                assert!((b.cov()[(i, j)] - p[(i, j)]).abs() < 0.03 * scale, "({i},{j})");
            }
            assert!((b.mean()[i] - prior.mean()[i]).abs() < 0.03 * p[(i, i)].sqrt());
        }
    }

    #[test]
    fn too_few_members_rejected() {
        assert!(enkf_init(&belief1(0.0, 1.0), 1, &mut RngStream::new(1)).is_err());
    }

    fn run_once(seed: u64) -> Ensemble {
        let model = scalar(-0.5, 0.3, 1.0);
        let noise = NoiseSpec::from_std(&[0.2]).unwrap();
        let mut f = Enkf::new(model, noise, &belief1(1.0, 0.5), 50, 10, RngStream::new(seed)).unwrap();
        for k in 0..5 {
            let t = k as f64 * 0.1;
            f.time_update(t, t + 0.1, &none(), &none()).unwrap();
            f.measurement_update(t + 0.1, &y1(0.7)).unwrap();
        }
        f.ensemble().clone()
    }

    #[test]
    fn same_seed_is_bit_identical() {
        assert_eq!(run_once(4), run_once(4));
        assert_ne!(run_once(4), run_once(5));
    }

    #[test]
    fn zero_dynamics_leave_members_unchanged() {
        let model = scalar(0.0, 0.0, 1.0);
        let mut e = enkf_init(&belief1(0.0, 1.0), 20, &mut RngStream::new(2)).unwrap();
        let before = e.clone();
        enkf_time_update(&mut e, &model, 0.0, 1.0, &none(), &none(), 10, &mut RngStream::new(3)).unwrap();
        assert_eq!(e, before);
    }

    #[test]
    fn identical_members_stay_identical() {
        let model = scalar(-1.0, 0.0, 1.0);
        let noise = NoiseSpec::from_std(&[0.5]).unwrap();
        let mut e = Ensemble::new(vec![y1(2.0); 8]).unwrap();
        let mut rng = RngStream::new(9);
        enkf_time_update(&mut e, &model, 0.0, 0.5, &none(), &none(), 10, &mut rng).unwrap();
        let update = enkf_measurement_update(&mut e, &model, 0.5, &y1(0.0), &noise, &mut rng).unwrap();
        assert_eq!(update.gain, DMatrix::zeros(1, 1));
        let first = e.members()[0].clone();
        assert!(e.members().iter().all(|m| *m == first));
        assert!((first[0] - 2.0 * 0.95f64.powi(10)).abs() < 1e-12);
    }

    #[test]
    fn large_ensemble_agrees_with_ekf_on_linear_model() {
        let mut rng = RngStream::new(21);
        let model = random_stable(&mut rng, 2, 2, 1);
        let prior = random_belief(&mut rng, 2);
        let noise = NoiseSpec::from_std(&[0.5]).unwrap();
        let y = y1(0.3);
        let n = 10_000;

        let predicted = ekf_time_update(&model, &prior, 0.0, 0.2, &none(), &none(), 200).unwrap();
        let posterior = ekf_measurement_update(&model, &predicted, 0.2, &y, &noise).unwrap().belief;

        let mut e = enkf_init(&prior, n, &mut rng).unwrap();
        enkf_time_update(&mut e, &model, 0.0, 0.2, &none(), &none(), 200, &mut rng).unwrap();
        enkf_measurement_update(&mut e, &model, 0.2, &y, &noise, &mut rng).unwrap();
        let b = e.belief();

        for i in 0..2 {
            let sd = posterior.cov()[(i, i)].sqrt();
            assert!((b.mean()[i] - posterior.mean()[i]).abs() < 5.0 * sd / (n as f64).sqrt());
        }
        assert!(rel_err(b.cov(), posterior.cov()) < 0.05);
    }

    #[test]
    fn scalar_posterior_matches_kalman() {
        // prior N(0, 1), y = 1 with R = 1: posterior N(0.5, 0.5)
        let model = scalar(0.0, 0.0, 1.0);
        let noise = NoiseSpec::from_std(&[1.0]).unwrap();
        let mut rng = RngStream::new(31);
        let mut e = enkf_init(&belief1(0.0, 1.0), 100_000, &mut rng).unwrap();
        enkf_measurement_update(&mut e, &model, 0.0, &y1(1.0), &noise, &mut rng).unwrap();
        let b = e.belief();
        assert!((b.mean()[0] - 0.5).abs() < 0.01);
        assert!((b.cov()[(0, 0)] - 0.5).abs() < 0.01);
    }

    #[test]
    fn uninformative_measurement_barely_moves_members() {
        let model = scalar(0.0, 0.0, 1.0);
        let noise = NoiseSpec::from_std(&[1e9f64.sqrt()]).unwrap();
        let mut rng = RngStream::new(41);
        let mut e = enkf_init(&belief1(0.0, 1.0), 500, &mut rng).unwrap();
        let before = e.belief();
        enkf_measurement_update(&mut e, &model, 0.0, &y1(100.0), &noise, &mut rng).unwrap();
        assert!((e.belief().mean()[0] - before.mean()[0]).abs() < 1e-3);
    }

    #[test]
    fn zero_spread_gives_zero_gain() {
        let x = vec![DVector::from_vec(vec![1.0, 2.0]); 4];
        let z = vec![y1(3.0); 4];
        let noise = NoiseSpec::from_std(&[1.0]).unwrap();
        let u = ensemble_gain(&x, &z, &noise, &natural_order(4)).unwrap();
        assert_eq!(u.gain, DMatrix::zeros(2, 1));
        assert_eq!(u.innovation_cov, DMatrix::identity(1, 1));
    }

    #[test]
    fn canonical_gain_is_permutation_invariant() {
        let mut rng = RngStream::new(51);
        let model = random_stable(&mut rng, 3, 1, 2);
        let noise = NoiseSpec::from_std(&[0.3, 0.4]).unwrap();
        let x: Vec<_> = (0..64)
            .map(|_| DVector::from_fn(3, |_, _| rng.standard_normal()))
            .collect();
        let mut shuffled = x.clone();
        shuffled.reverse();
        shuffled.swap(0, 40);
        let gain = |x: &[DVector<f64>]| {
            let z: Vec<_> = x.iter().map(|m| model.measurement(0.0, m)).collect();
            ensemble_gain(x, &z, &noise, &canonical_order(x)).unwrap()
        };
        assert_eq!(gain(&x), gain(&shuffled));
    }
}
