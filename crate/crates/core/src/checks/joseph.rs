use super::random::{matrix, spd};
use crate::error::Result;
use crate::filters::ekf::{joseph_update, standard_update};
use crate::numerics::linalg::{min_eigenvalue, right_solve_spd};
use crate::numerics::RngStream;

pub const IDENTITY_TOL: f64 = 1e-10;
/// Eigenvalues above `−PSD_TOL·trace` count as nonnegative.
pub const PSD_TOL: f64 = 1e-9;
pub const GAIN_PERTURBATION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct JosephReport {
    pub instances: usize,
    /// Largest `‖Joseph − standard‖_max / ‖P‖_max` at the optimal gain.
    pub max_identity_error: f64,
    /// Smallest `λ_min / trace` of the Joseph form over perturbed gains.
    pub joseph_min_eigen_ratio: f64,
    /// Perturbed gains for which the Joseph form left the PSD cone.
    pub joseph_indefinite: usize,
    /// Perturbed gains for which the standard form left the PSD cone.
    pub standard_indefinite: usize,
}

impl JosephReport {
    pub fn passed(&self) -> bool {
        self.max_identity_error <= IDENTITY_TOL && self.joseph_indefinite == 0 && self.standard_indefinite > 0
    }
}

fn indefinite(m: &nalgebra::DMatrix<f64>) -> bool {
    min_eigenvalue(m) < -PSD_TOL * m.trace().abs()
}

/// Random `(P, C, R)` up to 10×10 with `R` scaled over ten decades. The
/// gain is perturbed by `±1%` uniformly and entrywise with random signs.
pub fn joseph_identity(instances: usize, seed: u64) -> Result<JosephReport> {
    let mut rng = RngStream::new(seed);
    let mut report = JosephReport {
        instances,
        max_identity_error: 0.0,
        joseph_min_eigen_ratio: f64::INFINITY,
        joseph_indefinite: 0,
        standard_indefinite: 0,
    };
    for _ in 0..instances {
        let n = 1 + (rng.uniform() * 10.0) as usize;
        let ny = 1 + (rng.uniform() * 10.0) as usize;
        let p = spd(&mut rng, n, 0.1);
        let c = matrix(&mut rng, ny, n);
        let r = spd(&mut rng, ny, 0.1) * 10f64.powf(-8.0 + 10.0 * rng.uniform());
        let re = &c * &p * c.transpose() + &r;
        let k = right_solve_spd(&(&p * c.transpose()), &re)?;

        let joseph = joseph_update(&p, &c, &k, &r);
        let standard = standard_update(&p, &k, &re);
        report.max_identity_error = report.max_identity_error.max((&joseph - &standard).amax() / p.amax());

        let signs = k.map(|_| if rng.uniform() < 0.5 { -1.0 } else { 1.0 });
        let perturbed = [
            &k * (1.0 + GAIN_PERTURBATION),
            &k * (1.0 - GAIN_PERTURBATION),
            k.zip_map(&signs, |g, s| g * (1.0 + s * GAIN_PERTURBATION)),
        ];
        for kp in &perturbed {
            let joseph = joseph_update(&p, &c, kp, &r);
            report.joseph_min_eigen_ratio = report.joseph_min_eigen_ratio.min(min_eigenvalue(&joseph) / joseph.trace());
            report.joseph_indefinite += usize::from(indefinite(&joseph));
            report.standard_indefinite += usize::from(indefinite(&standard_update(&p, kp, &re)));
        }
    }
    Ok(report)
}
