use crate::error::Result;
use crate::filters::pf::systematic_counts;
use crate::numerics::RngStream;

/// Largest accepted deviation of a mean copy count, in standard errors.
pub const MAX_Z: f64 = 3.0;

const UNBIASED_WEIGHTS: [f64; 6] = [0.05, 0.3, 0.15, 0.0, 0.37, 0.13];

#[derive(Debug, Clone, PartialEq)]
pub struct ResamplingReport {
    /// Uniform weights gave one copy of each particle at every offset.
    pub uniform_exact: bool,
    /// A unit weight gave all copies to its particle at every offset.
    pub degenerate_exact: bool,
    pub trials: usize,
    /// Mean copy counts over the trials.
    pub mean_counts: Vec<f64>,
    /// `N·wᵢ`.
    pub expected_counts: Vec<f64>,
    /// Largest `|mean − N·wᵢ|` in standard errors.
    pub max_z: f64,
}

impl ResamplingReport {
    pub fn passed(&self) -> bool {
        self.uniform_exact && self.degenerate_exact && self.max_z <= MAX_Z
    }
}

/// Enumerated cases plus `trials` resamplings with uniform random offsets.
pub fn resampling_check(trials: usize, seed: u64) -> Result<ResamplingReport> {
    // interior offsets: at q1 = 0 the first point lies on no interval
    let offsets = [0.01, 0.25, 0.5, 0.75, 0.99];
    let mut uniform_exact = true;
    let mut degenerate_exact = true;
    for n in 1..=12 {
        for &q1 in &offsets {
            uniform_exact &= systematic_counts(&vec![1.0 / n as f64; n], q1)?.iter().all(|&m| m == 1);
            for j in 0..n {
                let mut w = vec![0.0; n];
                w[j] = 1.0;
                let counts = systematic_counts(&w, q1)?;
                degenerate_exact &= counts.iter().enumerate().all(|(i, &m)| m == if i == j { n } else { 0 });
            }
        }
    }

    let n = UNBIASED_WEIGHTS.len();
    let mut rng = RngStream::new(seed);
    let mut totals = vec![0usize; n];
    for _ in 0..trials {
        for (t, m) in totals.iter_mut().zip(systematic_counts(&UNBIASED_WEIGHTS, rng.open_uniform())?) {
            *t += m;
        }
    }
    let mean_counts: Vec<f64> = totals.iter().map(|&t| t as f64 / trials as f64).collect();
    let expected_counts: Vec<f64> = UNBIASED_WEIGHTS.iter().map(|w| w * n as f64).collect();
    let max_z = mean_counts
        .iter()
        .zip(&expected_counts)
        .map(|(&mean, &expected)| {
            // each count is ⌊N·w⌋ or ⌈N·w⌉: a shifted Bernoulli in the fraction
            let f = expected - expected.floor();
            let se = (f * (1.0 - f) / trials as f64).sqrt();
            let gap = (mean - expected).abs();
            match se > 0.0 {
                true => gap / se,
                false if gap < 1e-12 => 0.0,
                false => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max);
    Ok(ResamplingReport {
        uniform_exact,
        degenerate_exact,
        trials,
        mean_counts,
        expected_counts,
        max_z,
    })
}
