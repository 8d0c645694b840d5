use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use cdstate::checks;
use cdstate::experiment::{estimate, seed_statistics, seed_statistics_text, simulate_truth, BenchConfig, RunRecord, Summary};
use cdstate::mfts::MftsModel;
use cdstate::model::check_jacobians;
use cdstate::numerics::RngStream;
use cdstate::FilterKind;

use crate::io::{read_truth, write_estimates, write_particles, write_summary, write_truth, Trace};

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Simulates the truth and writes `truth.csv`.
pub fn simulate(cfg: &BenchConfig, out: &Path) -> Result<PathBuf> {
    create_dir(out)?;
    let truth = simulate_truth(cfg)?;
    let path = out.join("truth.csv");
    write_truth(&path, &truth, &cfg.measurement.tanks)?;
    Ok(path)
}

/// Writes the per-filter estimates, the combined trace and the summary of
/// a run.
pub fn write_run(cfg: &BenchConfig, record: &RunRecord, out: &Path, dump_particles: bool) -> Result<Summary> {
    create_dir(out)?;
    for run in &record.runs {
        write_estimates(&out.join(format!("estimates_{}.csv", run.kind)), run, &record.truth.times)?;
        if dump_particles && matches!(run.kind, FilterKind::Enkf | FilterKind::Pf) {
            write_particles(&out.join(format!("particles_{}.csv", run.kind)), run, &record.truth.times)?;
        }
    }
    Trace::from_record(record, &cfg.measurement.tanks).write(&out.join("record.csv"))?;
    let summary = Summary::from_record(record)?;
    write_summary(out, &summary)?;
    Ok(summary)
}

/// Runs the enabled filters on a truth CSV written by [`simulate`].
pub fn estimate_from(cfg: &BenchConfig, truth_path: &Path, out: &Path, dump_particles: bool) -> Result<Summary> {
    let (truth, tanks) = read_truth(truth_path)?;
    ensure!(
        tanks == cfg.measurement.tanks,
        "{} measures tanks {tanks:?}, the configuration {:?}",
        truth_path.display(),
        cfg.measurement.tanks
    );
    let runs = estimate(cfg, &truth, dump_particles)?;
    write_run(cfg, &RunRecord { truth, runs }, out, dump_particles)
}

/// End-to-end run: `truth.csv` plus everything [`write_run`] writes.
pub fn bench(cfg: &BenchConfig, out: &Path, dump_particles: bool) -> Result<Summary> {
    let truth_path = simulate(cfg, out)?;
    let (truth, _) = read_truth(&truth_path)?;
    let runs = estimate(cfg, &truth, dump_particles)?;
    write_run(cfg, &RunRecord { truth, runs }, out, dump_particles)
}

/// `seeds` consecutive seeds from `cfg.seed`, each in `out/seed_<s>`, with
/// MAPE statistics in `out/seeds.txt`.
pub fn bench_seeds(cfg: &BenchConfig, out: &Path, seeds: u64, dump_particles: bool) -> Result<String> {
    let mut summaries = Vec::new();
    for seed in cfg.seed..cfg.seed + seeds {
        let cfg = BenchConfig { seed, ..cfg.clone() };
        eprintln!("seed {seed}");
        summaries.push(bench(&cfg, &out.join(format!("seed_{seed}")), dump_particles)?);
    }
    let text = seed_statistics_text(&seed_statistics(&summaries));
    let path = out.join("seeds.txt");
    std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    Ok(text)
}

/// The reference checks; returns the report and whether all passed.
pub fn check(cfg: &BenchConfig) -> Result<(String, bool)> {
    let mut out = String::new();
    let mut all = true;
    let mut line = |name: &str, passed: bool, detail: String| {
        all &= passed;
        let _ = writeln!(out, "{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    };

    let model = MftsModel::with_measured_tanks(cfg.model_params(cfg.simulation_tuning()), &cfg.measured_tanks()?)?;
    let r = check_jacobians(&model, 100, &mut RngStream::new(cfg.seed))?;
    line("jacobians", r.passed(), format!("max error {:.2e}", r.max_error()));

    let r = checks::linear_oracle(20, cfg.seed)?;
    line(
        "linear-oracle",
        r.passed(),
        format!(
            "EKF vs exact {:.2e}, UKF update {:.2e}, UKF step {:.2e}, UKF run {:.2e}",
            r.ekf_vs_exact, r.ukf_update_vs_ekf, r.ukf_step_vs_ekf, r.ukf_run_vs_ekf
        ),
    );

    let r = checks::joseph_identity(1000, cfg.seed)?;
    line(
        "joseph-form",
        r.passed(),
        format!(
            "identity {:.2e}, Joseph indefinite {}, standard indefinite {}",
            r.max_identity_error, r.joseph_indefinite, r.standard_indefinite
        ),
    );

    let r = checks::monte_carlo_convergence(&[100, 1000, 10_000, 100_000], 40, cfg.seed)?;
    line(
        "monte-carlo",
        r.passed(),
        format!("slopes EnKF {:.3}, PF {:.3}", r.enkf_slope, r.pf_slope),
    );

    let r = checks::resampling_check(10_000, cfg.seed)?;
    line(
        "resampling",
        r.passed(),
        format!("uniform {}, degenerate {}, max z {:.2}", r.uniform_exact, r.degenerate_exact, r.max_z),
    );

    let r = checks::ou_stationary_variance(cfg, 100_000)?;
    line(
        "ou-variance",
        r.passed(),
        format!("expected {:.1}, measured {:.1?}", r.expected, r.measured),
    );
    Ok((out, all))
}
