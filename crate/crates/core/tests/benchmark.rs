//! End-to-end properties of the four-tank benchmark runner.

use cdstate::experiment::{run_benchmark, simulate_truth, BenchConfig, Summary};
use cdstate::FilterKind;

fn short(filters: &[FilterKind]) -> BenchConfig {
    BenchConfig {
        horizon: 300.0,
        samples: 20,
        filters: filters.to_vec(),
        ..BenchConfig::default()
    }
}

#[test]
fn noiseless_ekf_tracks_the_plant() {
    let mut cfg = BenchConfig {
        filters: vec![FilterKind::Ekf],
        ..BenchConfig::default()
    };
    cfg.simulation.sigma = 0.0;
    cfg.measurement.std = 0.0;
    let record = run_benchmark(&cfg, false).unwrap();
    let run = record.run(FilterKind::Ekf).unwrap();
    assert!(run.error.is_none(), "{:?}", run.error);
    let mape_x = run.mape_x(&record.truth).unwrap().unwrap();
    assert!(mape_x < 0.5, "MAPE_x = {mape_x}");
}

#[test]
fn toggling_a_filter_leaves_the_others_unchanged() {
    let all = run_benchmark(&short(&FilterKind::ALL), false).unwrap();
    for kind in FilterKind::ALL {
        let alone = run_benchmark(&short(&[kind]), false).unwrap();
        assert_eq!(alone.truth, all.truth);
        let (a, b) = (alone.run(kind).unwrap(), all.run(kind).unwrap());
        assert_eq!(a.estimates, b.estimates, "{kind}");
        assert_eq!(a.variances, b.variances, "{kind}");
        assert_eq!(a.ess, b.ess, "{kind}");
    }
}

#[test]
fn filter_order_does_not_matter() {
    let forward = run_benchmark(&short(&FilterKind::ALL), false).unwrap();
    let mut reversed = FilterKind::ALL.to_vec();
    reversed.reverse();
    let backward = run_benchmark(&short(&reversed), false).unwrap();
    for kind in FilterKind::ALL {
        assert_eq!(forward.run(kind).unwrap().estimates, backward.run(kind).unwrap().estimates);
    }
}

#[test]
fn seeds_change_the_truth() {
    let a = simulate_truth(&short(&[])).unwrap();
    let b = simulate_truth(&BenchConfig { seed: 2, ..short(&[]) }).unwrap();
    assert_eq!(a.states[0], b.states[0]);
    assert_ne!(a.measurements, b.measurements);
}

#[test]
fn record_shapes_and_timings() {
    let record = run_benchmark(&short(&FilterKind::ALL), true).unwrap();
    assert_eq!(record.truth.states.len(), 21);
    assert_eq!(record.truth.measurements.len(), 20);
    for run in &record.runs {
        assert!(run.error.is_none());
        assert_eq!(run.steps(), 20);
        for t in [&run.tu_seconds, &run.mu_seconds] {
            assert!(t.windows(2).all(|w| w[1] >= w[0]));
        }
        let members = match run.kind {
            FilterKind::Enkf => 250,
            FilterKind::Pf => 1000,
            _ => 0,
        };
        assert_eq!(run.members.iter().map(Vec::len).max().unwrap_or(0), members);
        assert_eq!(run.ess.len(), if run.kind == FilterKind::Pf { 20 } else { 0 });
    }
    let summary = Summary::from_record(&record).unwrap();
    assert_eq!(summary.rows.len(), 4);
    assert!(summary.rows.iter().all(|r| r.mape_x.is_some() && r.mape_d.is_some()));
}

#[test]
fn a_failing_filter_does_not_stop_the_others() {
    // the particle filter needs a definite noise covariance; the rest do not
    let mut cfg = short(&FilterKind::ALL);
    cfg.measurement.std = 0.0;
    let record = run_benchmark(&cfg, false).unwrap();
    let pf = record.run(FilterKind::Pf).unwrap();
    assert!(pf.error.is_some());
    assert_eq!(pf.steps(), 0);
    assert!(pf.mape_x(&record.truth).unwrap().is_none());
    let ekf = record.run(FilterKind::Ekf).unwrap();
    assert!(ekf.error.is_none());
    assert_eq!(ekf.steps(), 20);
    let summary = Summary::from_record(&record).unwrap();
    assert!(summary.row(FilterKind::Pf).unwrap().error.is_some());
    assert!(summary.to_text().contains("PF failed"));
}

#[test]
fn disabled_filter_has_no_row() {
    let record = run_benchmark(&short(&[FilterKind::Ekf, FilterKind::Ukf]), false).unwrap();
    let summary = Summary::from_record(&record).unwrap();
    assert!(summary.row(FilterKind::Pf).is_none());
    assert_eq!(summary.to_csv().lines().count(), 3);
}
