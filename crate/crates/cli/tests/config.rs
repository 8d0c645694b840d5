mod common;

use std::path::Path;

use cdstate::experiment::BenchConfig;
use cdstate::FilterKind;
use cdstate_cli::config;

#[test]
fn empty_file_is_the_default() {
    assert_eq!(config::parse("").unwrap(), BenchConfig::default());
}

#[test]
fn reference_file_spells_out_the_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/reference.toml");
    assert_eq!(config::load(&path).unwrap(), BenchConfig::default());
}

#[test]
fn partial_tables_keep_remaining_defaults() {
    let cfg = config::parse("seed = 7\n[pf]\nparticles = 50\n").unwrap();
    let default = BenchConfig::default();
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.pf.particles, 50);
    assert_eq!(cfg.pf.lambda, default.pf.lambda);
    assert_eq!(cfg.enkf, default.enkf);
}

#[test]
fn small_toml_matches_small_config() {
    assert_eq!(config::parse(common::SMALL_TOML).unwrap(), common::small_config());
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(config::parse("sed = 1\n").is_err());
    assert!(config::parse("[pf]\nparticle = 10\n").is_err());
    assert!(config::parse("[kalman]\n").is_err());
}

#[test]
fn wrong_types_are_rejected() {
    assert!(config::parse("samples = \"many\"\n").is_err());
    assert!(config::parse("filters = [\"kf\"]\n").is_err());
}

#[test]
fn filter_lists() {
    assert_eq!(
        config::parse_filters("pf,EKF").unwrap(),
        vec![FilterKind::Pf, FilterKind::Ekf]
    );
    assert_eq!(config::parse_filters(" ukf , enkf ").unwrap(), vec![FilterKind::Ukf, FilterKind::Enkf]);
    assert!(config::parse_filters("ekf,kf").is_err());
}

#[test]
fn overrides_apply_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "seed = 3\n").unwrap();

    let cfg = config::resolve(Some(&path), None, None).unwrap();
    assert_eq!(cfg.seed, 3);
    let cfg = config::resolve(Some(&path), Some(9), Some("ukf")).unwrap();
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.filters, vec![FilterKind::Ukf]);

    assert!(config::resolve(None, None, Some("ekf,ekf")).is_err());
    std::fs::write(&path, "samples = 0\n").unwrap();
    assert!(config::resolve(Some(&path), None, None).is_err());
    std::fs::write(&path, "[measurement]\ntanks = [5]\n").unwrap();
    assert!(config::resolve(Some(&path), None, None).is_err());
    assert!(config::resolve(Some(&dir.path().join("missing.toml")), None, None).is_err());
}
