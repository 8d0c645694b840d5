use std::path::Path;

use anyhow::{Context, Result};
use cdstate::experiment::BenchConfig;
use cdstate::FilterKind;

/// Parses a TOML configuration. Missing keys take their defaults; unknown
/// keys are errors.
pub fn parse(text: &str) -> Result<BenchConfig> {
    let cfg: BenchConfig = toml::from_str(text)?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<BenchConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `ekf,ukf,enkf,pf` in any order and case.
pub fn parse_filters(list: &str) -> Result<Vec<FilterKind>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse().map_err(anyhow::Error::from))
        .collect()
}

/// Configuration file (or defaults) with command-line overrides applied.
pub fn resolve(path: Option<&Path>, seed: Option<u64>, filters: Option<&str>) -> Result<BenchConfig> {
    let mut cfg = match path {
        Some(p) => load(p)?,
        None => BenchConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(list) = filters {
        cfg.filters = parse_filters(list)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
