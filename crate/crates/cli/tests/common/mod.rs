use cdstate::experiment::BenchConfig;

/// A short run that exercises every filter in well under a second.
#[allow(dead_code)]
pub fn small_config() -> BenchConfig {
    let mut cfg = BenchConfig {
        horizon: 300.0,
        samples: 20,
        ..BenchConfig::default()
    };
    cfg.simulation.internal_steps = 50;
    cfg.estimation.internal_steps = 10;
    cfg.enkf.members = 40;
    cfg.pf.particles = 200;
    cfg
}

/// The same configuration as TOML, for the binary.
#[allow(dead_code)]
pub const SMALL_TOML: &str = "\
horizon = 300.0
samples = 20

[simulation]
internal_steps = 50

[estimation]
internal_steps = 10

[enkf]
members = 40

[pf]
particles = 200
";
