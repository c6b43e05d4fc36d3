//! A reduced delay-versus-load sweep written as CSV to stdout, with the
//! desk configuration when it is found.

use std::path::Path;

use v2x_twostage::mobility::TdiRegime;
use v2x_twostage::model::ScenarioConfig;
use v2x_twostage::sim::{sweep, write_rows, PlannerCache, PolicyKind, SweepRow, SweepSpec};

pub fn run_example(cfg: &ScenarioConfig, rates: Vec<f64>, reps: usize) -> Vec<SweepRow> {
    let spec = SweepSpec {
        policies: vec![PolicyKind::TwoStage, PolicyKind::FullOptimal, PolicyKind::Random],
        regimes: vec![TdiRegime::Low, TdiRegime::High],
        rates,
        reps,
        base_seed: cfg.rng_seed,
        epochs: Some(1),
    };
    sweep(cfg, &spec, &mut PlannerCache::new(), |row, _| eprintln!("{} {} {}", row.policy, row.regime.label(), row.arrival_rate))
        .expect("sweep completes")
}

#[allow(dead_code)]
fn main() {
    let desk = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let cfg = ScenarioConfig::load(&desk).unwrap_or_default();
    let rows = run_example(&cfg, vec![5.0, 15.0, 30.0], 2);
    write_rows(std::io::stdout().lock(), &rows, true).expect("stdout");
}
