//! Solving one subregion's scheduling problem, saving its value table as
//! text and warm-starting a second solve from it.

use v2x_twostage::mobility::TdiRegime;
use v2x_twostage::model::ScenarioConfig;
use v2x_twostage::rng::stream;
use v2x_twostage::sim::{build_planner, regime_scenarios};
use v2x_twostage::stage2::{Shape, TableKind, ValueTable};

pub struct WarmStart {
    pub cold_iterations: usize,
    pub warm_iterations: usize,
    pub theta: f64,
    pub text: String,
}

pub fn run_example() -> WarmStart {
    let mut cfg = ScenarioConfig::default();
    cfg.queue.capacity = 4;
    let shape = Shape { n_nds: 1, n_ds: 2, n_rbs: 2 };
    let set = regime_scenarios(TdiRegime::Low, shape, 100, &cfg, &mut stream(3, &[1]));
    let cold = build_planner(TableKind::Reduced, shape, &set, 10.0, None, &cfg, None).expect("solve");
    let text = cold.value_table().to_text();
    let table = ValueTable::from_text(&text).expect("parse");
    let warm = build_planner(TableKind::Reduced, shape, &set, 10.0, None, &cfg, Some(&table.averaged())).expect("solve");
    WarmStart {
        cold_iterations: cold.solution.iterations,
        warm_iterations: warm.solution.iterations,
        theta: warm.theta(),
        text,
    }
}

#[allow(dead_code)]
fn main() {
    let w = run_example();
    println!("{}", w.text.lines().take(6).collect::<Vec<_>>().join("\n"));
    println!("...");
    println!("theta {:.6}: {} iterations cold, {} warm", w.theta, w.cold_iterations, w.warm_iterations);
}
