//! One simulated run of the two-stage scheduler, with per-epoch shares and
//! RB budgets.

use v2x_twostage::mobility::TdiRegime;
use v2x_twostage::model::ScenarioConfig;
use v2x_twostage::sim::{run, MetricsReport, PlannerCache, PolicyKind, RunSpec};

pub fn run_example(policy: PolicyKind, epochs: usize) -> MetricsReport {
    let mut cfg = ScenarioConfig::default();
    cfg.queue.capacity = 4;
    cfg.stage2.n_mc = 50;
    cfg.stage2.full_scenarios = 30;
    let mut spec = RunSpec::new(policy, TdiRegime::High, 20.0, 7);
    spec.epochs = Some(epochs);
    run(&cfg, &spec, &mut PlannerCache::new()).expect("run completes")
}

#[allow(dead_code)]
fn main() {
    let r = run_example(PolicyKind::TwoStage, 2);
    for (e, rec) in r.epochs.iter().enumerate() {
        println!("epoch {e}: kappa {:.3?} shares {:.3?} RBs {:?} vehicles {:?}", rec.tdi.0, rec.shares.epsilon, rec.budget, rec.vehicles);
    }
    println!(
        "delay {:?} s, PRR {:?}, NDS rate {:?} bit/s, overflow {:?}",
        r.mean_delay(),
        r.mean_prr(),
        r.mean_rate(),
        r.overflow_frac()
    );
    println!("{} planner builds, {:?} per decision", r.planner_builds, r.time_per_decision());
}
