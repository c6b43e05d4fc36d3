//! Every example's `run_example` is exercised here so the examples keep
//! compiling and keep telling the truth.

#[path = "../examples/channel_stats.rs"]
mod channel_stats;
#[path = "../examples/greenshield.rs"]
mod greenshield;
#[path = "../examples/queue_little.rs"]
mod queue_little;
#[path = "../examples/simulate.rs"]
mod simulate;
#[path = "../examples/stage1_shares.rs"]
mod stage1_shares;
#[path = "../examples/sweep_fig4.rs"]
mod sweep_fig4;
#[path = "../examples/toy_mdp.rs"]
mod toy_mdp;
#[path = "../examples/warm_start.rs"]
mod warm_start;

use v2x_twostage::model::ScenarioConfig;
use v2x_twostage::sim::PolicyKind;

#[test]
fn greenshield_peaks_at_half_jam() {
    let c = greenshield::run_example();
    assert_eq!(c.peak_density, 1.0);
    assert_eq!(c.points.first().unwrap().2, 0.0);
    assert_eq!(c.points.last().unwrap().2, 0.0);
}

#[test]
fn shares_match_reference_and_symmetry() {
    let rows = stage1_shares::run_example();
    assert_eq!(rows[0].1.epsilon, [0.25; 4]);
    for (_, s, gap) in rows {
        assert!(gap < 1e-9);
        assert!((s.epsilon.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn channel_moments() {
    let s = channel_stats::run_example(20_000, 3);
    assert!(((s.mean - s.expected) / s.std_error).abs() < 4.0);
    assert!(s.lag1.abs() < 0.05);
}

#[test]
fn toy_mdp_oracles_agree() {
    let m = toy_mdp::run_example();
    assert!((m.small_rvi_theta - m.small_enumerated_theta).abs() < 1e-6);
    assert!((m.full_theta - m.lp_theta).abs() < 1e-6);
    assert!(m.deterministic_theta_gap < 1e-9);
    // the queue-only value can never undercut the full-information optimum
    assert!(m.reduced_theta >= m.full_theta - 1e-9);
    assert!(m.deployed_reduced_cost >= m.full_theta - 1e-9);
}

#[test]
fn little_readouts_agree() {
    let r = queue_little::run_example(200_000);
    assert!((r.little_delay - r.sojourn_delay).abs() / r.sojourn_delay < 0.05);
    assert_eq!(r.dropped, 0);
}

#[test]
fn simulation_reports_every_epoch() {
    let r = simulate::run_example(PolicyKind::TwoStage, 2);
    assert_eq!(r.epochs.len(), 2);
    assert_eq!(r.stage1_solves, 2);
    assert!(r.mean_delay().unwrap() > 0.0);
    for e in &r.epochs {
        assert_eq!(e.budget.iter().sum::<usize>(), 25);
    }
}

#[test]
fn small_sweep_has_every_cell() {
    let mut cfg = ScenarioConfig::default();
    cfg.queue.capacity = 3;
    cfg.stage2.n_mc = 30;
    cfg.stage2.full_scenarios = 20;
    cfg.sim.epochs = 1;
    let rows = sweep_fig4::run_example(&cfg, vec![5.0, 30.0], 1);
    assert_eq!(rows.len(), 3 * 2 * 2);
    assert!(rows.iter().all(|r| r.mean_delay.is_some()));
}

#[test]
fn warm_start_converges_at_once() {
    let w = warm_start::run_example();
    assert!(w.warm_iterations < w.cold_iterations);
    assert!(w.text.contains("# theta"));
}
