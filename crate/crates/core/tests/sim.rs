use v2x_twostage::mobility::TdiRegime;
use v2x_twostage::model::{PlanningMode, ScenarioConfig};
use v2x_twostage::rng::stream;
use v2x_twostage::sim::{
    build_planner, regime_scenarios, run, sweep, write_rows, MetricsReport, PlannerCache, PolicyKind, RunSpec, SweepRow,
    SweepSpec,
};
use v2x_twostage::stage2::{Shape, TableKind, ValueTable};

fn small() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.queue.capacity = 3;
    cfg.stage2.n_mc = 20;
    cfg.stage2.full_scenarios = 10;
    cfg
}

fn go(cfg: &ScenarioConfig, policy: PolicyKind, regime: TdiRegime, rate: f64, seed: u64, epochs: usize) -> MetricsReport {
    let mut spec = RunSpec::new(policy, regime, rate, seed);
    spec.epochs = Some(epochs);
    run(cfg, &spec, &mut PlannerCache::new()).unwrap()
}

fn csv(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows, true).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn one_share_solve_per_epoch() {
    let r = go(&small(), PolicyKind::TwoStage, TdiRegime::Low, 10.0, 1, 3);
    assert_eq!(r.stage1_solves, 3);
    assert_eq!(r.epochs.len(), 3);
    for e in &r.epochs {
        assert_eq!(e.budget.iter().sum::<usize>(), 25);
        assert!(e.tdi.0.iter().all(|k| (0.0..0.5).contains(k)));
    }
}

#[test]
fn equal_split_skips_the_share_solve() {
    let r = go(&small(), PolicyKind::EqualSplit, TdiRegime::High, 10.0, 1, 2);
    assert_eq!(r.stage1_solves, 0);
    for e in &r.epochs {
        assert_eq!(e.shares.epsilon, [0.25; 4]);
        // 25 RBs in quarters: one subregion takes the leftover
        let mut b = e.budget;
        b.sort();
        assert_eq!(b, [6, 6, 6, 7]);
    }
}

#[test]
fn same_seed_same_output() {
    let cfg = small();
    for policy in [PolicyKind::TwoStage, PolicyKind::FullOptimal, PolicyKind::Random] {
        let a = SweepRow::from_reports(&[go(&cfg, policy, TdiRegime::High, 20.0, 42, 1)]);
        let b = SweepRow::from_reports(&[go(&cfg, policy, TdiRegime::High, 20.0, 42, 1)]);
        let c = SweepRow::from_reports(&[go(&cfg, policy, TdiRegime::High, 20.0, 43, 1)]);
        assert_eq!(csv(&[a.clone()]), csv(&[b]));
        assert_ne!(csv(&[a]), csv(&[c]));
    }
}

#[test]
fn single_cell_sweep_is_a_direct_run() {
    let cfg = small();
    let spec = SweepSpec {
        policies: vec![PolicyKind::TwoStage],
        regimes: vec![TdiRegime::Low],
        rates: vec![15.0],
        reps: 1,
        base_seed: 8,
        epochs: Some(2),
    };
    let rows = sweep(&cfg, &spec, &mut PlannerCache::new(), |_, _| {}).unwrap();
    let direct = SweepRow::from_reports(&[go(&cfg, PolicyKind::TwoStage, TdiRegime::Low, 15.0, 8, 2)]);
    assert_eq!(csv(&rows), csv(&[direct]));
}

#[test]
fn readouts_respect_capacity() {
    let cfg = small();
    for policy in [PolicyKind::TwoStage, PolicyKind::Random] {
        let r = go(&cfg, policy, TdiRegime::High, 30.0, 2, 1);
        let q = r.mean_queue().unwrap();
        assert!((0.0..=cfg.queue.capacity as f64).contains(&q));
        let o = r.overflow_frac().unwrap();
        assert!((0.0..=1.0).contains(&o));
        let p = r.mean_prr().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn no_arrivals_no_queue() {
    let r = go(&small(), PolicyKind::Random, TdiRegime::Low, 0.0, 3, 1);
    assert_eq!(r.mean_queue(), Some(0.0));
    assert_eq!(r.overflow_frac(), Some(0.0));
}

#[test]
fn pinned_densities_are_used() {
    let mut cfg = small();
    cfg.sim.pinned_tdi = Some([0.1, 0.2, 1.0, 1.9]);
    let r = go(&cfg, PolicyKind::Random, TdiRegime::Low, 5.0, 3, 2);
    assert!(r.epochs.iter().all(|e| e.tdi.0 == [0.1, 0.2, 1.0, 1.9]));
    assert!(r.epochs.iter().all(|e| e.shares.epsilon[2] == e.shares.epsilon.iter().cloned().fold(0.0, f64::max)));
}

#[test]
fn shared_planning_reuses_tables_across_runs() {
    let mut cfg = small();
    cfg.stage2.planning = PlanningMode::Shared;
    let mut cache = PlannerCache::new();
    let mut spec = RunSpec::new(PolicyKind::TwoStage, TdiRegime::Low, 10.0, 5);
    spec.epochs = Some(2);
    run(&cfg, &spec, &mut cache).unwrap();
    let built = cache.builds;
    assert!(built > 0);
    let again = run(&cfg, &spec, &mut cache).unwrap();
    assert_eq!(cache.builds, built);
    assert_eq!(again.planner_builds, 0);
}

#[test]
fn warm_start_table_is_accepted() {
    let cfg = small();
    let first = go(&cfg, PolicyKind::TwoStage, TdiRegime::Low, 10.0, 6, 1);
    let mut spec = RunSpec::new(PolicyKind::TwoStage, TdiRegime::Low, 10.0, 6);
    spec.epochs = Some(1);
    let shape = Shape { n_nds: 1, n_ds: 1, n_rbs: 1 };
    let set = regime_scenarios(TdiRegime::Low, shape, 20, &cfg, &mut stream(1, &[1]));
    let planner = build_planner(TableKind::Reduced, shape, &set, 10.0, None, &cfg, None).unwrap();
    spec.warm_start = Some(ValueTable::from_text(&planner.value_table().to_text()).unwrap());
    let warm = run(&cfg, &spec, &mut PlannerCache::new()).unwrap();
    // a warm start changes where value iteration begins, not what it converges to
    let (a, b) = (first.mean_delay().unwrap(), warm.mean_delay().unwrap());
    assert!((a - b).abs() <= 0.05 * a, "{a} vs {b}");
}

#[test]
fn dual_updates_run_per_epoch() {
    let mut cfg = small();
    cfg.stage2.planning = PlanningMode::PerEpoch;
    cfg.stage2.dual_step = 0.5;
    let r = go(&cfg, PolicyKind::TwoStage, TdiRegime::High, 20.0, 4, 3);
    assert_eq!(r.epochs.len(), 3);
    assert!(r.mean_delay().unwrap() > 0.0);
}

#[test]
fn zero_epochs_is_an_error() {
    let mut spec = RunSpec::new(PolicyKind::Random, TdiRegime::Low, 5.0, 1);
    spec.epochs = Some(0);
    assert!(run(&small(), &spec, &mut PlannerCache::new()).is_err());
}
