use proptest::prelude::*;

use v2x_twostage::channel::{ChannelRealization, LinkGains};
use v2x_twostage::mobility::{greenshield_flow, greenshield_speed, TdiVector};
use v2x_twostage::model::{
    action_count, enumerate_feasible_actions, validate_allocation, AllocationMatrix, LeftoverMode, LinkClass,
    ScenarioConfig, Subregion,
};
use v2x_twostage::metrics::{prr, rate_nds};
use v2x_twostage::oracle::{toy_instance, ToyParams};
use v2x_twostage::queue::step_queue;
use v2x_twostage::sim::{budget_rbs, rb_ranges};
use v2x_twostage::stage1::{allocate_shares, kkt_residuals, utility_sum, UtilityParams};
use v2x_twostage::stage2::RviOptions;

fn params() -> UtilityParams {
    UtilityParams::from_config(&ScenarioConfig::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn queue_stays_in_bounds(cap in 1u32..20, steps in prop::collection::vec((0u32..30, 0u32..30), 1..200)) {
        let mut q = 0;
        for (mu, a) in steps {
            q = step_queue(q, mu, a, cap);
            prop_assert!(q <= cap);
        }
    }

    #[test]
    fn queue_monotone_without_service_or_arrivals(cap in 1u32..20, q0 in 0u32..20, xs in prop::collection::vec(0u32..5, 1..50)) {
        let q0 = q0.min(cap);
        let mut up = q0;
        let mut down = q0;
        for x in xs {
            let next_up = step_queue(up, 0, x, cap);
            let next_down = step_queue(down, x, 0, cap);
            prop_assert!(next_up >= up);
            prop_assert!(next_down <= down);
            up = next_up;
            down = next_down;
        }
    }

    #[test]
    fn flow_is_density_times_speed(k in 0.0f64..=2.0) {
        prop_assert_eq!(greenshield_flow(k, 15.0, 2.0), k * greenshield_speed(k, 15.0, 2.0));
    }

    #[test]
    fn shares_are_a_kkt_point(k in prop::array::uniform4(0.0f64..2.0)) {
        let p = params();
        let tdi = TdiVector(k);
        let s = allocate_shares(&tdi, &p);
        let sum: f64 = s.epsilon.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(s.epsilon.iter().all(|&e| e >= 0.0));
        prop_assert!(s.active_count >= 1);
        let (stat, slack) = kkt_residuals(&tdi, &s, &p);
        prop_assert!(stat <= 1e-9 && slack <= 1e-9, "residuals {stat} {slack}");
    }

    #[test]
    fn shares_beat_random_feasible_points(k in prop::array::uniform4(0.0f64..2.0), raw in prop::collection::vec(prop::array::uniform4(0.0f64..1.0), 50)) {
        let p = params();
        let tdi = TdiVector(k);
        let best = utility_sum(&tdi, &allocate_shares(&tdi, &p).epsilon, &p);
        for r in raw {
            let t: f64 = r.iter().sum();
            if t == 0.0 {
                continue;
            }
            let e = r.map(|x| x / t);
            prop_assert!(best >= utility_sum(&tdi, &e, &p) - 1e-9);
        }
    }

    #[test]
    fn density_nearer_half_jam_never_gets_less(k in prop::array::uniform4(0.0f64..2.0)) {
        let s = allocate_shares(&TdiVector(k), &params());
        for i in 0..4 {
            for j in 0..4 {
                if (k[i] - 1.0).abs() < (k[j] - 1.0).abs() {
                    prop_assert!(s.epsilon[i] >= s.epsilon[j], "{k:?} -> {:?}", s.epsilon);
                }
            }
        }
    }

    #[test]
    fn budgets_conserve_and_never_overlap(raw in prop::array::uniform4(0.0f64..1.0), total in 1usize..60) {
        let t: f64 = raw.iter().sum();
        prop_assume!(t > 0.0);
        let shares = raw.map(|x| x / t);
        let strict = budget_rbs(&shares, total, LeftoverMode::StrictFloor);
        prop_assert!(strict.iter().sum::<usize>() <= total);
        let b = budget_rbs(&shares, total, LeftoverMode::LargestRemainder);
        prop_assert_eq!(b.iter().sum::<usize>(), total);
        let ranges = rb_ranges(&b);
        let mut owner = vec![None; total];
        for (s, r) in ranges.iter().enumerate() {
            for rb in r.clone() {
                prop_assert!(owner[rb].is_none());
                owner[rb] = Some(s);
            }
        }
    }

    #[test]
    fn prr_in_unit_interval_and_falls_with_threshold(
        gains in prop::collection::vec(1e-14f64..1e-8, 1..6),
        interferer in 0.0f64..1e-9,
        th in 0.1f64..100.0,
        extra in 0.0f64..100.0,
    ) {
        let ch = ChannelRealization {
            n_rbs: 1,
            n_nds: 1,
            links: vec![
                LinkGains { class: LinkClass::NonDelaySensitive, to_bs: vec![interferer], to_neighbors: vec![] },
                LinkGains { class: LinkClass::DelaySensitive, to_bs: vec![1e-10], to_neighbors: vec![gains] },
            ],
        };
        let rb = [Some(0), Some(0)];
        let mut cfg = ScenarioConfig::default();
        cfg.qos.sinr_threshold = th;
        let lo = prr(1, &rb, &ch, &cfg);
        cfg.qos.sinr_threshold = th + extra;
        let hi = prr(1, &rb, &ch, &cfg);
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi <= lo);
    }

    #[test]
    fn nds_rate_rises_with_own_gain_and_falls_with_interference(
        own in 1e-14f64..1e-8,
        bump in 1.0f64..10.0,
        worst in 1e-14f64..1e-8,
    ) {
        let build = |own: f64, worst: f64| ChannelRealization {
            n_rbs: 1,
            n_nds: 1,
            links: vec![
                LinkGains { class: LinkClass::NonDelaySensitive, to_bs: vec![own], to_neighbors: vec![] },
                LinkGains { class: LinkClass::DelaySensitive, to_bs: vec![1e-10], to_neighbors: vec![vec![worst, worst / 2.0]] },
            ],
        };
        let cfg = ScenarioConfig::default();
        let rb = [Some(0), Some(0)];
        let base = rate_nds(0, &rb, &build(own, worst), &cfg);
        prop_assert!(rate_nds(0, &rb, &build(own * bump, worst), &cfg) >= base);
        prop_assert!(rate_nds(0, &rb, &build(own, worst * bump), &cfg) <= base);
    }
}

#[test]
fn enumerator_and_validator_agree_exhaustively() {
    for n_rbs in 0..=3 {
        for n_nds in 0..=3 {
            for n_ds in 0..=3 {
                let sub = Subregion::new(1, n_nds, n_ds, n_rbs);
                let actions = enumerate_feasible_actions(&sub, 1 << 20).unwrap();
                assert_eq!(actions.len() as u128, action_count(&sub));
                assert!(actions.iter().all(|a| validate_allocation(a, &sub).unwrap()));
                // every valid matrix is generated: count valid matrices by brute force
                let cells = n_rbs * (n_nds + n_ds);
                if cells <= 16 {
                    let mut valid = 0;
                    for bits in 0u32..(1 << cells) {
                        let mut m = AllocationMatrix::zeros(n_rbs, n_nds + n_ds);
                        for c in 0..cells {
                            m.set(c / (n_nds + n_ds), c % (n_nds + n_ds), bits >> c & 1 == 1);
                        }
                        if validate_allocation(&m, &sub).unwrap() {
                            valid += 1;
                        }
                    }
                    assert_eq!(valid, actions.len(), "{n_nds} {n_ds} {n_rbs}");
                }
                for (bigger, label) in [
                    (Subregion::new(1, n_nds, n_ds, n_rbs + 1), "rbs"),
                    (Subregion::new(1, n_nds + 1, n_ds, n_rbs), "nds"),
                    (Subregion::new(1, n_nds, n_ds + 1, n_rbs), "ds"),
                ] {
                    assert!(action_count(&bigger) >= action_count(&sub), "{label}");
                }
            }
        }
    }
}

#[test]
fn flow_peaks_at_half_jam_and_is_concave() {
    let n = 2000;
    let h = 2.0 / n as f64;
    let f: Vec<f64> = (0..=n).map(|i| greenshield_flow(i as f64 * h, 15.0, 2.0)).collect();
    let arg = (0..=n).max_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
    assert_eq!(arg, n / 2);
    for i in 1..n {
        assert!(f[i - 1] - 2.0 * f[i] + f[i + 1] <= 1e-12);
    }
}

#[test]
fn value_iteration_residuals_never_grow() {
    let toy = toy_instance(ToyParams::default());
    let opts = RviOptions { tolerance: 1e-10, max_iterations: 100_000, evaluation_sweeps: 0 };
    for mdp in [toy.full_mdp(), toy.reduced_mdp()] {
        let sol = mdp.solve(&opts, None).unwrap();
        assert!(sol.residuals.len() > 2);
        for w in sol.residuals.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn transition_rows_sum_to_one() {
    let toy = toy_instance(ToyParams::default());
    for mdp in [toy.full_mdp(), toy.reduced_mdp()] {
        assert!(mdp.max_row_deviation() <= 1e-9);
    }
}
