//! Greenshield speed and flow over the density range, with the density of
//! maximum flow located numerically.

use v2x_twostage::mobility::{greenshield_flow, greenshield_speed};
use v2x_twostage::model::ScenarioConfig;

pub struct Curve {
    pub points: Vec<(f64, f64, f64)>,
    pub peak_density: f64,
}

pub fn run_example() -> Curve {
    let cfg = ScenarioConfig::default();
    let (vf, kj) = (cfg.traffic.v_free, cfg.traffic.kappa_jam);
    let points: Vec<_> = (0..=40)
        .map(|i| {
            let k = kj * i as f64 / 40.0;
            (k, greenshield_speed(k, vf, kj), greenshield_flow(k, vf, kj))
        })
        .collect();
    let peak_density = points.iter().max_by(|a, b| a.2.total_cmp(&b.2)).map(|p| p.0).unwrap_or(0.0);
    Curve { points, peak_density }
}

#[allow(dead_code)]
fn main() {
    let c = run_example();
    println!("kappa,speed_m_s,flow");
    for (k, v, q) in &c.points {
        println!("{k:.3},{v:.3},{q:.4}");
    }
    eprintln!("flow peaks at kappa = {}", c.peak_density);
}
