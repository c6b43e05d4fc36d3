//! Closed-form RB shares for a handful of density vectors, checked against
//! the projected-gradient reference solver.

use v2x_twostage::mobility::TdiVector;
use v2x_twostage::model::ScenarioConfig;
use v2x_twostage::oracle::projected_gradient_shares;
use v2x_twostage::stage1::{allocate_shares, kkt_residuals, ShareVector, UtilityParams};

pub fn run_example() -> Vec<(TdiVector, ShareVector, f64)> {
    let p = UtilityParams::from_config(&ScenarioConfig::default());
    let inputs = [
        [0.5, 0.5, 0.5, 0.5],
        [0.1, 0.2, 0.3, 0.4],
        [1.2, 0.8, 1.0, 0.9],
        [0.0, 0.0, 0.05, 1.1],
    ];
    inputs
        .into_iter()
        .map(|k| {
            let tdi = TdiVector(k);
            let s = allocate_shares(&tdi, &p);
            let reference = projected_gradient_shares(&tdi, &p, 1e-14, 200_000);
            let gap = s.epsilon.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (tdi, s, gap)
        })
        .collect()
}

#[allow(dead_code)]
fn main() {
    let p = UtilityParams::from_config(&ScenarioConfig::default());
    for (tdi, s, gap) in run_example() {
        let (stat, slack) = kkt_residuals(&tdi, &s, &p);
        println!(
            "kappa {:?} -> eps {:.4?} (M = {}, omega = {:.4}); reference gap {gap:.1e}, KKT {stat:.1e}/{slack:.1e}",
            tdi.0, s.epsilon, s.active_count, s.multiplier
        );
    }
}
