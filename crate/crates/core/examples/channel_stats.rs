//! Empirical moments of the per-slot channel gain against the closed form
//! E|H|^2 = L * N_T, and the lag-1 autocorrelation of consecutive draws.

use v2x_twostage::channel::{fading_power, large_scale_gain};
use v2x_twostage::model::ScenarioConfig;
use v2x_twostage::rng::stream;

pub struct ChannelStats {
    pub expected: f64,
    pub mean: f64,
    pub std_error: f64,
    pub lag1: f64,
}

pub fn run_example(draws: usize, seed: u64) -> ChannelStats {
    let cfg = ScenarioConfig::default();
    let n_tx = cfg.radio.n_tx_antennas;
    let l = large_scale_gain(25.0, 0.0, &cfg);
    let mut rng = stream(seed, &[7]);
    let xs: Vec<f64> = (0..draws).map(|_| l * fading_power(n_tx, &mut rng)).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let cov = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (n - 1.0);
    ChannelStats { expected: l * n_tx as f64, mean, std_error: (var / n).sqrt(), lag1: cov / var }
}

#[allow(dead_code)]
fn main() {
    let s = run_example(100_000, 1);
    println!("E|H|^2 closed form {:.4e}, sample {:.4e} +- {:.1e}", s.expected, s.mean, s.std_error);
    println!("z = {:.2}, lag-1 autocorrelation {:.4}", (s.mean - s.expected) / s.std_error, s.lag1);
}
