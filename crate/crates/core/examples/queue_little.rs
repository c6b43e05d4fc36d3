//! A single queue with Poisson arrivals and random service: Little's-law
//! delay from the mean length against tracked per-packet sojourn times.

use rand::Rng;
use v2x_twostage::model::ArrivalKind;
use v2x_twostage::queue::{little_fixture, ArrivalProcess, LittleReadout};
use v2x_twostage::rng::stream;

pub fn run_example(slots: u64) -> LittleReadout {
    let slot = 0.001;
    let arrivals = ArrivalProcess::new(ArrivalKind::Poisson, 300.0, slot);
    let mut rng = stream(11, &[1]);
    let mut service = |r: &mut rand_chacha::ChaCha8Rng| u32::from(r.gen::<f64>() < 0.5);
    little_fixture(&arrivals, &mut service, 1000, slot, slots, slots / 10, &mut rng)
}

#[allow(dead_code)]
fn main() {
    let r = run_example(1_000_000);
    println!("mean queue {:.4} packets", r.mean_queue);
    println!("Little delay {:.6} s, sojourn delay {:.6} s", r.little_delay, r.sojourn_delay);
    println!("{} delivered, {} dropped", r.delivered, r.dropped);
}
