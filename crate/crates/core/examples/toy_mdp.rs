//! The scheduling MDP on toy instances: value iteration against exhaustive
//! policy search and the LP, and the queue-only model against the full one.

use v2x_twostage::oracle::{mdp_oracle_check, MdpCheck};

pub fn run_example() -> MdpCheck {
    mdp_oracle_check().expect("toy instances solve")
}

#[allow(dead_code)]
fn main() {
    let m = run_example();
    println!("{} policies enumerated", m.policies_enumerated);
    println!("capacity 1: rvi {:.9} enumeration {:.9} lp {:.9}", m.small_rvi_theta, m.small_enumerated_theta, m.small_lp_theta);
    println!("capacity 2: rvi {:.9} lp {:.9}", m.full_theta, m.lp_theta);
    println!(
        "queue-only model {:.6} (relative gap {:.3}); online rule run on the full chain {:.6}",
        m.reduced_theta,
        m.reduced_relative_gap(),
        m.deployed_reduced_cost
    );
    println!("deterministic channel gaps: theta {:e}, values {:e}", m.deterministic_theta_gap, m.deterministic_value_gap);
}
