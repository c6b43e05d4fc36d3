//! Canned oracle comparisons shared by the `oracle-check` verb and the
//! acceptance tests.

use crate::error::SolveError;
use crate::mobility::{sample_tdi, TdiRegime};
use crate::rng::stream;
use crate::stage1::{allocate_shares, utility_sum, UtilityParams};
use crate::stage2::{RviOptions, ScenarioMdp};

use super::mdp::{dense, enumerate_policies, policy_gain, lp_average_cost, toy_instance, ToyParams};
use super::stage1::projected_gradient_shares;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage1Check {
    pub draws: usize,
    pub max_share_error: f64,
    pub max_utility_error: f64,
}

/// Closed-form shares against projected gradient on `draws` densities per
/// regime.
pub fn stage1_oracle_check(draws: usize, seed: u64, p: &UtilityParams) -> Stage1Check {
    let mut out = Stage1Check { draws: 0, max_share_error: 0.0, max_utility_error: 0.0 };
    for (ri, regime) in [TdiRegime::Low, TdiRegime::High].into_iter().enumerate() {
        let mut rng = stream(seed, &[0x51, ri as u64]);
        for _ in 0..draws {
            let tdi = sample_tdi(regime, &mut rng);
            let closed = allocate_shares(&tdi, p).epsilon;
            let pg = projected_gradient_shares(&tdi, p, 1e-14, 200_000);
            let de = closed.iter().zip(&pg).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let du = (utility_sum(&tdi, &closed, p) - utility_sum(&tdi, &pg, p)).abs();
            out.max_share_error = out.max_share_error.max(de);
            out.max_utility_error = out.max_utility_error.max(du);
            out.draws += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdpCheck {
    /// Capacity-1 instance: value iteration against exhaustive search.
    pub small_rvi_theta: f64,
    pub small_enumerated_theta: f64,
    pub small_lp_theta: f64,
    pub policies_enumerated: u64,
    /// Capacity-2 instance: value iteration against the LP optimum.
    pub full_theta: f64,
    pub lp_theta: f64,
    pub reduced_theta: f64,
    /// Long-run cost of the online rule that pairs the reduced values with
    /// the current channel, evaluated exactly on the full-state chain.
    pub deployed_reduced_cost: f64,
    /// Deterministic channel: largest gap between the two solvers.
    pub deterministic_theta_gap: f64,
    pub deterministic_value_gap: f64,
}

impl MdpCheck {
    pub fn reduced_relative_gap(&self) -> f64 {
        (self.reduced_theta - self.full_theta).abs() / self.full_theta.abs()
    }
}

fn rvi(mdp: &ScenarioMdp) -> Result<crate::stage2::RviSolution, SolveError> {
    mdp.solve(&RviOptions { tolerance: 1e-10, max_iterations: 1_000_000, evaluation_sweeps: 0 }, None)
}

/// Runs the toy-instance comparisons. The capacity-1 instance has one
/// 2-level gain, small enough (8 states, 4 actions) for every stationary
/// deterministic policy to be tried; the capacity-2 instance has both gains
/// at 2 levels and is checked against the occupation-measure LP.
pub fn mdp_oracle_check() -> Result<MdpCheck, SolveError> {
    let small = toy_instance(ToyParams { capacity: 1, nds_levels: 2, ds_levels: 1, arrival_prob: 0.3 });
    let small_full = small.full_mdp();
    let small_rvi = rvi(&small_full)?;
    let (small_enum, _, policies) =
        enumerate_policies(&small_full, 1 << 20).ok_or_else(|| SolveError::Lp("enumeration limit exceeded".into()))?;
    let small_lp = lp_average_cost(&small_full)?;

    let toy = toy_instance(ToyParams::default());
    let full = rvi(&toy.full_mdp())?;
    let lp = lp_average_cost(&toy.full_mdp())?;
    let reduced_mdp = toy.reduced_mdp();
    let reduced = rvi(&reduced_mdp)?;
    let deployed = deployed_cost(&toy.full_mdp(), &reduced_mdp, &reduced.phi);

    let det = toy_instance(ToyParams { nds_levels: 1, ds_levels: 1, ..ToyParams::default() });
    let df = rvi(&det.full_mdp())?;
    let dr = rvi(&det.reduced_mdp())?;
    let value_gap = df.values.iter().zip(&dr.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    Ok(MdpCheck {
        small_rvi_theta: small_rvi.theta,
        small_enumerated_theta: small_enum,
        small_lp_theta: small_lp,
        policies_enumerated: policies,
        full_theta: full.theta,
        lp_theta: lp,
        reduced_theta: reduced.theta,
        deployed_reduced_cost: deployed,
        deterministic_theta_gap: (df.theta - dr.theta).abs(),
        deterministic_value_gap: value_gap,
    })
}

/// Average cost, from the empty queues, of choosing in every full state the
/// action minimizing current channel cost plus the reduced model's expected
/// post-decision value.
pub fn deployed_cost(full: &ScenarioMdp, reduced: &ScenarioMdp, phi: &[f64]) -> f64 {
    let space = &full.space;
    let n = space.size();
    let mut policy = Vec::with_capacity(full.n_states());
    for s in 0..full.n_scenarios() {
        for x in 0..n {
            let q = space.decode(x);
            let mut best = (f64::INFINITY, 0);
            for a in 0..full.n_actions {
                let fut: f64 = reduced.outcomes[0][a].iter().map(|o| o.prob * phi[space.drained(&q, &o.departures)]).sum();
                let v = full.cost[s][a] + fut;
                if v < best.0 {
                    best = (v, a);
                }
            }
            policy.push(best.1);
        }
    }
    let g = policy_gain(&dense(full), &policy);
    full.weights.iter().enumerate().map(|(s, &w)| w * g[s * n]).sum()
}
