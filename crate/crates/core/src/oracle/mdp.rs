use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};

use crate::channel::{fading_levels, ChannelRealization, LinkGains};
use crate::error::SolveError;
use crate::model::{ArrivalKind, LinkClass, ScenarioConfig};
use crate::queue::ArrivalProcess;
use crate::stage2::{
    action_list, build_full_mdp, build_reduced_mdp, evaluate_scenarios, CostModel, LagrangeMultipliers, QueueSpace,
    ScenarioMdp, ScenarioSet, Shape,
};

/// One non-delay-sensitive link and one delay-sensitive broadcaster with a
/// single neighbour sharing one RB. The two gains that matter (uplink to the
/// base station and broadcaster to neighbour) are quantized to equiprobable
/// levels; everything else is fixed.
#[derive(Debug, Clone)]
pub struct ToyInstance {
    pub cfg: ScenarioConfig,
    pub shape: Shape,
    pub set: ScenarioSet,
    pub model: CostModel,
    pub arrivals: ArrivalProcess,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyParams {
    pub capacity: u32,
    /// Levels for the uplink gain; 1 keeps it at its mean.
    pub nds_levels: usize,
    /// Levels for the broadcast gain; 1 keeps it at its mean.
    pub ds_levels: usize,
    /// Per-slot Bernoulli arrival probability of both links.
    pub arrival_prob: f64,
}

impl Default for ToyParams {
    fn default() -> Self {
        Self { capacity: 2, nds_levels: 2, ds_levels: 2, arrival_prob: 0.3 }
    }
}

pub fn toy_config(capacity: u32) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.radio.noise_power = 1.0;
    cfg.radio.tx_power = 1.0;
    cfg.qos.sinr_threshold = 3.0;
    cfg.qos.prr_floor = 0.9;
    cfg.qos.rate_floor = 0.0;
    cfg.queue.capacity = capacity;
    cfg.queue.packet_size_ds = 20;
    cfg.queue.packet_size_nds = 40;
    cfg.queue.arrivals = ArrivalKind::Bernoulli;
    let m = &mut cfg.stage2.multipliers;
    m.alpha = 0.5;
    m.beta = 0.2;
    m.gamma = 1e-7;
    m.eta = 0.5;
    m.lambda = 0.0;
    cfg
}

pub fn toy_instance(p: ToyParams) -> ToyInstance {
    let cfg = toy_config(p.capacity);
    let n_tx = cfg.radio.n_tx_antennas;
    let (l_up, l_bc) = (2.0, 5.0);
    let up = fading_levels(n_tx, p.nds_levels);
    let bc = fading_levels(n_tx, p.ds_levels);
    let mut channels = Vec::new();
    let mut weights = Vec::new();
    for &gu in &up {
        for &gb in &bc {
            channels.push(ChannelRealization {
                n_rbs: 1,
                n_nds: 1,
                links: vec![
                    LinkGains { class: LinkClass::NonDelaySensitive, to_bs: vec![l_up * gu], to_neighbors: vec![] },
                    LinkGains { class: LinkClass::DelaySensitive, to_bs: vec![l_up], to_neighbors: vec![vec![l_bc * gb]] },
                ],
            });
            weights.push(1.0 / (up.len() * bc.len()) as f64);
        }
    }
    let slot = cfg.timing.slot_duration;
    let rate = p.arrival_prob / slot;
    let mut model = CostModel::from_config(1, 1, rate, &cfg);
    model.multipliers = LagrangeMultipliers::from_config(1, 1, &cfg);
    ToyInstance {
        arrivals: ArrivalProcess::new(ArrivalKind::Bernoulli, rate, slot),
        shape: Shape { n_nds: 1, n_ds: 1, n_rbs: 1 },
        set: ScenarioSet { weights, channels },
        model,
        cfg,
    }
}

impl ToyInstance {
    fn parts(&self) -> (crate::stage2::EvaluatedScenarios, QueueSpace, Vec<Vec<f64>>) {
        let actions = action_list(self.shape, self.cfg.stage2.action_cap).expect("toy action space is tiny");
        let ev = evaluate_scenarios(&self.set, &actions, &self.model, &self.cfg);
        let space = QueueSpace::new(self.shape.n_links(), self.model.capacity);
        let pmfs = vec![self.arrivals.pmf(self.model.capacity); self.shape.n_links()];
        (ev, space, pmfs)
    }

    pub fn full_mdp(&self) -> ScenarioMdp {
        let (ev, space, pmfs) = self.parts();
        build_full_mdp(&ev, space, &self.model, pmfs)
    }

    pub fn reduced_mdp(&self) -> ScenarioMdp {
        let (ev, space, pmfs) = self.parts();
        build_reduced_mdp(&ev, space, &self.model, pmfs).0
    }
}

/// Dense transition law and stage costs of a scenario MDP over states
/// `(scenario, queue)`, scenario-major.
pub struct DenseMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `p[(i * n_actions + a) * n_states + j]`.
    pub p: Vec<f64>,
    /// `c[i * n_actions + a]`.
    pub c: Vec<f64>,
}

pub fn dense(mdp: &ScenarioMdp) -> DenseMdp {
    let space = &mdp.space;
    let nq = space.size();
    let ns = mdp.n_scenarios();
    let n = ns * nq;
    let na = mdp.n_actions;
    let nl = space.n_links;
    let cap = space.capacity as usize;
    let mut p = vec![0.0; n * na * n];
    let mut c = vec![0.0; n * na];
    let mut q = vec![0u32; nl];
    let mut y = vec![0u32; nl];
    for s in 0..ns {
        for x in 0..nq {
            space.decode_into(x, &mut q);
            let i = s * nq + x;
            for a in 0..na {
                c[i * na + a] = mdp.queue_cost[x] + mdp.cost[s][a];
                let row = &mut p[(i * na + a) * n..(i * na + a + 1) * n];
                for o in &mdp.outcomes[s][a] {
                    for l in 0..nl {
                        y[l] = q[l].saturating_sub(o.departures[l]);
                    }
                    // enumerate every arrival vector
                    for xp in 0..nq {
                        let next = space.decode(xp);
                        let mut pr = o.prob;
                        for l in 0..nl {
                            let pmf = &mdp.arrival_pmfs[l];
                            let (yl, nl_) = (y[l] as usize, next[l] as usize);
                            let mass = if nl_ < yl {
                                0.0
                            } else if nl_ < cap {
                                pmf.get(nl_ - yl).copied().unwrap_or(0.0)
                            } else {
                                pmf.iter().skip(cap - yl).sum()
                            };
                            pr *= mass;
                        }
                        if pr == 0.0 {
                            continue;
                        }
                        for (sp, &w) in mdp.weights.iter().enumerate() {
                            row[sp * nq + xp] += pr * w;
                        }
                    }
                }
            }
        }
    }
    DenseMdp { n_states: n, n_actions: na, p, c }
}

fn mat_mul(a: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
}

/// Long-run average cost of a stationary deterministic policy from each
/// start state, through the Cesàro limit of the lazy chain `(I + P)/2`.
pub fn policy_gain(d: &DenseMdp, policy: &[usize]) -> Vec<f64> {
    let n = d.n_states;
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        let a = policy[i];
        let row = &d.p[(i * d.n_actions + a) * n..(i * d.n_actions + a + 1) * n];
        for j in 0..n {
            m[i * n + j] = 0.5 * row[j];
        }
        m[i * n + i] += 0.5;
    }
    let mut tmp = vec![0.0; n * n];
    for _ in 0..48 {
        mat_mul(&m, &m, n, &mut tmp);
        // without this the row-sum error doubles with every squaring
        for row in tmp.chunks_mut(n) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
        std::mem::swap(&mut m, &mut tmp);
    }
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * d.c[j * d.n_actions + policy[j]]).sum())
        .collect()
}

/// Optimal average cost by exhaustive search over every stationary
/// deterministic policy, reported for a start in the empty queue state
/// averaged over scenarios. Returns `(theta, best policy, policies tried)`.
pub fn enumerate_policies(mdp: &ScenarioMdp, limit: u64) -> Option<(f64, Vec<usize>, u64)> {
    let d = dense(mdp);
    let n = d.n_states;
    let na = d.n_actions as u64;
    let count = na.checked_pow(n as u32)?;
    if count > limit {
        return None;
    }
    let nq = mdp.space.size();
    let mut policy = vec![0usize; n];
    let mut best = (f64::INFINITY, policy.clone());
    for code in 0..count {
        let mut c = code;
        for slot in policy.iter_mut() {
            *slot = (c % na) as usize;
            c /= na;
        }
        let g = policy_gain(&d, &policy);
        let start: f64 = mdp.weights.iter().enumerate().map(|(s, &w)| w * g[s * nq]).sum();
        if start < best.0 {
            best = (start, policy.clone());
        }
    }
    Some((best.0, best.1, count))
}

/// Optimal average cost from the occupation-measure linear program
/// min Σ c x  s.t.  Σ_a x(j,a) = Σ_{i,a} P(j|i,a) x(i,a),  Σ x = 1,  x ≥ 0.
/// Its optimum is attained at a vertex, i.e. by a stationary deterministic
/// policy, so it equals the enumeration optimum for unichain models.
pub fn lp_average_cost(mdp: &ScenarioMdp) -> Result<f64, SolveError> {
    let d = dense(mdp);
    let n = d.n_states;
    let na = d.n_actions;
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n * na).map(|k| lp.add_var(d.c[k], (0.0, f64::INFINITY))).collect();
    // one balance row is implied by the others and the normalisation
    for j in 0..n.saturating_sub(1) {
        let mut coef = vec![0.0; n * na];
        for a in 0..na {
            coef[j * na + a] += 1.0;
        }
        for i in 0..n {
            for a in 0..na {
                coef[i * na + a] -= d.p[(i * na + a) * n + j];
            }
        }
        let terms: Vec<_> = coef.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(k, &c)| (vars[k], c)).collect();
        lp.add_constraint(terms, ComparisonOp::Eq, 0.0);
    }
    lp.add_constraint(vars.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
    match lp.solve() {
        Ok(SolveOutcome::Solution(sol)) => Ok(sol.objective()),
        Ok(other) => Err(SolveError::Lp(format!("{other:?}"))),
        Err(e) => Err(SolveError::Lp(e.to_string())),
    }
}
