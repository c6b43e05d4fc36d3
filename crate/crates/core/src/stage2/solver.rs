use std::collections::{BTreeMap, HashMap};

use crate::channel::ChannelRealization;
use crate::error::SolveError;
use crate::model::ScenarioConfig;

use super::cost::{ActionCells, CostModel, PairTable};
use super::space::QueueSpace;

/// A possible departure vector of an action and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub departures: Vec<u32>,
    pub prob: f64,
}

/// Average-cost MDP whose state is `(scenario, queue vector)`. Scenarios are
/// i.i.d. across slots with weights `weights`; in scenario `s` action `a`
/// costs `cost[s][a]` on top of the state cost and drains the queues by one
/// of `outcomes[s][a]`, after which arrivals are added.
///
/// A single scenario with random outcomes is the channel-averaged (QSI-only)
/// model; many scenarios with one outcome each is the full-state model.
#[derive(Debug, Clone)]
pub struct ScenarioMdp {
    pub space: QueueSpace,
    pub queue_cost: Vec<f64>,
    pub weights: Vec<f64>,
    pub n_actions: usize,
    pub cost: Vec<Vec<f64>>,
    pub outcomes: Vec<Vec<Vec<Outcome>>>,
    pub arrival_pmfs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RviOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Policy-evaluation sweeps after each Bellman sweep; 0 is plain
    /// relative value iteration.
    pub evaluation_sweeps: usize,
}

impl RviOptions {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            tolerance: cfg.stage2.rvi_tolerance,
            max_iterations: cfg.stage2.max_iterations,
            evaluation_sweeps: cfg.stage2.evaluation_sweeps,
        }
    }
}

impl Default for RviOptions {
    fn default() -> Self {
        Self { tolerance: 1e-6, max_iterations: 100_000, evaluation_sweeps: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct RviSolution {
    /// Midpoint of the final bracket `[lower, upper]` around the optimal
    /// average cost.
    pub theta: f64,
    pub lower: f64,
    pub upper: f64,
    /// Relative values, scenario-major; anchored so the channel-averaged
    /// value of the empty state is zero.
    pub values: Vec<f64>,
    /// Minimizing action per `(scenario, queue)` state.
    pub policy: Vec<u32>,
    /// Channel-averaged post-decision value: `phi[x] = E[V̄(min(cap, x + A))]`.
    pub phi: Vec<f64>,
    pub iterations: usize,
    /// Span residual after each sweep.
    pub residuals: Vec<f64>,
}

impl RviSolution {
    pub fn n_scenarios(&self, space: &QueueSpace) -> usize {
        self.values.len() / space.size()
    }

    /// Channel-averaged relative value of each queue state.
    pub fn averaged_values(&self, weights: &[f64], space: &QueueSpace) -> Vec<f64> {
        average_over_scenarios(&self.values, weights, space.size())
    }
}

fn average_over_scenarios(values: &[f64], weights: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (s, &w) in weights.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(&values[s * n..(s + 1) * n]) {
            *o += w * v;
        }
    }
    out
}

impl ScenarioMdp {
    pub fn n_scenarios(&self) -> usize {
        self.weights.len()
    }

    pub fn n_states(&self) -> usize {
        self.n_scenarios() * self.space.size()
    }

    /// Largest deviation of a scenario-action outcome law from summing to one.
    pub fn max_row_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for per_s in &self.outcomes {
            for outs in per_s {
                let t: f64 = outs.iter().map(|o| o.prob).sum();
                worst = worst.max((t - 1.0).abs());
            }
        }
        worst
    }

    fn compile(&self) -> Compiled {
        let n = self.space.size();
        let nl = self.space.n_links;
        let mut dep_index: HashMap<&[u32], u32> = HashMap::new();
        let mut dep_list: Vec<&[u32]> = Vec::new();
        let mut probs = Vec::new();
        let mut dep_ids = Vec::new();
        let mut groups = Vec::with_capacity(self.outcomes.len());
        let mut group_of = Vec::with_capacity(self.outcomes.len());
        for (s, per_a) in self.outcomes.iter().enumerate() {
            let mut by_law: HashMap<Vec<(u32, u64)>, usize> = HashMap::new();
            let mut gs: Vec<Group> = Vec::new();
            let mut member = vec![0usize; per_a.len()];
            for (a, outs) in per_a.iter().enumerate() {
                let law: Vec<(u32, u64)> = outs
                    .iter()
                    .map(|o| {
                        debug_assert_eq!(o.departures.len(), nl);
                        let id = *dep_index.entry(o.departures.as_slice()).or_insert_with(|| {
                            dep_list.push(o.departures.as_slice());
                            (dep_list.len() - 1) as u32
                        });
                        (id, o.prob.to_bits())
                    })
                    .collect();
                let c = self.cost[s][a];
                if let Some(&g) = by_law.get(&law) {
                    if c < gs[g].cost {
                        gs[g].cost = c;
                        gs[g].action = a as u32;
                    }
                    member[a] = g;
                    continue;
                }
                let start = probs.len();
                for &(id, p) in &law {
                    dep_ids.push(id);
                    probs.push(f64::from_bits(p));
                }
                by_law.insert(law, gs.len());
                member[a] = gs.len();
                gs.push(Group { action: a as u32, cost: c, start, end: probs.len() });
            }
            // scanning groups by their best action keeps the lowest-index
            // tie-break of a plain scan over actions
            let mut order: Vec<usize> = (0..gs.len()).collect();
            order.sort_by_key(|&g| gs[g].action);
            let mut pos = vec![0u32; gs.len()];
            for (p, &g) in order.iter().enumerate() {
                pos[g] = p as u32;
            }
            group_of.push(member.iter().map(|&g| pos[g]).collect());
            groups.push(order.into_iter().map(|g| gs[g].clone()).collect());
        }
        let mut q = vec![0u32; nl];
        let drain = dep_list
            .iter()
            .map(|d| {
                (0..n)
                    .map(|x| {
                        self.space.decode_into(x, &mut q);
                        self.space.drained(&q, d) as u32
                    })
                    .collect()
            })
            .collect();
        Compiled { groups, group_of, probs, dep_ids, drain }
    }

    /// One Bellman sweep from post-decision values `phi`, writing `T V` and
    /// the minimizing actions.
    pub fn bellman(&self, phi: &[f64], out: &mut [f64], policy: &mut [u32]) {
        let mut groups = vec![0u32; out.len()];
        self.bellman_compiled(&self.compile(), phi, out, policy, &mut groups);
    }

    fn bellman_compiled(&self, c: &Compiled, phi: &[f64], out: &mut [f64], policy: &mut [u32], chosen: &mut [u32]) {
        let n = self.space.size();
        for (s, gs) in c.groups.iter().enumerate() {
            let best = &mut out[s * n..(s + 1) * n];
            let arg = &mut policy[s * n..(s + 1) * n];
            let grp = &mut chosen[s * n..(s + 1) * n];
            best.iter_mut().for_each(|b| *b = f64::INFINITY);
            for (gi, g) in gs.iter().enumerate() {
                for x in 0..n {
                    let mut fut = 0.0;
                    for o in g.start..g.end {
                        fut += c.probs[o] * phi[c.drain[c.dep_ids[o] as usize][x] as usize];
                    }
                    let v = g.cost + fut;
                    if v < best[x] {
                        best[x] = v;
                        arg[x] = g.action;
                        grp[x] = gi as u32;
                    }
                }
            }
            for (b, qc) in best.iter_mut().zip(&self.queue_cost) {
                *b += qc;
            }
        }
    }

    /// `T_π V` for the policy recorded in `chosen`.
    fn evaluate_compiled(&self, c: &Compiled, phi: &[f64], out: &mut [f64], chosen: &[u32]) {
        let n = self.space.size();
        for (s, gs) in c.groups.iter().enumerate() {
            for x in 0..n {
                let g = &gs[chosen[s * n + x] as usize];
                let mut fut = 0.0;
                for o in g.start..g.end {
                    fut += c.probs[o] * phi[c.drain[c.dep_ids[o] as usize][x] as usize];
                }
                out[s * n + x] = self.queue_cost[x] + g.cost + fut;
            }
        }
    }

    /// Post-decision values for a value table.
    pub fn post_decision(&self, values: &[f64]) -> Vec<f64> {
        let vbar = average_over_scenarios(values, &self.weights, self.space.size());
        let (mut phi, mut scratch) = (Vec::new(), Vec::new());
        self.space.expect_arrivals(&vbar, &self.arrival_pmfs, &mut phi, &mut scratch);
        phi
    }

    fn post_decision_into(&self, values: &[f64], vbar: &mut [f64], phi: &mut Vec<f64>, scratch: &mut Vec<f64>) {
        let n = self.space.size();
        vbar.iter_mut().for_each(|v| *v = 0.0);
        for (s, &w) in self.weights.iter().enumerate() {
            for (o, v) in vbar.iter_mut().zip(&values[s * n..(s + 1) * n]) {
                *o += w * v;
            }
        }
        self.space.expect_arrivals(vbar, &self.arrival_pmfs, phi, scratch);
    }

    /// Relative value iteration anchored at the channel-averaged empty state,
    /// stopped when the span of `T V - V` drops below the tolerance. With
    /// `evaluation_sweeps > 0` each Bellman sweep is followed by that many
    /// sweeps under the current policy (modified policy iteration); the
    /// stopping test still uses the full Bellman operator.
    pub fn solve(&self, opts: &RviOptions, warm: Option<&[f64]>) -> Result<RviSolution, SolveError> {
        let n = self.space.size();
        let total = self.n_states();
        let mut values = match warm {
            Some(w) if w.len() == total => w.to_vec(),
            Some(w) if w.len() == n => (0..self.n_scenarios()).flat_map(|_| w.iter().copied()).collect(),
            Some(w) => {
                return Err(SolveError::Table(format!("warm start has {} entries, expected {n} or {total}", w.len())))
            }
            None => vec![0.0; total],
        };
        let mut next = vec![0.0; total];
        let mut policy = vec![0u32; total];
        let mut chosen = vec![0u32; total];
        let mut residuals = Vec::new();
        let (mut phi, mut scratch) = (Vec::new(), Vec::new());
        let mut vbar = vec![0.0; n];
        let compiled = self.compile();
        let recenter = |values: &mut [f64], next: &[f64]| {
            let mut anchor = 0.0;
            for (s, &w) in self.weights.iter().enumerate() {
                anchor += w * next[s * n];
            }
            for (v, t) in values.iter_mut().zip(next) {
                *v = t - anchor;
            }
        };
        for it in 1..=opts.max_iterations {
            self.post_decision_into(&values, &mut vbar, &mut phi, &mut scratch);
            self.bellman_compiled(&compiled, &phi, &mut next, &mut policy, &mut chosen);

            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (t, v) in next.iter().zip(&values) {
                let d = t - v;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            let span = hi - lo;
            residuals.push(span);
            recenter(&mut values, &next);
            if span < opts.tolerance {
                let phi = self.post_decision(&values);
                return Ok(RviSolution {
                    theta: 0.5 * (lo + hi),
                    lower: lo,
                    upper: hi,
                    values,
                    policy,
                    phi,
                    iterations: it,
                    residuals,
                });
            }
            for _ in 0..opts.evaluation_sweeps {
                self.post_decision_into(&values, &mut vbar, &mut phi, &mut scratch);
                self.evaluate_compiled(&compiled, &phi, &mut next, &chosen);
                recenter(&mut values, &next);
            }
        }
        Err(SolveError::NotConverged {
            iterations: opts.max_iterations,
            residual: residuals.last().copied().unwrap_or(f64::INFINITY),
        })
    }
}

#[derive(Clone)]
struct Group {
    /// Cheapest member action, lowest index on ties.
    action: u32,
    cost: f64,
    start: usize,
    end: usize,
}

/// Flat form of a scenario MDP for the sweeps: per scenario, the actions
/// grouped by identical outcome laws (only a group's cheapest action can
/// be optimal), and per distinct departure vector the drained index of
/// every queue state.
struct Compiled {
    groups: Vec<Vec<Group>>,
    #[allow(dead_code)]
    group_of: Vec<Vec<u32>>,
    probs: Vec<f64>,
    dep_ids: Vec<u32>,
    drain: Vec<Vec<u32>>,
}

/// A finite weighted set of channel realizations for one subregion shape.
#[derive(Debug, Clone)]
pub struct ScenarioSet {
    pub weights: Vec<f64>,
    pub channels: Vec<ChannelRealization>,
}

impl ScenarioSet {
    pub fn uniform(channels: Vec<ChannelRealization>) -> Self {
        let w = 1.0 / channels.len() as f64;
        Self { weights: vec![w; channels.len()], channels }
    }
}

/// Channel cost and departures of every action in every scenario.
pub struct EvaluatedScenarios {
    pub weights: Vec<f64>,
    pub cost: Vec<Vec<f64>>,
    pub departures: Vec<Vec<Vec<u32>>>,
}

pub fn evaluate_scenarios(
    set: &ScenarioSet,
    actions: &[Vec<Option<usize>>],
    model: &CostModel,
    cfg: &ScenarioConfig,
) -> EvaluatedScenarios {
    let nl = model.n_links();
    let mut cost = Vec::with_capacity(set.channels.len());
    let mut departures = Vec::with_capacity(set.channels.len());
    let cells: Vec<ActionCells> = match set.channels.first() {
        Some(ch) => actions.iter().map(|a| ActionCells::new(a, model.n_nds, ch.n_rbs)).collect(),
        None => Vec::new(),
    };
    for ch in &set.channels {
        let table = PairTable::new(model, ch, cfg, true);
        let mut c = Vec::with_capacity(actions.len());
        let mut d = Vec::with_capacity(actions.len());
        for a in &cells {
            let mut dep = vec![0u32; nl];
            c.push(table.evaluate(a, &mut dep));
            d.push(dep);
        }
        cost.push(c);
        departures.push(d);
    }
    EvaluatedScenarios { weights: set.weights.clone(), cost, departures }
}

fn queue_costs(space: &QueueSpace, model: &CostModel) -> Vec<f64> {
    (0..space.size()).map(|x| model.queue_cost(&space.decode(x))).collect()
}

/// Full-state model: the scheduler sees the scenario before acting.
/// Scenarios with identical costs and departures are merged.
pub fn build_full_mdp(ev: &EvaluatedScenarios, space: QueueSpace, model: &CostModel, arrival_pmfs: Vec<Vec<f64>>) -> ScenarioMdp {
    let mut merged: BTreeMap<(Vec<u64>, Vec<Vec<u32>>), usize> = BTreeMap::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut cost = Vec::new();
    let mut outcomes = Vec::new();
    let n_actions = ev.cost.first().map_or(0, |c| c.len());
    for (s, &w) in ev.weights.iter().enumerate() {
        let key = (ev.cost[s].iter().map(|c| c.to_bits()).collect::<Vec<_>>(), ev.departures[s].clone());
        if let Some(&slot) = merged.get(&key) {
            weights[slot] += w;
            continue;
        }
        merged.insert(key, weights.len());
        weights.push(w);
        cost.push(ev.cost[s].clone());
        outcomes.push(
            ev.departures[s].iter().map(|d| vec![Outcome { departures: d.clone(), prob: 1.0 }]).collect::<Vec<_>>(),
        );
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    ScenarioMdp { queue_cost: queue_costs(&space, model), space, weights, n_actions, cost, outcomes, arrival_pmfs }
}

/// Channel-averaged model: expected channel cost and the law of the
/// departure vector for each action. Also returns the largest deviation of
/// the raw outcome weights from one before renormalisation.
pub fn build_reduced_mdp(
    ev: &EvaluatedScenarios,
    space: QueueSpace,
    model: &CostModel,
    arrival_pmfs: Vec<Vec<f64>>,
) -> (ScenarioMdp, f64) {
    let n_actions = ev.cost.first().map_or(0, |c| c.len());
    let total_w: f64 = ev.weights.iter().sum();
    let mut cost = vec![0.0; n_actions];
    let mut outcomes = Vec::with_capacity(n_actions);
    let mut worst: f64 = 0.0;
    for a in 0..n_actions {
        // weighted running mean: identical samples reproduce their value
        // bit for bit
        let mut mean = 0.0;
        let mut seen = 0.0;
        let mut law: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (s, &w) in ev.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            seen += w;
            mean += w / seen * (ev.cost[s][a] - mean);
            *law.entry(ev.departures[s][a].clone()).or_insert(0.0) += w;
        }
        cost[a] = mean;
        let raw: f64 = law.values().map(|p| p / total_w).sum();
        worst = worst.max((raw - 1.0).abs());
        let norm: f64 = law.values().sum();
        outcomes.push(law.into_iter().map(|(d, p)| Outcome { departures: d, prob: p / norm }).collect::<Vec<_>>());
    }
    let mdp = ScenarioMdp {
        queue_cost: queue_costs(&space, model),
        space,
        weights: vec![1.0],
        n_actions,
        cost: vec![cost],
        outcomes: vec![outcomes],
        arrival_pmfs,
    };
    (mdp, worst)
}
