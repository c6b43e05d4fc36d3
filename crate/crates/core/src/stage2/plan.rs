use std::time::{Duration, Instant};

use rand::Rng;

use crate::channel::ChannelRealization;
use crate::error::SolveError;
use crate::model::{enumerate_feasible_actions, ScenarioConfig, Subregion};
use crate::queue::ArrivalProcess;

use super::cost::{ActionCells, CostModel, PairTable};
use super::solver::{build_full_mdp, build_reduced_mdp, evaluate_scenarios, RviOptions, RviSolution, ScenarioMdp, ScenarioSet};
use super::space::{QueueSpace, MAX_LINKS};
use super::table::{TableKind, ValueTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    pub n_nds: usize,
    pub n_ds: usize,
    pub n_rbs: usize,
}

impl Shape {
    pub fn n_links(&self) -> usize {
        self.n_nds + self.n_ds
    }

    pub fn subregion(&self) -> Subregion {
        Subregion::new(1, self.n_nds, self.n_ds, self.n_rbs)
    }
}

fn post_decision_table(mdp: &ScenarioMdp, phi: &[f64]) -> Vec<f64> {
    let space = &mdp.space;
    let mut out = Vec::with_capacity(space.size() * mdp.n_actions);
    for x in 0..space.size() {
        let q = space.decode(x);
        for outs in &mdp.outcomes[0] {
            let mut fut = 0.0;
            for o in outs {
                fut += o.prob * phi[space.drained(&q, &o.departures)];
            }
            out.push(fut);
        }
    }
    out
}

/// Feasible actions of a shape as `rb_of_link` vectors, idle first.
pub fn action_list(shape: Shape, cap: usize) -> Result<Vec<Vec<Option<usize>>>, SolveError> {
    Ok(enumerate_feasible_actions(&shape.subregion(), cap)?.iter().map(|m| m.assignment()).collect())
}

/// A solved scheduling problem for one subregion shape: the channel-averaged
/// value table of the proposed scheduler or the full-state baseline.
#[derive(Debug, Clone)]
pub struct Planner {
    pub kind: TableKind,
    pub shape: Shape,
    pub actions: Vec<Vec<Option<usize>>>,
    cells: Vec<ActionCells>,
    pub model: CostModel,
    pub mdp: ScenarioMdp,
    pub solution: RviSolution,
    /// Reduced kind only: expected post-decision value of every (queue
    /// state, action) pair, state-major.
    pub post: Vec<f64>,
    /// Raw deviation of the estimated transition rows from one.
    pub row_deviation: f64,
    pub solve_time: Duration,
}

impl Planner {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        kind: TableKind,
        shape: Shape,
        set: &ScenarioSet,
        model: CostModel,
        arrivals: &ArrivalProcess,
        cfg: &ScenarioConfig,
        opts: &RviOptions,
        warm: Option<&[f64]>,
    ) -> Result<Self, SolveError> {
        let started = Instant::now();
        let actions = action_list(shape, cfg.stage2.action_cap)?;
        let space = QueueSpace::new(shape.n_links(), model.capacity);
        let pmf = arrivals.pmf(model.capacity);
        let pmfs = vec![pmf; shape.n_links()];
        let ev = evaluate_scenarios(set, &actions, &model, cfg);
        let (mdp, row_deviation) = match kind {
            TableKind::Reduced => build_reduced_mdp(&ev, space, &model, pmfs),
            TableKind::Full => (build_full_mdp(&ev, space, &model, pmfs), 0.0),
        };
        if row_deviation > 1e-9 {
            log::warn!("transition rows deviated from 1 by {row_deviation:e} before renormalisation");
        }
        let solution = mdp.solve(opts, warm)?;
        let post = match kind {
            TableKind::Reduced => post_decision_table(&mdp, &solution.phi),
            TableKind::Full => Vec::new(),
        };
        let cells = actions.iter().map(|a| ActionCells::new(a, shape.n_nds, shape.n_rbs)).collect();
        Ok(Self { kind, shape, actions, cells, model, mdp, solution, post, row_deviation, solve_time: started.elapsed() })
    }

    pub fn theta(&self) -> f64 {
        self.solution.theta
    }

    /// Channel-averaged relative values, usable as a warm start.
    pub fn averaged_values(&self) -> Vec<f64> {
        self.solution.averaged_values(&self.mdp.weights, &self.mdp.space)
    }

    pub fn value_table(&self) -> ValueTable {
        let (scenarios, values) = match self.kind {
            TableKind::Reduced => (1, self.solution.values.clone()),
            TableKind::Full => (self.mdp.n_scenarios(), self.solution.values.clone()),
        };
        ValueTable {
            kind: self.kind,
            n_nds: self.shape.n_nds,
            n_ds: self.shape.n_ds,
            capacity: self.model.capacity,
            theta: self.solution.theta,
            scenarios,
            values,
        }
    }

    /// Per-slot decision. The proposed scheduler scores each action by its
    /// cost on the current channel plus the expected post-decision value
    /// under the channel-averaged departure law; the full-state baseline uses
    /// the departures the current channel actually yields. Ties go to the
    /// lowest action index.
    pub fn schedule(&self, q: &[u32], ch: &ChannelRealization, cfg: &ScenarioConfig) -> usize {
        let space = &self.mdp.space;
        let phi = &self.solution.phi;
        let nl = self.shape.n_links();
        let base = self.model.queue_cost(q);
        let mut dep = [0u32; MAX_LINKS];
        let row = match self.kind {
            TableKind::Reduced => space.encode(q) * self.actions.len(),
            TableKind::Full => 0,
        };
        let table = PairTable::new(&self.model, ch, cfg, self.kind == TableKind::Full);
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for (a, cells) in self.cells.iter().enumerate() {
            let v = match self.kind {
                TableKind::Reduced => base + table.cost(cells) + self.post[row + a],
                TableKind::Full => {
                    let c = table.evaluate(cells, &mut dep[..nl]);
                    base + c + phi[space.drained(q, &dep[..nl])]
                }
            };
            if v < best {
                best = v;
                arg = a;
            }
        }
        arg
    }
}

/// Uniform choice over the feasible actions.
pub fn random_schedule<R: Rng + ?Sized>(n_actions: usize, rng: &mut R) -> usize {
    rng.gen_range(0..n_actions)
}

/// Fallback when the action space is too large to enumerate: longest
/// delay-sensitive queues take RBs first, then non-delay-sensitive links
/// fill the same RBs in queue order.
pub fn greedy_schedule(q: &[u32], shape: Shape) -> Vec<Option<usize>> {
    let mut out = vec![None; shape.n_links()];
    let by_queue = |range: std::ops::Range<usize>| {
        let mut v: Vec<usize> = range.filter(|&l| q[l] > 0).collect();
        v.sort_by(|&a, &b| q[b].cmp(&q[a]).then(a.cmp(&b)));
        v
    };
    for (k, l) in by_queue(shape.n_nds..shape.n_links()).into_iter().take(shape.n_rbs).enumerate() {
        out[l] = Some(k);
    }
    for (k, l) in by_queue(0..shape.n_nds).into_iter().take(shape.n_rbs).enumerate() {
        out[l] = Some(k);
    }
    out
}
