use crate::channel::ChannelRealization;
use crate::metrics::{link_departures, prr, rate_nds};
use crate::model::ScenarioConfig;

/// Nonnegative dual variables of the scheduling problem. Vectors are indexed
/// by position inside the class (`beta` over delay-sensitive links, `gamma`
/// over non-delay-sensitive links) and `eta` over all links.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeMultipliers {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub eta: Vec<f64>,
    pub lambda: f64,
}

impl LagrangeMultipliers {
    pub fn zeros(n_nds: usize, n_ds: usize) -> Self {
        Self { beta: vec![0.0; n_ds], gamma: vec![0.0; n_nds], eta: vec![0.0; n_nds + n_ds], lambda: 0.0 }
    }

    pub fn uniform(n_nds: usize, n_ds: usize, beta: f64, gamma: f64, eta: f64, lambda: f64) -> Self {
        Self { beta: vec![beta; n_ds], gamma: vec![gamma; n_nds], eta: vec![eta; n_nds + n_ds], lambda }
    }

    pub fn from_config(n_nds: usize, n_ds: usize, cfg: &ScenarioConfig) -> Self {
        let m = &cfg.stage2.multipliers;
        Self::uniform(n_nds, n_ds, m.beta, m.gamma, m.eta, m.lambda)
    }
}

/// Everything the per-stage cost needs besides the state and action.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub n_nds: usize,
    pub n_ds: usize,
    pub capacity: u32,
    /// packets/s per link.
    pub arrival_rate: Vec<f64>,
    /// Delay weight per delay-sensitive position.
    pub alpha: Vec<f64>,
    pub multipliers: LagrangeMultipliers,
    pub prr_floor: f64,
    pub rate_floor: f64,
}

impl CostModel {
    pub fn from_config(n_nds: usize, n_ds: usize, arrival_rate: f64, cfg: &ScenarioConfig) -> Self {
        Self {
            n_nds,
            n_ds,
            capacity: cfg.queue.capacity,
            arrival_rate: vec![arrival_rate; n_nds + n_ds],
            alpha: (0..n_ds).map(|i| cfg.ds_weight(i)).collect(),
            multipliers: LagrangeMultipliers::from_config(n_nds, n_ds, cfg),
            prr_floor: cfg.qos.prr_floor,
            rate_floor: cfg.qos.rate_floor,
        }
    }

    pub fn n_links(&self) -> usize {
        self.n_nds + self.n_ds
    }

    /// Delay proxy Q/Ā; a link without arrivals falls back to Q itself.
    pub fn delay_term(&self, link: usize, q: u32) -> f64 {
        let a = self.arrival_rate[link];
        if a > 0.0 {
            q as f64 / a
        } else {
            q as f64
        }
    }

    /// State-only part of the per-stage cost: weighted delay of the
    /// delay-sensitive links, the delay-ordering term and the overflow
    /// penalties.
    pub fn queue_cost(&self, q: &[u32]) -> f64 {
        let m = &self.multipliers;
        let mut c = 0.0;
        for i in 0..self.n_ds {
            let l = self.n_nds + i;
            c += self.alpha[i] * self.delay_term(l, q[l]);
        }
        if m.lambda != 0.0 && self.n_ds > 0 && self.n_nds > 0 {
            let max_ds = (self.n_nds..self.n_links()).map(|l| self.delay_term(l, q[l])).fold(f64::NEG_INFINITY, f64::max);
            let min_nds = (0..self.n_nds).map(|l| self.delay_term(l, q[l])).fold(f64::INFINITY, f64::min);
            c += m.lambda * (max_ds - min_nds);
        }
        for (l, &ql) in q.iter().enumerate() {
            if ql >= self.capacity {
                c += m.eta[l];
            }
        }
        c
    }

    /// Action-dependent part: PRR and rate rewards against their floors.
    pub fn channel_cost(&self, rb_of_link: &[Option<usize>], ch: &ChannelRealization, cfg: &ScenarioConfig) -> f64 {
        let m = &self.multipliers;
        let mut c = 0.0;
        for i in 0..self.n_ds {
            if m.beta[i] != 0.0 {
                c -= m.beta[i] * (prr(self.n_nds + i, rb_of_link, ch, cfg) - self.prr_floor);
            }
        }
        for j in 0..self.n_nds {
            if m.gamma[j] != 0.0 {
                c -= m.gamma[j] * (rate_nds(j, rb_of_link, ch, cfg) - self.rate_floor);
            }
        }
        c
    }

    /// Channel cost and per-link departures of one action on one channel
    /// realization.
    pub fn evaluate(&self, rb_of_link: &[Option<usize>], ch: &ChannelRealization, cfg: &ScenarioConfig, dep: &mut [u32]) -> f64 {
        for (l, d) in dep.iter_mut().enumerate() {
            *d = link_departures(l, rb_of_link, ch, cfg, self.capacity);
        }
        self.channel_cost(rb_of_link, ch, cfg)
    }
}

/// Where an action puts its links: the flat pair-table cell of every RB in
/// use and the links left unassigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCells {
    pub cells: Vec<usize>,
    pub idle: Vec<usize>,
}

impl ActionCells {
    pub fn new(rb_of_link: &[Option<usize>], n_nds: usize, n_rbs: usize) -> Self {
        let n_ds = rb_of_link.len() - n_nds;
        let mut nds_on = vec![n_nds; n_rbs];
        let mut ds_on = vec![n_ds; n_rbs];
        let mut idle = Vec::new();
        for (l, r) in rb_of_link.iter().enumerate() {
            match (*r, l < n_nds) {
                (None, _) => idle.push(l),
                (Some(k), true) => nds_on[k] = l,
                (Some(k), false) => ds_on[k] = l - n_nds,
            }
        }
        let cells = (0..n_rbs)
            .filter(|&k| nds_on[k] < n_nds || ds_on[k] < n_ds)
            .map(|k| (k * (n_nds + 1) + nds_on[k]) * (n_ds + 1) + ds_on[k])
            .collect();
        Self { cells, idle }
    }
}

/// Action-dependent cost and departures of one channel realization, by RB
/// pairing. On an RB a broadcaster's PRR and departures depend only on the
/// uplink sharing it and the uplink's rate only on the broadcaster, so any
/// action's value is a sum over the RBs it uses plus its idle links.
#[derive(Debug, Clone)]
pub struct PairTable {
    n_nds: usize,
    /// Cost of each link when unassigned.
    idle: Vec<f64>,
    /// Cost of the links on RB k for the pairing (uplink j, broadcaster i),
    /// where j = n_nds or i = n_ds stands for nobody.
    cost: Vec<f64>,
    /// Departures of (uplink, broadcaster) in each cell.
    dep: Vec<(u32, u32)>,
}

impl PairTable {
    /// Departures are left at zero unless `departures` is set.
    pub fn new(model: &CostModel, ch: &ChannelRealization, cfg: &ScenarioConfig, departures: bool) -> Self {
        let (n1, n2, nr) = (model.n_nds, model.n_ds, ch.n_rbs);
        let nl = n1 + n2;
        let m = &model.multipliers;
        let ds_term = |i: usize, rb: &[Option<usize>]| {
            if m.beta[i] != 0.0 {
                -m.beta[i] * (prr(n1 + i, rb, ch, cfg) - model.prr_floor)
            } else {
                0.0
            }
        };
        let nds_term = |j: usize, rb: &[Option<usize>]| {
            if m.gamma[j] != 0.0 {
                -m.gamma[j] * (rate_nds(j, rb, ch, cfg) - model.rate_floor)
            } else {
                0.0
            }
        };
        let mut rb = vec![None; nl];
        let idle = (0..nl).map(|l| if l < n1 { nds_term(l, &rb) } else { ds_term(l - n1, &rb) }).collect();
        let cells = nr * (n1 + 1) * (n2 + 1);
        let mut cost = Vec::with_capacity(cells);
        let mut dep = Vec::with_capacity(cells);
        for k in 0..nr {
            for j in 0..=n1 {
                for i in 0..=n2 {
                    rb.iter_mut().for_each(|r| *r = None);
                    if j < n1 {
                        rb[j] = Some(k);
                    }
                    if i < n2 {
                        rb[n1 + i] = Some(k);
                    }
                    let mut c = 0.0;
                    let mut d = (0, 0);
                    if i < n2 {
                        c += ds_term(i, &rb);
                        if departures {
                            d.1 = link_departures(n1 + i, &rb, ch, cfg, model.capacity);
                        }
                    }
                    if j < n1 {
                        c += nds_term(j, &rb);
                        if departures {
                            d.0 = link_departures(j, &rb, ch, cfg, model.capacity);
                        }
                    }
                    cost.push(c);
                    dep.push(d);
                }
            }
        }
        Self { n_nds: n1, idle, cost, dep }
    }

    pub fn cost(&self, a: &ActionCells) -> f64 {
        a.idle.iter().map(|&l| self.idle[l]).sum::<f64>() + a.cells.iter().map(|&c| self.cost[c]).sum::<f64>()
    }

    /// Cost of action `a`, writing its departures into `dep`.
    pub fn evaluate(&self, a: &ActionCells, dep: &mut [u32]) -> f64 {
        dep.fill(0);
        let n2 = dep.len() - self.n_nds;
        for &c in &a.cells {
            let i = c % (n2 + 1);
            let j = (c / (n2 + 1)) % (self.n_nds + 1);
            let (dj, di) = self.dep[c];
            if j < self.n_nds {
                dep[j] = dj;
            }
            if i < n2 {
                dep[self.n_nds + i] = di;
            }
        }
        self.cost(a)
    }
}

/// g(Q, H, a): the Lagrangian per-stage cost.
pub fn per_stage_cost(
    q: &[u32],
    rb_of_link: &[Option<usize>],
    ch: &ChannelRealization,
    model: &CostModel,
    cfg: &ScenarioConfig,
) -> f64 {
    model.queue_cost(q) + model.channel_cost(rb_of_link, ch, cfg)
}
