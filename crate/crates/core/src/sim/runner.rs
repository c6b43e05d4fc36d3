use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::channel::{realize_link, ChannelRealization, LargeScale};
use crate::error::{SimError, SolveError};
use crate::metrics::{link_departures, prr, rate_nds, MetricsAccumulator};
use crate::mobility::{place_vehicles, sample_tdi, TdiRegime, TdiVector, N_SUBREGIONS};
use crate::model::{LinkClass, PlanningMode, ScenarioConfig};
use crate::queue::{step_queue, ArrivalProcess};
use crate::rng::{stream, tag};
use crate::stage1::{allocate_shares, ShareVector, UtilityParams};
use crate::stage2::{
    action_list, dual_step, greedy_schedule, random_schedule, update_multipliers, LagrangeMultipliers,
    MeasuredAverages, Planner, QueueSpace, Shape, TableKind, ValueTable,
};

use super::budget::budget_rbs;
use super::planning::{build_planner, epoch_scenarios, scenario_count, shape_for, PlanKey, PlannerCache};
use super::PolicyKind;

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub policy: PolicyKind,
    pub regime: TdiRegime,
    /// Mean packet arrival rate of every vehicle, packets/s.
    pub arrival_rate: f64,
    pub seed: u64,
    /// Number of TDI epochs; the configured count when `None`.
    pub epochs: Option<usize>,
    /// Initial value table for the first solve of each matching shape.
    pub warm_start: Option<ValueTable>,
}

impl RunSpec {
    pub fn new(policy: PolicyKind, regime: TdiRegime, arrival_rate: f64, seed: u64) -> Self {
        Self { policy, regime, arrival_rate, seed, epochs: None, warm_start: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub tdi: TdiVector,
    pub shares: ShareVector,
    pub budget: [usize; N_SUBREGIONS],
    pub vehicles: [(usize, usize); N_SUBREGIONS],
    pub shapes: [Shape; N_SUBREGIONS],
    /// Readouts accumulated during this epoch after the warm-up.
    pub metrics: MetricsAccumulator,
}

#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub policy: PolicyKind,
    pub regime: TdiRegime,
    pub arrival_rate: f64,
    pub seed: u64,
    pub metrics: MetricsAccumulator,
    pub epochs: Vec<EpochRecord>,
    pub stage1_solves: usize,
    pub planner_builds: usize,
    pub plan_time: Duration,
    pub online_time: Duration,
    pub decisions: u64,
}

impl MetricsReport {
    /// Little's-law delay of the delay-sensitive vehicles, s.
    pub fn mean_delay(&self) -> Option<f64> {
        self.metrics.mean_delay(self.arrival_rate)
    }

    pub fn mean_prr(&self) -> Option<f64> {
        self.metrics.mean_prr()
    }

    pub fn mean_rate(&self) -> Option<f64> {
        self.metrics.mean_rate()
    }

    pub fn mean_queue(&self) -> Option<f64> {
        self.metrics.mean_ds_queue()
    }

    pub fn overflow_frac(&self) -> Option<f64> {
        self.metrics.overflow_frac()
    }

    /// Per-epoch delays, the batches of the batch-means error estimate.
    pub fn epoch_delays(&self) -> Vec<f64> {
        self.epochs.iter().filter_map(|e| e.metrics.mean_delay(self.arrival_rate)).collect()
    }

    /// Planning plus online time divided by the number of scheduling
    /// decisions.
    pub fn time_per_decision(&self) -> Option<Duration> {
        (self.decisions > 0).then(|| (self.plan_time + self.online_time) / self.decisions as u32)
    }
}

/// Which way a subregion picks its action each slot during one epoch.
enum Scheduler {
    Idle,
    Planned(Arc<Planner>),
    Random(Vec<Vec<Option<usize>>>),
    Greedy,
}

/// Per-position sums for the dual update of one subregion and epoch.
#[derive(Default)]
struct PositionStats {
    prr: Vec<(f64, u64)>,
    rate: Vec<(f64, u64)>,
    queue: Vec<f64>,
    overflow: Vec<u64>,
    slots: u64,
}

impl PositionStats {
    fn new(shape: Shape) -> Self {
        Self {
            prr: vec![(0.0, 0); shape.n_ds],
            rate: vec![(0.0, 0); shape.n_nds],
            queue: vec![0.0; shape.n_links()],
            overflow: vec![0; shape.n_links()],
            slots: 0,
        }
    }

    fn averages(&self, shape: Shape, rate: f64, prr_floor: f64, rate_floor: f64) -> MeasuredAverages {
        let mean = |(s, n): (f64, u64), default: f64| if n > 0 { s / n as f64 } else { default };
        let t = self.slots.max(1) as f64;
        let delay = |l: usize| if rate > 0.0 { self.queue[l] / t / rate } else { self.queue[l] / t };
        MeasuredAverages {
            prr: self.prr.iter().map(|&p| mean(p, prr_floor)).collect(),
            rate: self.rate.iter().map(|&r| mean(r, rate_floor)).collect(),
            ds_delay: (shape.n_nds..shape.n_links()).map(delay).collect(),
            nds_delay: (0..shape.n_nds).map(delay).collect(),
            overflow: self.overflow.iter().map(|&o| o as f64 / t).collect(),
        }
    }
}

/// Subregion state that outlives an epoch.
#[derive(Default, Clone)]
struct Carry {
    nds_q: Vec<u32>,
    ds_q: Vec<u32>,
    /// Last solved values and their shape, for warm starts.
    values: Option<(Shape, Vec<f64>)>,
    duals: Option<(Shape, LagrangeMultipliers)>,
}

/// Indices of the `k` longest queues, longest first, ties to the lower
/// index.
fn top_k(q: &[u32], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..q.len()).collect();
    idx.sort_by(|&a, &b| q[b].cmp(&q[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn resize_queues(q: &mut Vec<u32>, n: usize) {
    q.resize(n, 0);
}

fn kind_for(policy: PolicyKind) -> Option<TableKind> {
    match policy {
        PolicyKind::TwoStage | PolicyKind::EqualSplit => Some(TableKind::Reduced),
        PolicyKind::FullOptimal => Some(TableKind::Full),
        PolicyKind::Random => None,
    }
}

/// Runs the two-time-scale loop: at each TDI epoch, densities, shares, RB
/// budgets, vehicle layout and per-subregion planning; at each slot, channel
/// realization, scheduling, readouts, departures and arrivals.
pub fn run(cfg: &ScenarioConfig, spec: &RunSpec, cache: &mut PlannerCache) -> Result<MetricsReport, SimError> {
    cfg.validate()?;
    if cfg.radio.total_rbs == 0 {
        return Err(crate::error::ConfigError::Invalid { key: "radio.total_rbs".into(), reason: "must be >= 1".into() }.into());
    }
    let epochs = spec.epochs.unwrap_or(cfg.sim.epochs);
    let per_epoch = cfg.slots_per_epoch();
    if epochs == 0 {
        return Err(SimError::HorizonTooShort { slots: 0, per_epoch });
    }
    let total_slots = epochs * per_epoch;
    let warmup = (cfg.sim.warmup_fraction * total_slots as f64).floor() as usize;
    let seed = spec.seed;
    let cap = cfg.queue.capacity;
    let util = UtilityParams::from_config(cfg);
    let arrivals = ArrivalProcess::new(cfg.queue.arrivals, spec.arrival_rate, cfg.timing.slot_duration);
    let kind = kind_for(spec.policy);

    let mut carry: Vec<Carry> = vec![Carry::default(); N_SUBREGIONS];
    if let Some(t) = &spec.warm_start {
        let shape = Shape { n_nds: t.n_nds, n_ds: t.n_ds, n_rbs: 0 };
        for c in carry.iter_mut() {
            c.values = Some((shape, t.averaged()));
        }
    }
    let mut report = MetricsReport {
        policy: spec.policy,
        regime: spec.regime,
        arrival_rate: spec.arrival_rate,
        seed,
        metrics: MetricsAccumulator::default(),
        epochs: Vec::with_capacity(epochs),
        stage1_solves: 0,
        planner_builds: 0,
        plan_time: Duration::ZERO,
        online_time: Duration::ZERO,
        decisions: 0,
    };

    for e in 0..epochs {
        let tdi = match cfg.sim.pinned_tdi {
            Some(k) => TdiVector(k),
            None => sample_tdi(spec.regime, &mut stream(seed, &[tag::TDI, e as u64])),
        };
        let shares = match spec.policy {
            PolicyKind::EqualSplit => ShareVector { epsilon: [0.25; N_SUBREGIONS], active_count: N_SUBREGIONS, multiplier: f64::NAN },
            _ => {
                report.stage1_solves += 1;
                allocate_shares(&tdi, &util)
            }
        };
        let budget = budget_rbs(&shares.epsilon, cfg.radio.total_rbs, cfg.sim.leftover);
        let layout = place_vehicles(&tdi, cfg, &mut stream(seed, &[tag::LAYOUT, e as u64]));
        let mut rec = EpochRecord {
            tdi,
            shares,
            budget,
            vehicles: [(0, 0); N_SUBREGIONS],
            shapes: [Shape { n_nds: 0, n_ds: 0, n_rbs: 0 }; N_SUBREGIONS],
            metrics: MetricsAccumulator::default(),
        };

        for (s, c) in carry.iter_mut().enumerate() {
            let nds = layout.class_members(s, LinkClass::NonDelaySensitive);
            let ds = layout.class_members(s, LinkClass::DelaySensitive);
            resize_queues(&mut c.nds_q, nds.len());
            resize_queues(&mut c.ds_q, ds.len());
            rec.vehicles[s] = (nds.len(), ds.len());
            let large = LargeScale::build(&layout, s, cfg, &mut stream(seed, &[tag::SHADOW, e as u64, s as u64]));
            let shape = shape_for(nds.len(), ds.len(), budget[s], cfg);
            rec.shapes[s] = shape;
            if nds.len() > shape.n_nds || ds.len() > shape.n_ds {
                log::debug!(
                    "epoch {e} subregion {s}: scheduling the longest {}+{} of {}+{} queues",
                    shape.n_nds,
                    shape.n_ds,
                    nds.len(),
                    ds.len()
                );
            }

            let scheduler = if shape.n_links() == 0 || shape.n_rbs == 0 {
                Scheduler::Idle
            } else {
                match kind {
                    None => match action_list(shape, cfg.stage2.action_cap) {
                        Ok(a) => Scheduler::Random(a),
                        Err(SolveError::ActionSpaceTooLarge { .. }) => Scheduler::Greedy,
                        Err(err) => return Err(err.into()),
                    },
                    Some(k) => {
                        let started = Instant::now();
                        let planned = match cfg.stage2.planning {
                            PlanningMode::Shared => {
                                let key =
                                    PlanKey { kind: k, regime: spec.regime, shape, rate_bits: spec.arrival_rate.to_bits() };
                                cache.get_or_build(key, cfg).map(|(p, built)| {
                                    report.planner_builds += usize::from(built);
                                    p
                                })
                            }
                            PlanningMode::PerEpoch => {
                                let mut rng = stream(seed, &[tag::PLANNING, e as u64, s as u64]);
                                let set = epoch_scenarios(&large, &nds, &ds, shape, scenario_count(k, cfg), cfg, &mut rng);
                                let duals = c.duals.as_ref().filter(|(sh, _)| *sh == shape).map(|(_, m)| m.clone());
                                let warm = c
                                    .values
                                    .as_ref()
                                    .filter(|(sh, v)| {
                                        sh.n_nds == shape.n_nds
                                            && sh.n_ds == shape.n_ds
                                            && v.len() == QueueSpace::new(shape.n_links(), cap).size()
                                    })
                                    .map(|(_, v)| v.as_slice());
                                build_planner(k, shape, &set, spec.arrival_rate, duals, cfg, warm).map(|p| {
                                    report.planner_builds += 1;
                                    c.values = Some((shape, p.averaged_values()));
                                    Arc::new(p)
                                })
                            }
                        };
                        report.plan_time += started.elapsed();
                        match planned {
                            Ok(p) => Scheduler::Planned(p),
                            Err(SolveError::ActionSpaceTooLarge { .. }) => Scheduler::Greedy,
                            Err(err) => return Err(err.into()),
                        }
                    }
                }
            };

            let mut random_rng = stream(seed, &[tag::RANDOM_POLICY, e as u64, s as u64]);
            let mut arrival_rng = stream(seed, &[tag::ARRIVALS, e as u64, s as u64]);
            let mut stats = PositionStats::new(shape);
            let mut links = Vec::with_capacity(shape.n_links());
            let mut rb: Vec<Option<usize>> = Vec::with_capacity(shape.n_links());
            for t in 0..per_epoch {
                let global = e * per_epoch + t;
                let active_nds = top_k(&c.nds_q, shape.n_nds);
                let active_ds = top_k(&c.ds_q, shape.n_ds);
                let q_active: Vec<u32> =
                    active_nds.iter().map(|&i| c.nds_q[i]).chain(active_ds.iter().map(|&i| c.ds_q[i])).collect();

                rb.clear();
                let mut ch = None;
                if !matches!(scheduler, Scheduler::Idle) {
                    links.clear();
                    for (&i, class) in active_nds
                        .iter()
                        .map(|i| (&nds[*i], LinkClass::NonDelaySensitive))
                        .chain(active_ds.iter().map(|i| (&ds[*i], LinkClass::DelaySensitive)))
                    {
                        let mut f = stream(seed, &[tag::FADING, global as u64, s as u64, i as u64]);
                        links.push(realize_link(i, class, &large, shape.n_rbs, cfg, &mut f));
                    }
                    let realization = ChannelRealization { n_rbs: shape.n_rbs, n_nds: shape.n_nds, links: links.clone() };
                    let started = Instant::now();
                    match &scheduler {
                        Scheduler::Planned(p) => {
                            let a = p.schedule(&q_active, &realization, cfg);
                            rb.extend_from_slice(&p.actions[a]);
                        }
                        Scheduler::Random(list) => {
                            let a = random_schedule(list.len(), &mut random_rng);
                            rb.extend_from_slice(&list[a]);
                        }
                        Scheduler::Greedy => rb.extend(greedy_schedule(&q_active, shape)),
                        Scheduler::Idle => unreachable!(),
                    }
                    report.online_time += started.elapsed();
                    report.decisions += 1;
                    ch = Some(realization);
                }

                let measuring = global >= warmup;
                if measuring {
                    for &q in &c.nds_q {
                        rec.metrics.record_nds_queue(q, cap);
                    }
                    for &q in &c.ds_q {
                        rec.metrics.record_ds_queue(q, cap);
                    }
                }
                let mut departed = vec![0u32; q_active.len()];
                if let Some(ch) = &ch {
                    stats.slots += 1;
                    for l in 0..shape.n_links() {
                        stats.queue[l] += q_active[l] as f64;
                        if q_active[l] >= cap {
                            stats.overflow[l] += 1;
                        }
                        if rb[l].is_none() {
                            continue;
                        }
                        if l < shape.n_nds {
                            let r = rate_nds(l, &rb, ch, cfg);
                            stats.rate[l].0 += r;
                            stats.rate[l].1 += 1;
                            if measuring {
                                rec.metrics.record_rate(r);
                            }
                        } else {
                            let p = prr(l, &rb, ch, cfg);
                            stats.prr[l - shape.n_nds].0 += p;
                            stats.prr[l - shape.n_nds].1 += 1;
                            if measuring {
                                rec.metrics.record_prr(p);
                            }
                        }
                        departed[l] = link_departures(l, &rb, ch, cfg, q_active[l]);
                    }
                }
                if measuring {
                    rec.metrics.end_slot();
                }

                let mut dep_nds = vec![0u32; c.nds_q.len()];
                let mut dep_ds = vec![0u32; c.ds_q.len()];
                for (pos, &i) in active_nds.iter().enumerate() {
                    dep_nds[i] = departed[pos];
                }
                for (pos, &i) in active_ds.iter().enumerate() {
                    dep_ds[i] = departed[shape.n_nds + pos];
                }
                for (q, d) in c.nds_q.iter_mut().zip(&dep_nds).chain(c.ds_q.iter_mut().zip(&dep_ds)) {
                    let a = arrivals.sample_from_uniform(arrival_rng.gen::<f64>());
                    *q = step_queue(*q, *d, a, cap);
                }
            }

            if cfg.stage2.planning == PlanningMode::PerEpoch && cfg.stage2.dual_step > 0.0 && stats.slots > 0 {
                let current = c
                    .duals
                    .as_ref()
                    .filter(|(sh, _)| *sh == shape)
                    .map(|(_, m)| m.clone())
                    .unwrap_or_else(|| LagrangeMultipliers::from_config(shape.n_nds, shape.n_ds, cfg));
                let avg = stats.averages(shape, spec.arrival_rate, cfg.qos.prr_floor, cfg.qos.rate_floor);
                let step = dual_step(cfg.stage2.dual_step, e + 1);
                c.duals = Some((shape, update_multipliers(&current, &avg, step, cfg.qos.prr_floor, cfg.qos.rate_floor)));
            }
        }
        report.metrics.merge(&rec.metrics);
        report.epochs.push(rec);
    }
    Ok(report)
}
