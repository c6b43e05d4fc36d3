use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use crate::channel::{realize_link, ChannelRealization, LargeScale};
use crate::error::SolveError;
use crate::mobility::{place_vehicles, sample_tdi, TdiRegime, VehicleLayout, N_SUBREGIONS};
use crate::model::{LinkClass, ScenarioConfig};
use crate::queue::ArrivalProcess;
use crate::rng::{stream, tag};
use crate::stage2::{CostModel, LagrangeMultipliers, Planner, RviOptions, ScenarioSet, Shape, TableKind};

/// Channel draw for a shape: a random choice of scheduled vehicles of each
/// class followed by one fading realization.
pub fn draw_scenario<R: Rng + ?Sized>(
    large: &LargeScale,
    nds: &[usize],
    ds: &[usize],
    shape: Shape,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> ChannelRealization {
    let mut links = Vec::with_capacity(shape.n_links());
    for i in sample(rng, nds.len(), shape.n_nds).into_iter() {
        links.push(realize_link(nds[i], LinkClass::NonDelaySensitive, large, shape.n_rbs, cfg, rng));
    }
    for i in sample(rng, ds.len(), shape.n_ds).into_iter() {
        links.push(realize_link(ds[i], LinkClass::DelaySensitive, large, shape.n_rbs, cfg, rng));
    }
    ChannelRealization { n_rbs: shape.n_rbs, n_nds: shape.n_nds, links }
}

/// Scenario set from the vehicles of one subregion in one epoch.
pub fn epoch_scenarios<R: Rng + ?Sized>(
    large: &LargeScale,
    nds: &[usize],
    ds: &[usize],
    shape: Shape,
    n: usize,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> ScenarioSet {
    ScenarioSet::uniform((0..n).map(|_| draw_scenario(large, nds, ds, shape, cfg, rng)).collect())
}

/// The shape a subregion presents when it has `n_nds`/`n_ds` vehicles and
/// `n_rbs` usable RBs.
pub fn shape_for(n_nds: usize, n_ds: usize, n_rbs: usize, cfg: &ScenarioConfig) -> Shape {
    Shape {
        n_nds: n_nds.min(cfg.stage2.max_nds_links),
        n_ds: n_ds.min(cfg.stage2.max_ds_links),
        n_rbs: n_rbs.min(cfg.stage2.max_rbs_per_subregion),
    }
}

/// Scenario set pooled over layouts of a density regime: each draw samples
/// densities and a layout, then takes a subregion whose vehicle counts give
/// this shape (any subregion with enough vehicles if none matches after a
/// bounded number of tries).
pub fn regime_scenarios<R: Rng + ?Sized>(
    regime: TdiRegime,
    shape: Shape,
    n: usize,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> ScenarioSet {
    let mut out = Vec::with_capacity(n);
    let fits = |layout: &VehicleLayout, s: usize, exact: bool| {
        let a = layout.class_members(s, LinkClass::NonDelaySensitive).len();
        let b = layout.class_members(s, LinkClass::DelaySensitive).len();
        if exact {
            let sh = shape_for(a, b, shape.n_rbs, cfg);
            sh.n_nds == shape.n_nds && sh.n_ds == shape.n_ds
        } else {
            a >= shape.n_nds && b >= shape.n_ds
        }
    };
    while out.len() < n {
        let mut chosen = None;
        for attempt in 0..200 {
            let tdi = sample_tdi(regime, rng);
            let layout = place_vehicles(&tdi, cfg, rng);
            let exact = attempt < 100;
            let candidates: Vec<usize> = (0..N_SUBREGIONS).filter(|&s| fits(&layout, s, exact)).collect();
            if !candidates.is_empty() {
                let s = candidates[rng.gen_range(0..candidates.len())];
                chosen = Some((layout, s));
                break;
            }
        }
        let (layout, s) = chosen.unwrap_or_else(|| {
            // densities this low cannot produce the shape; build it directly
            let mut c = cfg.clone();
            c.traffic.ds_fraction = 0.5;
            let k = (shape.n_links() as f64 / c.traffic.segment_length).max(1e-3) * 2.0;
            (place_vehicles(&crate::mobility::TdiVector([k; N_SUBREGIONS]), &c, rng), 0)
        });
        let large = LargeScale::build(&layout, s, cfg, rng);
        let nds = layout.class_members(s, LinkClass::NonDelaySensitive);
        let ds = layout.class_members(s, LinkClass::DelaySensitive);
        if nds.len() < shape.n_nds || ds.len() < shape.n_ds {
            continue;
        }
        out.push(draw_scenario(&large, &nds, &ds, shape, cfg, rng));
    }
    ScenarioSet::uniform(out)
}

pub fn scenario_count(kind: TableKind, cfg: &ScenarioConfig) -> usize {
    match kind {
        TableKind::Reduced => cfg.stage2.n_mc,
        TableKind::Full => cfg.stage2.full_scenarios,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn build_planner(
    kind: TableKind,
    shape: Shape,
    set: &ScenarioSet,
    rate: f64,
    multipliers: Option<LagrangeMultipliers>,
    cfg: &ScenarioConfig,
    warm: Option<&[f64]>,
) -> Result<Planner, SolveError> {
    let mut model = CostModel::from_config(shape.n_nds, shape.n_ds, rate, cfg);
    if let Some(m) = multipliers {
        model.multipliers = m;
    }
    let arrivals = ArrivalProcess::new(cfg.queue.arrivals, rate, cfg.timing.slot_duration);
    Planner::build(kind, shape, set, model, &arrivals, cfg, &RviOptions::from_config(cfg), warm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlanKey {
    pub kind: TableKind,
    pub regime: TdiRegime,
    pub shape: Shape,
    pub rate_bits: u64,
}

/// Planners shared across epochs, repetitions and policies in shared
/// planning mode. Each planner depends only on its key and the configured
/// root seed, so cache hits never change results.
#[derive(Debug, Default)]
pub struct PlannerCache {
    map: HashMap<PlanKey, Arc<Planner>>,
    pub builds: usize,
}

impl PlannerCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Returns the planner and whether it was built by this call.
    pub fn get_or_build(&mut self, key: PlanKey, cfg: &ScenarioConfig) -> Result<(Arc<Planner>, bool), SolveError> {
        if let Some(p) = self.map.get(&key) {
            return Ok((p.clone(), false));
        }
        let shape = key.shape;
        let kind_tag = match key.kind {
            TableKind::Reduced => 0,
            TableKind::Full => 1,
        };
        let regime_tag = match key.regime {
            TdiRegime::Low => 0,
            TdiRegime::High => 1,
        };
        let mut rng = stream(
            cfg.rng_seed,
            &[tag::PLANNING, kind_tag, regime_tag, shape.n_nds as u64, shape.n_ds as u64, shape.n_rbs as u64],
        );
        let set = regime_scenarios(key.regime, shape, scenario_count(key.kind, cfg), cfg, &mut rng);
        let p = Arc::new(build_planner(key.kind, shape, &set, f64::from_bits(key.rate_bits), None, cfg, None)?);
        log::debug!(
            "built {:?} planner for {:?} in {:?} ({} sweeps)",
            key.kind,
            shape,
            p.solve_time,
            p.solution.iterations
        );
        self.builds += 1;
        self.map.insert(key, p.clone());
        Ok((p, true))
    }
}
