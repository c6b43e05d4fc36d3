//! Macroscopic traffic state: densities, Greenshield flow and speed, and the
//! vehicle placements that channel evaluation needs.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::model::{LinkClass, ScenarioConfig, Segment};

pub const N_SUBREGIONS: usize = 4;

/// κ·v_f·(1 − κ/κ_jam), evaluated as density times the unclamped speed so
/// that it agrees bit for bit with [`greenshield_speed`] up to jam density.
/// Beyond jam the flow goes negative.
pub fn greenshield_flow(kappa: f64, v_free: f64, kappa_jam: f64) -> f64 {
    kappa * (v_free * (1.0 - kappa / kappa_jam))
}

/// Linear speed-density law. Densities above jam are clamped to a stopped
/// road.
pub fn greenshield_speed(kappa: f64, v_free: f64, kappa_jam: f64) -> f64 {
    if kappa > kappa_jam {
        log::warn!("density {kappa} exceeds jam density {kappa_jam}; speed clamped to 0");
        return 0.0;
    }
    v_free * (1.0 - kappa / kappa_jam)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TdiRegime {
    Low,
    High,
}

impl TdiRegime {
    pub fn range(self) -> (f64, f64) {
        match self {
            TdiRegime::Low => (0.0, 0.5),
            TdiRegime::High => (0.8, 1.2),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TdiRegime::Low => "low",
            TdiRegime::High => "high",
        }
    }
}

impl std::str::FromStr for TdiRegime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(TdiRegime::Low),
            "high" => Ok(TdiRegime::High),
            other => Err(format!("unknown TDI regime `{other}` (expected low or high)")),
        }
    }
}

/// Per-subregion traffic densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdiVector(pub [f64; N_SUBREGIONS]);

pub fn sample_tdi<R: Rng + ?Sized>(regime: TdiRegime, rng: &mut R) -> TdiVector {
    let (lo, hi) = regime.range();
    let mut k = [0.0; N_SUBREGIONS];
    for v in k.iter_mut() {
        *v = lo + (hi - lo) * rng.gen::<f64>();
    }
    TdiVector(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub position: [f64; 2],
    pub class: LinkClass,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleLayout {
    pub subregions: Vec<Vec<Vehicle>>,
}

impl VehicleLayout {
    pub fn vehicles(&self, subregion: usize) -> &[Vehicle] {
        &self.subregions[subregion]
    }

    /// Indices of the vehicles of one class inside a subregion, in placement
    /// order.
    pub fn class_members(&self, subregion: usize, class: LinkClass) -> Vec<usize> {
        self.subregions[subregion]
            .iter()
            .enumerate()
            .filter(|(_, v)| v.class == class)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["subregion", "x", "y", "class", "speed"])?;
        for (s, vs) in self.subregions.iter().enumerate() {
            for v in vs {
                let class = match v.class {
                    LinkClass::DelaySensitive => "ds",
                    LinkClass::NonDelaySensitive => "nds",
                };
                w.write_record([
                    (s + 1).to_string(),
                    v.position[0].to_string(),
                    v.position[1].to_string(),
                    class.to_string(),
                    v.speed.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn subregion_segment(id: usize, cfg: &ScenarioConfig) -> Segment {
    Segment::arm(id, cfg.traffic.segment_offset, cfg.traffic.segment_length)
}

pub fn vehicle_count(kappa: f64, cfg: &ScenarioConfig) -> usize {
    (kappa * cfg.traffic.segment_length * cfg.traffic.lanes as f64).round().max(0.0) as usize
}

/// Uniform placement along each arm; lane picked uniformly, class drawn with
/// the configured delay-sensitive fraction.
pub fn place_vehicles<R: Rng + ?Sized>(tdi: &TdiVector, cfg: &ScenarioConfig, rng: &mut R) -> VehicleLayout {
    let t = &cfg.traffic;
    let mut subregions = Vec::with_capacity(N_SUBREGIONS);
    for (i, &kappa) in tdi.0.iter().enumerate() {
        let seg = subregion_segment(i + 1, cfg);
        let speed = greenshield_speed(kappa, t.v_free, t.kappa_jam);
        let n = vehicle_count(kappa, cfg);
        let mut vs = Vec::with_capacity(n);
        for _ in 0..n {
            let along = rng.gen::<f64>() * seg.length;
            let lane = rng.gen_range(0..t.lanes);
            let lateral = (lane as f64 + 0.5) * t.lane_width;
            let class = if rng.gen::<f64>() < t.ds_fraction {
                LinkClass::DelaySensitive
            } else {
                LinkClass::NonDelaySensitive
            };
            vs.push(Vehicle { position: seg.point_at(along, lateral), class, speed });
        }
        subregions.push(vs);
    }
    VehicleLayout { subregions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flow_endpoints_and_vertex() {
        assert_eq!(greenshield_flow(0.0, 15.0, 2.0), 0.0);
        assert_eq!(greenshield_flow(2.0, 15.0, 2.0), 0.0);
        assert_eq!(greenshield_flow(1.0, 15.0, 2.0), 2.0 * 15.0 / 4.0);
    }

    #[test]
    fn speed_endpoints() {
        assert_eq!(greenshield_speed(0.0, 15.0, 2.0), 15.0);
        assert_eq!(greenshield_speed(2.0, 15.0, 2.0), 0.0);
        assert_eq!(greenshield_speed(1.0, 15.0, 2.0), 7.5);
        assert_eq!(greenshield_speed(3.0, 15.0, 2.0), 0.0);
    }

    #[test]
    fn jam_density_count() {
        let mut cfg = ScenarioConfig::default();
        cfg.traffic.segment_length = 100.0;
        cfg.traffic.lanes = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let layout = place_vehicles(&TdiVector([2.0, 0.0, 0.3, 1.0]), &cfg, &mut rng);
        assert_eq!(layout.subregions[0].len(), 200);
        assert!(layout.subregions[1].is_empty());
        assert_eq!(layout.subregions[2].len(), 30);
        assert!(layout.subregions[0].iter().all(|v| v.speed == 0.0));
    }
}
