use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::ConfigError;

/// Full scenario description. Every section has defaults, so an empty file is
/// a valid configuration; unknown keys are rejected at parse time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub rng_seed: u64,
    pub radio: RadioConfig,
    pub timing: TimingConfig,
    pub queue: QueueConfig,
    pub traffic: TrafficConfig,
    pub utility: UtilityConfig,
    pub qos: QosConfig,
    pub channel: ChannelConfig,
    pub stage2: Stage2Config,
    pub sim: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    /// RBs shared by the four subregions.
    pub total_rbs: usize,
    /// Hz.
    pub bandwidth_per_rb: f64,
    pub n_tx_antennas: usize,
    /// W, identical for every vehicle.
    pub tx_power: f64,
    /// W, thermal noise plus receiver noise figure over one RB.
    pub noise_power: f64,
    pub log_base: LogBase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    Two,
    Natural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingConfig {
    /// s.
    pub slot_duration: f64,
    /// s; must be a whole number of slots.
    pub tdi_update_interval: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QueueConfig {
    /// N_Q in packets.
    pub capacity: u32,
    /// bytes.
    pub packet_size_ds: u32,
    /// bytes.
    pub packet_size_nds: u32,
    pub arrivals: ArrivalKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalKind {
    Poisson,
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficConfig {
    pub kappa_jam: f64,
    /// m/s.
    pub v_free: f64,
    /// Length of each subregion's road segment, m.
    pub segment_length: f64,
    pub lanes: u32,
    /// m between adjacent lane centre lines.
    pub lane_width: f64,
    /// Distance from the base station to the start of each segment, m.
    pub segment_offset: f64,
    pub ds_fraction: f64,
    /// Broadcast neighbourhood radius, m.
    pub neighbor_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UtilityConfig {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QosConfig {
    /// Linear SINR threshold for a successful broadcast reception.
    pub sinr_threshold: f64,
    /// Per-vehicle PRR floor.
    pub prr_floor: f64,
    /// bit/s floor for non-delay-sensitive links.
    pub rate_floor: f64,
    /// Delay weights for the scheduled delay-sensitive positions; missing
    /// entries default to 1.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub pathloss_exponent: f64,
    /// dB gain at the reference distance.
    pub reference_gain_db: f64,
    /// m.
    pub reference_distance: f64,
    /// dB standard deviation; 0 disables shadowing.
    pub shadowing_std_db: f64,
    /// Levels per gain for the quantized full-state law.
    pub quantization_levels: usize,
    /// When false the small-scale term is replaced by its mean.
    pub small_scale_fading: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Stage2Config {
    /// Monte Carlo channel draws per planning problem.
    pub n_mc: usize,
    /// Channel scenarios in the full-state baseline.
    pub full_scenarios: usize,
    pub rvi_tolerance: f64,
    pub max_iterations: usize,
    /// Policy-evaluation sweeps between Bellman sweeps (0: plain relative
    /// value iteration).
    pub evaluation_sweeps: usize,
    pub action_cap: usize,
    /// Top-k non-delay-sensitive links scheduled per slot.
    pub max_nds_links: usize,
    /// Top-k delay-sensitive links scheduled per slot.
    pub max_ds_links: usize,
    /// Upper bound on the RBs a subregion schedules in one slot.
    pub max_rbs_per_subregion: usize,
    pub planning: PlanningMode,
    /// Base step of the projected subgradient update; 0 keeps the
    /// multipliers fixed.
    pub dual_step: f64,
    pub multipliers: MultiplierConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanningMode {
    /// Re-solve every subregion at every TDI epoch from that epoch's layout.
    PerEpoch,
    /// Solve once per (regime, shape, RB count, rate) from sampled layouts.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiplierConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub leftover: LeftoverMode,
    /// Fraction of slots discarded before metrics are read out.
    pub warmup_fraction: f64,
    /// TDI epochs per repetition.
    pub epochs: usize,
    /// Pinned densities; when set they replace sampling.
    pub pinned_tdi: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeftoverMode {
    LargestRemainder,
    StrictFloor,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            rng_seed: 2024,
            radio: RadioConfig::default(),
            timing: TimingConfig::default(),
            queue: QueueConfig::default(),
            traffic: TrafficConfig::default(),
            utility: UtilityConfig::default(),
            qos: QosConfig::default(),
            channel: ChannelConfig::default(),
            stage2: Stage2Config::default(),
            sim: SimConfig::default(),
        }
    }
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            total_rbs: 25,
            bandwidth_per_rb: 180e3,
            n_tx_antennas: 2,
            tx_power: 0.2,
            // -174 dBm/Hz over 180 kHz with a 9 dB noise figure
            noise_power: 5.69e-15,
            log_base: LogBase::Two,
        }
    }
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self { slot_duration: 1e-3, tdi_update_interval: 0.5 }
    }
}

impl Default for QueueConfig {
    fn default() -> Self {
        Self { capacity: 10, packet_size_ds: 20, packet_size_nds: 300, arrivals: ArrivalKind::Poisson }
    }
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            kappa_jam: 2.0,
            v_free: 15.0,
            segment_length: 20.0,
            lanes: 1,
            lane_width: 3.5,
            segment_offset: 10.0,
            ds_fraction: 0.5,
            neighbor_radius: 150.0,
        }
    }
}

impl Default for UtilityConfig {
    fn default() -> Self {
        Self { c1: 0.5, c2: 10.0 }
    }
}

impl Default for QosConfig {
    fn default() -> Self {
        Self {
            // 5 dB
            sinr_threshold: 3.1623,
            prr_floor: 0.9,
            rate_floor: 1e6,
            weights: Vec::new(),
        }
    }
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            pathloss_exponent: 3.68,
            // free space at 5.9 GHz, 1 m
            reference_gain_db: -47.9,
            reference_distance: 1.0,
            shadowing_std_db: 8.0,
            quantization_levels: 2,
            small_scale_fading: true,
        }
    }
}

impl Default for Stage2Config {
    fn default() -> Self {
        Self {
            n_mc: 200,
            full_scenarios: 200,
            rvi_tolerance: 1e-6,
            max_iterations: 100_000,
            evaluation_sweeps: 0,
            action_cap: 200_000,
            max_nds_links: 2,
            max_ds_links: 2,
            max_rbs_per_subregion: 2,
            planning: PlanningMode::PerEpoch,
            dual_step: 0.0,
            multipliers: MultiplierConfig::default(),
        }
    }
}

impl Default for MultiplierConfig {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 0.05, gamma: 1e-8, eta: 0.1, lambda: 0.0 }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { leftover: LeftoverMode::LargestRemainder, warmup_fraction: 0.1, epochs: 2, pinned_tdi: None }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn slots_per_epoch(&self) -> usize {
        (self.timing.tdi_update_interval / self.timing.slot_duration).round() as usize
    }

    /// Delay weight of the `pos`-th scheduled delay-sensitive position.
    pub fn ds_weight(&self, pos: usize) -> f64 {
        self.qos.weights.get(pos).copied().unwrap_or(self.stage2.multipliers.alpha)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, why: &str| Err(ConfigError::Invalid { key: key.to_string(), reason: why.to_string() });
        let t = &self.timing;
        if !(t.slot_duration > 0.0) {
            return bad("timing.slot_duration", "must be > 0");
        }
        let ratio = t.tdi_update_interval / t.slot_duration;
        if !(ratio >= 1.0) || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return bad("timing.tdi_update_interval", "must be a positive integer multiple of slot_duration");
        }
        if self.queue.capacity < 1 {
            return bad("queue.capacity", "must be >= 1");
        }
        if self.queue.packet_size_ds == 0 {
            return bad("queue.packet_size_ds", "must be >= 1");
        }
        if self.queue.packet_size_nds == 0 {
            return bad("queue.packet_size_nds", "must be >= 1");
        }
        if !(self.utility.c1 > 0.0) {
            return bad("utility.c1", "must be > 0");
        }
        if !(self.utility.c2 > 0.0) {
            return bad("utility.c2", "must be > 0");
        }
        if !(self.traffic.kappa_jam > 0.0) {
            return bad("traffic.kappa_jam", "must be > 0");
        }
        if !(self.traffic.v_free >= 0.0) {
            return bad("traffic.v_free", "must be >= 0");
        }
        if !(self.traffic.segment_length > 0.0) {
            return bad("traffic.segment_length", "must be > 0");
        }
        if self.traffic.lanes == 0 {
            return bad("traffic.lanes", "must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.traffic.ds_fraction) {
            return bad("traffic.ds_fraction", "must lie in [0, 1]");
        }
        if !(self.radio.tx_power >= 0.0) {
            return bad("radio.tx_power", "must be >= 0");
        }
        if !(self.radio.noise_power >= 0.0) {
            return bad("radio.noise_power", "must be >= 0");
        }
        if self.radio.total_rbs == 0 {
            return bad("radio.total_rbs", "must be >= 1");
        }
        if self.radio.n_tx_antennas == 0 {
            return bad("radio.n_tx_antennas", "must be >= 1");
        }
        if !(self.radio.bandwidth_per_rb > 0.0) {
            return bad("radio.bandwidth_per_rb", "must be > 0");
        }
        if !(self.qos.sinr_threshold >= 0.0) {
            return bad("qos.sinr_threshold", "must be >= 0");
        }
        if self.channel.quantization_levels == 0 {
            return bad("channel.quantization_levels", "must be >= 1");
        }
        if !(self.channel.reference_distance > 0.0) {
            return bad("channel.reference_distance", "must be > 0");
        }
        let s2 = &self.stage2;
        if s2.n_mc == 0 {
            return bad("stage2.n_mc", "must be >= 1");
        }
        if s2.full_scenarios == 0 {
            return bad("stage2.full_scenarios", "must be >= 1");
        }
        if !(s2.rvi_tolerance > 0.0) {
            return bad("stage2.rvi_tolerance", "must be > 0");
        }
        if !(s2.dual_step >= 0.0) {
            return bad("stage2.dual_step", "must be >= 0");
        }
        let m = &s2.multipliers;
        for (key, v) in [("alpha", m.alpha), ("beta", m.beta), ("gamma", m.gamma), ("eta", m.eta), ("lambda", m.lambda)] {
            if !(v >= 0.0) {
                return bad(&format!("stage2.multipliers.{key}"), "must be >= 0");
            }
        }
        if !(0.0..1.0).contains(&self.sim.warmup_fraction) {
            return bad("sim.warmup_fraction", "must lie in [0, 1)");
        }
        if self.sim.epochs == 0 {
            return bad("sim.epochs", "must be >= 1");
        }
        if let Some(k) = self.sim.pinned_tdi {
            if k.iter().any(|v| !(*v >= 0.0)) {
                return bad("sim.pinned_tdi", "densities must be >= 0");
            }
        }
        Ok(())
    }
}
