//! Per-slot link quality (SINR, PRR, rate), departures, and running averages.
//!
//! Allocations are passed as `rb_of_link` slices, where entry `l` is the RB
//! held by link `l` (see [`crate::model::AllocationMatrix::assignment`]).

use crate::channel::ChannelRealization;
use crate::model::{LogBase, ScenarioConfig};
use crate::queue::departures_from_rate;

fn co_channel_nds_power(k: usize, rb_of_link: &[Option<usize>], ch: &ChannelRealization, p: f64) -> f64 {
    let mut acc = 0.0;
    for m in 0..ch.n_nds {
        if rb_of_link[m] == Some(k) {
            acc += p * ch.links[m].to_bs[k];
        }
    }
    acc
}

fn co_channel_ds_power(k: usize, rb_of_link: &[Option<usize>], ch: &ChannelRealization, p: f64) -> f64 {
    let mut acc = 0.0;
    for j in ch.n_nds..ch.links.len() {
        if rb_of_link[j] == Some(k) {
            let worst = ch.links[j].to_neighbors[k].iter().copied().fold(0.0, f64::max);
            acc += p * worst;
        }
    }
    acc
}

/// SINR at neighbour `j` of delay-sensitive link `i`. Interference is the
/// co-channel non-delay-sensitive uplink power received at the base station.
pub fn sinr_ds(i: usize, j: usize, rb_of_link: &[Option<usize>], ch: &ChannelRealization, cfg: &ScenarioConfig) -> f64 {
    let Some(k) = rb_of_link[i] else { return 0.0 };
    let p = cfg.radio.tx_power;
    let signal = p * ch.links[i].to_neighbors[k][j];
    signal / (cfg.radio.noise_power + co_channel_nds_power(k, rb_of_link, ch, p))
}

/// Smallest neighbour SINR of link `i`; `None` when it has no neighbours.
pub fn min_sinr_ds(i: usize, rb_of_link: &[Option<usize>], ch: &ChannelRealization, cfg: &ScenarioConfig) -> Option<f64> {
    let n = ch.links[i].n_neighbors();
    if n == 0 {
        return None;
    }
    let Some(k) = rb_of_link[i] else { return Some(0.0) };
    let p = cfg.radio.tx_power;
    let g = ch.links[i].to_neighbors[k].iter().copied().fold(f64::INFINITY, f64::min);
    Some(p * g / (cfg.radio.noise_power + co_channel_nds_power(k, rb_of_link, ch, p)))
}

/// Fraction of neighbours of link `i` whose SINR meets the threshold. A link
/// with no neighbours cannot fail and scores 1.
pub fn prr(i: usize, rb_of_link: &[Option<usize>], ch: &ChannelRealization, cfg: &ScenarioConfig) -> f64 {
    let n = ch.links[i].n_neighbors();
    if n == 0 {
        log::trace!("link {i} has no neighbours; PRR taken as 1");
        return 1.0;
    }
    let Some(k) = rb_of_link[i] else { return 0.0 };
    let p = cfg.radio.tx_power;
    let denom = cfg.radio.noise_power + co_channel_nds_power(k, rb_of_link, ch, p);
    let th = cfg.qos.sinr_threshold;
    let ok = ch.links[i].to_neighbors[k].iter().filter(|&&g| p * g / denom >= th).count();
    ok as f64 / n as f64
}

/// SINR of non-delay-sensitive link `i` at the base station, where each
/// co-channel broadcaster counts with its strongest gain towards its own
/// neighbours.
pub fn sinr_nds(i: usize, rb_of_link: &[Option<usize>], ch: &ChannelRealization, cfg: &ScenarioConfig) -> f64 {
    let Some(k) = rb_of_link[i] else { return 0.0 };
    let p = cfg.radio.tx_power;
    p * ch.links[i].to_bs[k] / (cfg.radio.noise_power + co_channel_ds_power(k, rb_of_link, ch, p))
}

pub fn shannon_rate(sinr: f64, cfg: &ScenarioConfig) -> f64 {
    let b = cfg.radio.bandwidth_per_rb;
    match cfg.radio.log_base {
        LogBase::Two => b * (1.0 + sinr).log2(),
        LogBase::Natural => b * (1.0 + sinr).ln(),
    }
}

pub fn rate_nds(i: usize, rb_of_link: &[Option<usize>], ch: &ChannelRealization, cfg: &ScenarioConfig) -> f64 {
    if rb_of_link[i].is_none() {
        return 0.0;
    }
    shannon_rate(sinr_nds(i, rb_of_link, ch, cfg), cfg)
}

/// Packets link `i` can remove from its queue in this slot, capped at
/// `cap`. A broadcaster sends only if every neighbour clears the SINR
/// threshold, at the rate its weakest neighbour supports; with no neighbours
/// its whole queue leaves.
pub fn link_departures(i: usize, rb_of_link: &[Option<usize>], ch: &ChannelRealization, cfg: &ScenarioConfig, cap: u32) -> u32 {
    if rb_of_link[i].is_none() {
        return 0;
    }
    let slot = cfg.timing.slot_duration;
    let d = if i < ch.n_nds {
        departures_from_rate(rate_nds(i, rb_of_link, ch, cfg), slot, cfg.queue.packet_size_nds)
    } else {
        match min_sinr_ds(i, rb_of_link, ch, cfg) {
            None => cap,
            Some(s) if s >= cfg.qos.sinr_threshold => {
                departures_from_rate(shannon_rate(s, cfg), slot, cfg.queue.packet_size_ds)
            }
            Some(_) => 0,
        }
    };
    d.min(cap)
}

/// Little's-law delay readout: time-average queue over the arrival rate.
/// Undefined (`None`) when the arrival rate is zero or nothing was observed.
pub fn average_delay(mean_queue: Option<f64>, arrival_rate: f64) -> Option<f64> {
    let q = mean_queue?;
    if arrival_rate > 0.0 {
        Some(q / arrival_rate)
    } else {
        None
    }
}

/// Running sums for the time-averaged readouts. Samples are taken per
/// vehicle per slot; PRR and rate only over links that hold an RB.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsAccumulator {
    pub slots: u64,
    pub ds_queue_sum: f64,
    pub ds_samples: u64,
    pub overflow_samples: u64,
    pub vehicle_samples: u64,
    pub prr_sum: f64,
    pub prr_samples: u64,
    pub rate_sum: f64,
    pub rate_samples: u64,
}

impl MetricsAccumulator {
    pub fn record_ds_queue(&mut self, q: u32, capacity: u32) {
        self.ds_queue_sum += q as f64;
        self.ds_samples += 1;
        self.record_queue(q, capacity);
    }

    pub fn record_nds_queue(&mut self, q: u32, capacity: u32) {
        self.record_queue(q, capacity);
    }

    fn record_queue(&mut self, q: u32, capacity: u32) {
        self.vehicle_samples += 1;
        if q >= capacity {
            self.overflow_samples += 1;
        }
    }

    pub fn record_prr(&mut self, p: f64) {
        debug_assert!((0.0..=1.0).contains(&p));
        self.prr_sum += p;
        self.prr_samples += 1;
    }

    pub fn record_rate(&mut self, r: f64) {
        self.rate_sum += r;
        self.rate_samples += 1;
    }

    pub fn end_slot(&mut self) {
        self.slots += 1;
    }

    pub fn merge(&mut self, other: &MetricsAccumulator) {
        self.slots += other.slots;
        self.ds_queue_sum += other.ds_queue_sum;
        self.ds_samples += other.ds_samples;
        self.overflow_samples += other.overflow_samples;
        self.vehicle_samples += other.vehicle_samples;
        self.prr_sum += other.prr_sum;
        self.prr_samples += other.prr_samples;
        self.rate_sum += other.rate_sum;
        self.rate_samples += other.rate_samples;
    }

    fn ratio(num: f64, den: u64) -> Option<f64> {
        (den > 0).then(|| num / den as f64)
    }

    pub fn mean_ds_queue(&self) -> Option<f64> {
        Self::ratio(self.ds_queue_sum, self.ds_samples)
    }

    pub fn mean_delay(&self, arrival_rate: f64) -> Option<f64> {
        average_delay(self.mean_ds_queue(), arrival_rate)
    }

    pub fn mean_prr(&self) -> Option<f64> {
        Self::ratio(self.prr_sum, self.prr_samples)
    }

    pub fn mean_rate(&self) -> Option<f64> {
        Self::ratio(self.rate_sum, self.rate_samples)
    }

    pub fn overflow_frac(&self) -> Option<f64> {
        Self::ratio(self.overflow_samples as f64, self.vehicle_samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkGains;
    use crate::model::LinkClass;

    fn unit_cfg() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.radio.noise_power = 1.0;
        cfg.radio.tx_power = 1.0;
        cfg
    }

    fn ds(to_nb: Vec<f64>) -> LinkGains {
        LinkGains { class: LinkClass::DelaySensitive, to_bs: vec![1.0], to_neighbors: vec![to_nb] }
    }

    fn nds(g: f64) -> LinkGains {
        LinkGains { class: LinkClass::NonDelaySensitive, to_bs: vec![g], to_neighbors: vec![] }
    }

    #[test]
    fn unassigned_link_scores_zero() {
        let ch = ChannelRealization { n_rbs: 1, n_nds: 0, links: vec![ds(vec![3.0])] };
        let cfg = unit_cfg();
        assert_eq!(sinr_ds(0, 0, &[None], &ch, &cfg), 0.0);
        assert_eq!(prr(0, &[None], &ch, &cfg), 0.0);
    }

    #[test]
    fn lone_broadcaster_sinr() {
        let ch = ChannelRealization { n_rbs: 1, n_nds: 0, links: vec![ds(vec![3.0])] };
        assert_eq!(sinr_ds(0, 0, &[Some(0)], &ch, &unit_cfg()), 3.0);
    }

    #[test]
    fn nds_rate_anchor() {
        let ch = ChannelRealization { n_rbs: 1, n_nds: 1, links: vec![nds(1.0)] };
        assert_eq!(rate_nds(0, &[Some(0)], &ch, &unit_cfg()), 180e3);
        assert_eq!(rate_nds(0, &[None], &ch, &unit_cfg()), 0.0);
    }

    #[test]
    fn delay_readout() {
        assert_eq!(average_delay(Some(2.0), 4.0), Some(0.5));
        assert_eq!(average_delay(Some(0.0), 4.0), Some(0.0));
        assert_eq!(average_delay(Some(1.0), 0.0), None);
    }
}
