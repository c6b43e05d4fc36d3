//! Finite packet queues, arrival processes and the rate-to-departure map.

use rand::Rng;
use std::collections::VecDeque;

use crate::model::ArrivalKind;

/// One slot of queue evolution: serve first, then admit arrivals up to the
/// capacity.
pub fn step_queue(q: u32, departed: u32, arrived: u32, capacity: u32) -> u32 {
    capacity.min(q.saturating_sub(departed).saturating_add(arrived))
}

/// Whole packets a link can send in one slot at `rate` bit/s.
pub fn departures_from_rate(rate: f64, slot: f64, packet_size_bytes: u32) -> u32 {
    if !(rate > 0.0) {
        return 0;
    }
    let pkts = rate * slot / (8.0 * packet_size_bytes as f64);
    // the small guard keeps exact multiples from flooring one packet short
    (pkts + 1e-9).floor().min(u32::MAX as f64) as u32
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalProcess {
    pub kind: ArrivalKind,
    /// Expected packets per slot.
    pub mean_per_slot: f64,
}

impl ArrivalProcess {
    pub fn new(kind: ArrivalKind, rate_pkt_s: f64, slot: f64) -> Self {
        let mean_per_slot = rate_pkt_s * slot;
        if kind == ArrivalKind::Bernoulli {
            assert!(mean_per_slot <= 1.0, "Bernoulli arrivals need at most one packet per slot on average");
        }
        Self { kind, mean_per_slot }
    }

    /// Inverse-CDF draw from a uniform in [0, 1). Feeding the same uniform to
    /// processes with different means gives coupled samples.
    pub fn sample_from_uniform(&self, u: f64) -> u32 {
        let m = self.mean_per_slot;
        if m <= 0.0 {
            return 0;
        }
        match self.kind {
            ArrivalKind::Bernoulli => u32::from(u < m),
            ArrivalKind::Poisson => {
                let mut k = 0u32;
                let mut p = (-m).exp();
                let mut cdf = p;
                while u >= cdf && k < 10_000 {
                    k += 1;
                    p *= m / k as f64;
                    cdf += p;
                    if p == 0.0 && cdf < u {
                        break;
                    }
                }
                k
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.sample_from_uniform(rng.gen::<f64>())
    }

    /// Probability of `0..=max` arrivals in a slot with the tail folded into
    /// `max`.
    pub fn pmf(&self, max: u32) -> Vec<f64> {
        let m = self.mean_per_slot;
        let n = max as usize + 1;
        let mut out = vec![0.0; n];
        if m <= 0.0 {
            out[0] = 1.0;
            return out;
        }
        match self.kind {
            ArrivalKind::Bernoulli => {
                out[0] = 1.0 - m;
                if n > 1 {
                    out[1] += m;
                } else {
                    out[0] = 1.0;
                }
            }
            ArrivalKind::Poisson => {
                let mut p = (-m).exp();
                let mut acc = 0.0;
                for (k, slot) in out.iter_mut().enumerate().take(n - 1) {
                    if k > 0 {
                        p *= m / k as f64;
                    }
                    *slot = p;
                    acc += p;
                }
                out[n - 1] = (1.0 - acc).max(0.0);
            }
        }
        out
    }
}

pub fn sample_arrivals<R: Rng + ?Sized>(proc: &ArrivalProcess, n_slots: usize, rng: &mut R) -> Vec<u32> {
    (0..n_slots).map(|_| proc.sample(rng)).collect()
}

/// Queue lengths of a set of vehicles together with their mean arrival rates.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueState {
    pub lengths: Vec<u32>,
    pub capacity: u32,
    /// packets/s.
    pub arrival_means: Vec<f64>,
}

impl QueueState {
    pub fn new(n: usize, capacity: u32, arrival_mean: f64) -> Self {
        Self { lengths: vec![0; n], capacity, arrival_means: vec![arrival_mean; n] }
    }

    pub fn step(&mut self, departed: &[u32], arrived: &[u32]) {
        for ((q, &d), &a) in self.lengths.iter_mut().zip(departed).zip(arrived) {
            *q = step_queue(*q, d, a, self.capacity);
        }
    }
}

/// FIFO of packet arrival stamps, used to measure sojourn times directly.
#[derive(Debug, Clone, Default)]
pub struct PacketQueue {
    stamps: VecDeque<u64>,
    pub capacity: u32,
    pub delivered: u64,
    pub dropped: u64,
    /// Sum of sojourn times in slots over delivered packets.
    pub sojourn_slots: u64,
}

impl PacketQueue {
    pub fn new(capacity: u32) -> Self {
        Self { capacity, ..Default::default() }
    }

    pub fn len(&self) -> u32 {
        self.stamps.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.stamps.is_empty()
    }

    /// Serves up to `n` head packets during slot `slot`.
    pub fn depart(&mut self, n: u32, slot: u64) {
        for _ in 0..n {
            match self.stamps.pop_front() {
                Some(t) => {
                    // counted in the queue from slot t through slot `slot`
                    self.sojourn_slots += slot + 1 - t;
                    self.delivered += 1;
                }
                None => break,
            }
        }
    }

    /// Admits `n` packets arriving at the end of slot `slot`; those beyond
    /// capacity are dropped.
    pub fn arrive(&mut self, n: u32, slot: u64) {
        for _ in 0..n {
            if self.len() < self.capacity {
                self.stamps.push_back(slot + 1);
            } else {
                self.dropped += 1;
            }
        }
    }
}

/// Result of a single-queue run that tracks both the time-average length and
/// per-packet sojourn times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LittleReadout {
    pub mean_queue: f64,
    /// Q̄ / Ā in seconds.
    pub little_delay: f64,
    /// Mean per-packet sojourn in seconds.
    pub sojourn_delay: f64,
    pub delivered: u64,
    pub dropped: u64,
}

/// Single queue with i.i.d. arrivals and a per-slot service capacity drawn
/// from `service`; statistics start after `warmup` slots.
pub fn little_fixture<R: Rng + ?Sized>(
    arrivals: &ArrivalProcess,
    service: &mut dyn FnMut(&mut R) -> u32,
    capacity: u32,
    slot: f64,
    n_slots: u64,
    warmup: u64,
    rng: &mut R,
) -> LittleReadout {
    let mut q = PacketQueue::new(capacity);
    let mut area = 0u64;
    let mut measured = 0u64;
    let mut base_delivered = 0;
    let mut base_sojourn = 0;
    let mut base_dropped = 0;
    for t in 0..n_slots {
        if t == warmup {
            base_delivered = q.delivered;
            base_sojourn = q.sojourn_slots;
            base_dropped = q.dropped;
        }
        if t >= warmup {
            area += q.len() as u64;
            measured += 1;
        }
        let mu = service(rng);
        q.depart(mu, t);
        let a = arrivals.sample(rng);
        q.arrive(a, t);
    }
    let mean_queue = area as f64 / measured.max(1) as f64;
    let rate = arrivals.mean_per_slot / slot;
    let delivered = q.delivered - base_delivered;
    LittleReadout {
        mean_queue,
        little_delay: mean_queue / rate,
        sojourn_delay: (q.sojourn_slots - base_sojourn) as f64 / delivered.max(1) as f64 * slot,
        delivered,
        dropped: q.dropped - base_dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eq_examples() {
        assert_eq!(step_queue(5, 2, 3, 10), 6);
        assert_eq!(step_queue(9, 0, 4, 10), 10);
        assert_eq!(step_queue(1, 5, 0, 10), 0);
    }

    #[test]
    fn rate_to_packets() {
        assert_eq!(departures_from_rate(0.0, 1e-3, 20), 0);
        assert_eq!(departures_from_rate(160e3, 1e-3, 20), 1);
        assert_eq!(departures_from_rate(1.9 * 160e3, 1e-3, 20), 1);
    }

    #[test]
    fn pmf_sums_to_one() {
        let p = ArrivalProcess::new(ArrivalKind::Poisson, 2000.0, 1e-3).pmf(3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let b = ArrivalProcess::new(ArrivalKind::Bernoulli, 300.0, 1e-3).pmf(2);
        assert_eq!(b, vec![0.7, 0.3, 0.0]);
    }

    #[test]
    fn inverse_cdf_matches_pmf_boundaries() {
        let p = ArrivalProcess::new(ArrivalKind::Poisson, 1000.0, 1e-3);
        let e = (-1.0f64).exp();
        assert_eq!(p.sample_from_uniform(e - 1e-12), 0);
        assert_eq!(p.sample_from_uniform(e + 1e-12), 1);
        assert_eq!(p.sample_from_uniform(2.0 * e + 1e-12), 2);
    }
}
