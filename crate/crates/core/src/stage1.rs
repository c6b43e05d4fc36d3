//! Inter-subregion share allocation driven by traffic density.
//!
//! Each subregion's utility is `w(κ) ln(1 + c2 ε)` with the Gaussian weight
//! `w(κ) = exp(-(κ - κ_jam/2)² / c1)`. Maximising the sum over the simplex is
//! a concave problem whose KKT point is a water-filling rule with a single
//! level ω, found by growing the active set in threshold order.

use crate::mobility::{TdiVector, N_SUBREGIONS};
use crate::model::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    pub c1: f64,
    pub c2: f64,
    pub kappa_jam: f64,
}

impl UtilityParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self { c1: cfg.utility.c1, c2: cfg.utility.c2, kappa_jam: cfg.traffic.kappa_jam }
    }
}

impl Default for UtilityParams {
    fn default() -> Self {
        Self { c1: 0.5, c2: 10.0, kappa_jam: 2.0 }
    }
}

/// Gaussian density weight, peaking at 1 for κ = κ_jam/2.
pub fn density_weight(kappa: f64, p: &UtilityParams) -> f64 {
    let d = kappa - p.kappa_jam / 2.0;
    (-(d * d) / p.c1).exp()
}

pub fn utility(kappa: f64, epsilon: f64, p: &UtilityParams) -> f64 {
    density_weight(kappa, p) * (p.c2 * epsilon).ln_1p()
}

pub fn utility_sum(tdi: &TdiVector, epsilon: &[f64; N_SUBREGIONS], p: &UtilityParams) -> f64 {
    tdi.0.iter().zip(epsilon).map(|(&k, &e)| utility(k, e, p)).sum()
}

pub fn lagrange_threshold(kappa: f64, p: &UtilityParams) -> f64 {
    p.c2 * density_weight(kappa, p)
}

/// Level that exactly exhausts the budget when the first `m` weights (sorted
/// descending) are active.
pub fn omega_candidate(sorted_weights: &[f64], m: usize, p: &UtilityParams) -> f64 {
    assert!(m >= 1 && m <= sorted_weights.len(), "m must lie in 1..=len");
    let s: f64 = sorted_weights[..m].iter().sum();
    s / (1.0 + m as f64 / p.c2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShareVector {
    pub epsilon: [f64; N_SUBREGIONS],
    /// Number of subregions with a positive share.
    pub active_count: usize,
    /// Water level ω.
    pub multiplier: f64,
}

/// Subregion indices by descending threshold; equal thresholds keep id
/// order.
pub fn threshold_order(tdi: &TdiVector, p: &UtilityParams) -> [usize; N_SUBREGIONS] {
    let mut order = [0, 1, 2, 3];
    let th: Vec<f64> = tdi.0.iter().map(|&k| lagrange_threshold(k, p)).collect();
    order.sort_by(|&a, &b| th[b].total_cmp(&th[a]));
    order
}

pub fn allocate_shares(tdi: &TdiVector, p: &UtilityParams) -> ShareVector {
    let w: Vec<f64> = tdi.0.iter().map(|&k| density_weight(k, p)).collect();
    let order = threshold_order(tdi, p);
    let sorted: Vec<f64> = order.iter().map(|&i| w[i]).collect();

    let mut active = 0;
    let mut omega = f64::INFINITY;
    for m in 1..=N_SUBREGIONS {
        let cand = omega_candidate(&sorted, m, p);
        if cand < p.c2 * sorted[m - 1] {
            active = m;
            omega = cand;
        } else {
            break;
        }
    }
    debug_assert!(active >= 1);

    let mut raw = [0.0; N_SUBREGIONS];
    for (r, &wi) in raw.iter_mut().zip(&w) {
        *r = ((p.c2 / omega * wi - 1.0) / p.c2).max(0.0);
    }
    // the raw shares already sum to one up to rounding; renormalising with a
    // balanced sum makes equal densities come out as exact quarters
    let total = (raw[0] + raw[1]) + (raw[2] + raw[3]);
    let mut epsilon = [0.0; N_SUBREGIONS];
    for (e, r) in epsilon.iter_mut().zip(raw) {
        *e = r / total;
    }
    ShareVector { epsilon, active_count: active, multiplier: omega }
}

/// Largest KKT violations of a share vector: stationarity on the active set
/// and dual feasibility on the inactive set.
pub fn kkt_residuals(tdi: &TdiVector, shares: &ShareVector, p: &UtilityParams) -> (f64, f64) {
    let mut stat: f64 = 0.0;
    let mut slack: f64 = 0.0;
    for (&k, &e) in tdi.0.iter().zip(&shares.epsilon) {
        let w = density_weight(k, p);
        if e > 0.0 {
            stat = stat.max((p.c2 * w / (1.0 + p.c2 * e) - shares.multiplier).abs());
        } else {
            slack = slack.max(p.c2 * w - shares.multiplier);
        }
    }
    (stat, slack.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utility_anchors() {
        let p = UtilityParams::default();
        assert_eq!(utility(0.3, 0.0, &p), 0.0);
        assert!((utility(1.0, 0.2, &p) - 3.0f64.ln()).abs() < 1e-15);
        assert_eq!(utility(0.7, 0.4, &p), utility(1.3, 0.4, &p));
    }

    #[test]
    fn threshold_peak() {
        let p = UtilityParams::default();
        assert_eq!(lagrange_threshold(1.0, &p), 10.0);
        assert!(lagrange_threshold(0.9, &p) > lagrange_threshold(0.8, &p));
    }

    #[test]
    fn equal_densities_split_evenly() {
        let p = UtilityParams::default();
        for k in [0.0, 0.37, 1.0, 1.2] {
            let s = allocate_shares(&TdiVector([k; 4]), &p);
            assert_eq!(s.epsilon, [0.25; 4]);
            assert_eq!(s.active_count, 4);
        }
        let s = allocate_shares(&TdiVector([1.0; 4]), &p);
        let w = [1.0; 4];
        assert_eq!(s.multiplier, omega_candidate(&w, 4, &p));
    }

    #[test]
    fn first_candidate_always_admitted() {
        let p = UtilityParams::default();
        let w = [0.3];
        assert!(omega_candidate(&w, 1, &p) < p.c2 * 0.3);
    }
}
