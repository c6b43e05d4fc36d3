use super::cost::LagrangeMultipliers;

/// Time averages measured over one update period, indexed like the
/// multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredAverages {
    pub prr: Vec<f64>,
    /// bit/s.
    pub rate: Vec<f64>,
    /// Q̄/Ā per delay-sensitive position, s.
    pub ds_delay: Vec<f64>,
    /// Q̄/Ā per non-delay-sensitive position, s.
    pub nds_delay: Vec<f64>,
    /// Fraction of slots each link spent at capacity.
    pub overflow: Vec<f64>,
}

/// Projected subgradient ascent on the dual variables.
pub fn update_multipliers(
    m: &LagrangeMultipliers,
    avg: &MeasuredAverages,
    step: f64,
    prr_floor: f64,
    rate_floor: f64,
) -> LagrangeMultipliers {
    let up = |x: f64, g: f64| (x + step * g).max(0.0);
    let beta = m.beta.iter().zip(&avg.prr).map(|(&b, &p)| up(b, prr_floor - p)).collect();
    let gamma = m.gamma.iter().zip(&avg.rate).map(|(&g, &r)| up(g, rate_floor - r)).collect();
    let eta = m.eta.iter().zip(&avg.overflow).map(|(&e, &o)| up(e, o)).collect();
    let lambda = if avg.ds_delay.is_empty() || avg.nds_delay.is_empty() {
        m.lambda
    } else {
        let max_ds = avg.ds_delay.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_nds = avg.nds_delay.iter().copied().fold(f64::INFINITY, f64::min);
        up(m.lambda, max_ds - min_nds)
    };
    LagrangeMultipliers { beta, gamma, eta, lambda }
}

/// Diminishing step for the `epoch`-th update (1-based).
pub fn dual_step(base: f64, epoch: usize) -> f64 {
    base / (epoch.max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_keeps_zero_multipliers() {
        let m = LagrangeMultipliers::zeros(1, 1);
        let avg = MeasuredAverages {
            prr: vec![0.99],
            rate: vec![2e6],
            ds_delay: vec![0.001],
            nds_delay: vec![0.01],
            overflow: vec![0.0, 0.0],
        };
        assert_eq!(update_multipliers(&m, &avg, 1.0, 0.9, 1e6), m);
    }

    #[test]
    fn prr_violation_raises_beta() {
        let m = LagrangeMultipliers::zeros(0, 1);
        let avg = MeasuredAverages { prr: vec![0.8], rate: vec![], ds_delay: vec![0.0], nds_delay: vec![], overflow: vec![0.0] };
        let out = update_multipliers(&m, &avg, 1.0, 0.9, 0.0);
        assert!((out.beta[0] - 0.1).abs() < 1e-15);
    }
}
