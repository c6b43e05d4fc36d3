//! Channel realizations: log-distance path loss with log-normal shadowing
//! (held per TDI epoch) times i.i.d. Rayleigh small-scale fading per slot,
//! RB and transmit antenna.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::model::{LinkClass, ScenarioConfig};
use crate::mobility::VehicleLayout;

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Linear large-scale gain at `distance` metres with `shadow_db` of
/// shadowing. Distances below the reference distance are clamped to it.
pub fn large_scale_gain(distance: f64, shadow_db: f64, cfg: &ScenarioConfig) -> f64 {
    let c = &cfg.channel;
    let d = if distance <= 0.0 {
        log::warn!("non-positive distance {distance} clamped to the reference distance");
        c.reference_distance
    } else {
        distance.max(c.reference_distance)
    };
    let db = c.reference_gain_db - 10.0 * c.pathloss_exponent * (d / c.reference_distance).log10() + shadow_db;
    10f64.powf(db / 10.0)
}

pub fn sample_shadowing_db<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> f64 {
    let sd = cfg.channel.shadowing_std_db;
    if sd == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sd).expect("finite shadowing deviation").sample(rng)
}

/// `n_tx` i.i.d. CN(0,1) coefficients: real and imaginary parts are
/// independent N(0, 1/2).
pub fn sample_small_scale<R: Rng + ?Sized>(n_tx: usize, rng: &mut R) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n_tx)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * s, im * s)
        })
        .collect()
}

/// Σ_m |h_m|² for one draw of [`sample_small_scale`], consuming the same
/// random numbers without allocating.
pub fn fading_power<R: Rng + ?Sized>(n_tx: usize, rng: &mut R) -> f64 {
    let mut acc = 0.0;
    for _ in 0..n_tx {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        acc += 0.5 * (re * re + im * im);
    }
    acc
}

/// Epoch-constant part of the channel inside one subregion: distances,
/// shadowing and neighbourhoods.
#[derive(Debug, Clone)]
pub struct LargeScale {
    /// Gain from each vehicle to the base station.
    pub to_bs: Vec<f64>,
    /// Symmetric vehicle-to-vehicle gain, row-major.
    pub pair: Vec<f64>,
    /// Vehicles inside each vehicle's broadcast radius, ascending index.
    pub neighbors: Vec<Vec<usize>>,
    n: usize,
}

impl LargeScale {
    /// Shadowing is drawn once per vehicle-BS pair and once per unordered
    /// vehicle pair.
    pub fn build<R: Rng + ?Sized>(layout: &VehicleLayout, subregion: usize, cfg: &ScenarioConfig, rng: &mut R) -> Self {
        let vs = layout.vehicles(subregion);
        let n = vs.len();
        let mut to_bs = Vec::with_capacity(n);
        for v in vs {
            let sh = sample_shadowing_db(cfg, rng);
            to_bs.push(large_scale_gain(distance(v.position, [0.0, 0.0]), sh, cfg));
        }
        let mut pair = vec![0.0; n * n];
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = distance(vs[i].position, vs[j].position);
                let sh = sample_shadowing_db(cfg, rng);
                let g = large_scale_gain(d, sh, cfg);
                pair[i * n + j] = g;
                pair[j * n + i] = g;
                if d <= cfg.traffic.neighbor_radius {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
        for nb in neighbors.iter_mut() {
            nb.sort_unstable();
        }
        Self { to_bs, pair, neighbors, n }
    }

    /// Layout-free construction for fixtures: explicit gains and
    /// neighbourhoods.
    pub fn from_parts(to_bs: Vec<f64>, pair: Vec<f64>, neighbors: Vec<Vec<usize>>) -> Self {
        let n = to_bs.len();
        assert_eq!(pair.len(), n * n);
        assert_eq!(neighbors.len(), n);
        Self { to_bs, pair, neighbors, n }
    }

    pub fn n_vehicles(&self) -> usize {
        self.n
    }

    pub fn pair_gain(&self, i: usize, j: usize) -> f64 {
        self.pair[i * self.n + j]
    }
}

/// Gain powers of one scheduled link for the current slot.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub class: LinkClass,
    /// |H_i0^k|² for every RB k.
    pub to_bs: Vec<f64>,
    /// |H_ij^k|² for every RB k and neighbour j; empty for
    /// non-delay-sensitive links.
    pub to_neighbors: Vec<Vec<f64>>,
}

impl LinkGains {
    pub fn n_neighbors(&self) -> usize {
        self.to_neighbors.first().map_or(0, |v| v.len())
    }
}

/// Per-slot CSI of a subregion's scheduled links: non-delay-sensitive links
/// first, then delay-sensitive ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub n_rbs: usize,
    pub n_nds: usize,
    pub links: Vec<LinkGains>,
}

impl ChannelRealization {
    pub fn n_ds(&self) -> usize {
        self.links.len() - self.n_nds
    }
}

/// Draws every gain one link needs on `n_rbs` RBs: to the base station and,
/// for a delay-sensitive transmitter, to each neighbour.
pub fn realize_link<R: Rng + ?Sized>(
    vehicle: usize,
    class: LinkClass,
    large: &LargeScale,
    n_rbs: usize,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> LinkGains {
    let n_tx = cfg.radio.n_tx_antennas;
    let fading = cfg.channel.small_scale_fading;
    let draw = |l: f64, rng: &mut R| if fading { l * fading_power(n_tx, rng) } else { l * n_tx as f64 };
    let nbs: &[usize] = if class == LinkClass::DelaySensitive { &large.neighbors[vehicle] } else { &[] };
    let mut to_bs = Vec::with_capacity(n_rbs);
    let mut to_neighbors = Vec::with_capacity(if nbs.is_empty() { 0 } else { n_rbs });
    for _ in 0..n_rbs {
        to_bs.push(draw(large.to_bs[vehicle], rng));
        if class == LinkClass::DelaySensitive {
            let row: Vec<f64> = nbs.iter().map(|&j| draw(large.pair_gain(vehicle, j), rng)).collect();
            to_neighbors.push(row);
        }
    }
    if class == LinkClass::DelaySensitive && nbs.is_empty() {
        to_neighbors = vec![Vec::new(); n_rbs];
    }
    LinkGains { class, to_bs, to_neighbors }
}

/// Realizes the channels of the scheduled links `(vehicle, class)` from a
/// single stream. Non-delay-sensitive links must precede delay-sensitive ones.
pub fn realize_channels<R: Rng + ?Sized>(
    large: &LargeScale,
    links: &[(usize, LinkClass)],
    n_rbs: usize,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> ChannelRealization {
    let n_nds = links.iter().take_while(|(_, c)| *c == LinkClass::NonDelaySensitive).count();
    assert!(
        links[n_nds..].iter().all(|(_, c)| *c == LinkClass::DelaySensitive),
        "non-delay-sensitive links must come first"
    );
    let links = links.iter().map(|&(v, c)| realize_link(v, c, large, n_rbs, cfg, rng)).collect();
    ChannelRealization { n_rbs, n_nds, links }
}

fn gamma_cdf_int(shape: usize, x: f64) -> f64 {
    // Erlang CDF: 1 - e^{-x} Σ_{k<shape} x^k / k!
    if x <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..shape {
        term *= x / k as f64;
        sum += term;
    }
    1.0 - (-x).exp() * sum
}

/// Equiprobable quantization of the small-scale power Σ|h_m|² (Erlang with
/// shape `n_tx`): each level is the conditional mean of its probability
/// slice, so the quantized law keeps the mean `n_tx`.
pub fn fading_levels(n_tx: usize, levels: usize) -> Vec<f64> {
    let quantile = |p: f64| {
        if p >= 1.0 {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while gamma_cdf_int(n_tx, hi) < p {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gamma_cdf_int(n_tx, mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let partial_mean = |x: f64| if x.is_infinite() { n_tx as f64 } else { n_tx as f64 * gamma_cdf_int(n_tx + 1, x) };
    let w = 1.0 / levels as f64;
    (0..levels)
        .map(|i| {
            let a = quantile(i as f64 * w);
            let b = quantile((i + 1) as f64 * w);
            (partial_mean(b) - partial_mean(a)) / w
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_distance_gives_reference_gain() {
        let cfg = ScenarioConfig::default();
        let g = large_scale_gain(1.0, 0.0, &cfg);
        assert!((g - 10f64.powf(-4.79)).abs() < 1e-18);
    }

    #[test]
    fn doubling_distance_scales_by_power_law() {
        let cfg = ScenarioConfig::default();
        let r = large_scale_gain(40.0, 0.0, &cfg) / large_scale_gain(20.0, 0.0, &cfg);
        assert!((r - 2f64.powf(-3.68)).abs() < 1e-12);
    }

    #[test]
    fn non_positive_distance_clamps() {
        let cfg = ScenarioConfig::default();
        assert_eq!(large_scale_gain(-3.0, 0.0, &cfg), large_scale_gain(1.0, 0.0, &cfg));
    }

    #[test]
    fn quantized_levels_keep_mean() {
        for n in 1..=3 {
            for lv in 1..=4 {
                let l = fading_levels(n, lv);
                let mean = l.iter().sum::<f64>() / lv as f64;
                assert!((mean - n as f64).abs() < 1e-9, "n={n} lv={lv} mean={mean}");
                assert!(l.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
