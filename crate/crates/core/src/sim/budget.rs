use crate::mobility::N_SUBREGIONS;
use crate::model::LeftoverMode;

/// RBs per subregion: `floor(ε_i N)`, with the flooring leftovers handed out
/// one at a time by largest fractional remainder (ties to the lower index)
/// unless strict flooring is requested.
pub fn budget_rbs(shares: &[f64; N_SUBREGIONS], total: usize, mode: LeftoverMode) -> [usize; N_SUBREGIONS] {
    let mut out = [0usize; N_SUBREGIONS];
    let mut rem = [0.0; N_SUBREGIONS];
    for i in 0..N_SUBREGIONS {
        let exact = shares[i] * total as f64;
        let f = exact.floor();
        out[i] = f as usize;
        rem[i] = exact - f;
    }
    let used: usize = out.iter().sum();
    if mode == LeftoverMode::StrictFloor || used >= total {
        return out;
    }
    let mut order = [0, 1, 2, 3];
    order.sort_by(|&a, &b| rem[b].total_cmp(&rem[a]).then(a.cmp(&b)));
    let leftover = total - used;
    for &i in order.iter().take(leftover) {
        if rem[i] > 0.0 {
            out[i] += 1;
        }
    }
    if out.iter().sum::<usize>() < total {
        log::debug!("{} RBs left unassigned after rounding", total - out.iter().sum::<usize>());
    }
    out
}

/// Disjoint RB index ranges in subregion order.
pub fn rb_ranges(budget: &[usize; N_SUBREGIONS]) -> [std::ops::Range<usize>; N_SUBREGIONS] {
    let mut start = 0;
    budget.map(|n| {
        let r = start..start + n;
        start += n;
        r
    })
}
