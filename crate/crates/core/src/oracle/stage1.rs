use crate::mobility::{TdiVector, N_SUBREGIONS};
use crate::stage1::{density_weight, UtilityParams};

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Projected-gradient ascent on Σ w_i ln(1 + c2 ε_i) over the simplex, with
/// step 1/L for the gradient's Lipschitz constant. Stops when an iteration
/// moves no coordinate by more than `tol`.
pub fn projected_gradient_shares(tdi: &TdiVector, p: &UtilityParams, tol: f64, max_iter: usize) -> [f64; N_SUBREGIONS] {
    let w: Vec<f64> = tdi.0.iter().map(|&k| density_weight(k, p)).collect();
    let lip = w.iter().copied().fold(0.0, f64::max) * p.c2 * p.c2;
    let step = 1.0 / lip;
    let mut x = vec![1.0 / N_SUBREGIONS as f64; N_SUBREGIONS];
    for _ in 0..max_iter {
        let y: Vec<f64> = x.iter().zip(&w).map(|(&xi, &wi)| xi + step * wi * p.c2 / (1.0 + p.c2 * xi)).collect();
        let nx = project_simplex(&y);
        let moved = nx.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = nx;
        if moved < tol {
            break;
        }
    }
    [x[0], x[1], x[2], x[3]]
}
