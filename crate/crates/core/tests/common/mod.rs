//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's likelihood or slider code.

#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};

pub fn phi(z: f64) -> f64 {
    if z == f64::INFINITY {
        1.0
    } else if z == f64::NEG_INFINITY {
        0.0
    } else {
        Normal::standard().cdf(z)
    }
}

/// Slider positions for step `eps`, built directly from the definition.
pub fn grid_points(eps: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    let mut n = 0i64;
    while (n as f64) * eps <= 1.0 + 1e-9 {
        n += 1;
    }
    let top = n - 1;
    for k in -top..=top {
        pts.push(k as f64 * eps);
    }
    if (top as f64 * eps - 1.0).abs() > 1e-9 {
        pts.insert(0, -1.0);
        pts.push(1.0);
    }
    pts
}

/// P(round(ψ + ν) = μ) with ν ~ N(0, σ²), buckets split at midpoints.
pub fn bucket_probability(mu: f64, psi: f64, sigma: f64, eps: f64) -> f64 {
    let pts = grid_points(eps);
    let i = pts
        .iter()
        .position(|p| (p - mu).abs() < 1e-9)
        .expect("mu on grid");
    let lo = if i == 0 { f64::NEG_INFINITY } else { 0.5 * (pts[i - 1] + pts[i]) };
    let hi = if i + 1 == pts.len() { f64::INFINITY } else { 0.5 * (pts[i] + pts[i + 1]) };
    phi((hi - psi) / sigma) - phi((lo - psi) / sigma)
}

pub struct Record {
    pub p: usize,
    pub q: usize,
    pub mu: f64,
    pub eps: f64,
}

/// Posterior over the angle of `w = (cos θ, sin θ)` on `n_theta` equal
/// cells, marginalized over `n_alpha` cells of α ∈ [0.05, 1].
pub fn angle_posterior(
    rows: &[[f64; 2]],
    records: &[Record],
    sigma: f64,
    n_theta: usize,
    n_alpha: usize,
) -> Vec<f64> {
    let mut post = vec![0.0; n_theta];
    let mut logs = vec![0.0; n_theta * n_alpha];
    for i in 0..n_theta {
        let th = std::f64::consts::TAU * (i as f64 + 0.5) / n_theta as f64;
        let w = [th.cos(), th.sin()];
        let r: Vec<f64> = rows.iter().map(|f| f[0] * w[0] + f[1] * w[1]).collect();
        let gap = r.iter().cloned().fold(f64::MIN, f64::max) - r.iter().cloned().fold(f64::MAX, f64::min);
        for j in 0..n_alpha {
            let alpha = 0.05 + 0.95 * (j as f64 + 0.5) / n_alpha as f64;
            let mut ll = 0.0;
            for rec in records {
                let psi = if gap <= 1e-12 {
                    0.0
                } else {
                    ((r[rec.p] - r[rec.q]) / (alpha * gap)).clamp(-1.0, 1.0)
                };
                ll += bucket_probability(rec.mu, psi, sigma, rec.eps).max(1e-12).ln();
            }
            logs[i * n_alpha + j] = ll;
        }
    }
    let top = logs.iter().cloned().fold(f64::MIN, f64::max);
    for i in 0..n_theta {
        post[i] = (0..n_alpha).map(|j| (logs[i * n_alpha + j] - top).exp()).sum();
    }
    let z: f64 = post.iter().sum();
    post.iter_mut().for_each(|p| *p /= z);
    post
}

/// Sums neighbouring cells of a distribution on `n` cells into `bins` cells.
pub fn coarsen(p: &[f64], bins: usize) -> Vec<f64> {
    assert_eq!(p.len() % bins, 0);
    p.chunks(p.len() / bins).map(|c| c.iter().sum()).collect()
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Regret of planning with `w_hat` when the truth is `w_true`, by brute force.
pub fn regret(rows: &[Vec<f64>], w_hat: &[f64], w_true: &[f64]) -> f64 {
    let dot = |f: &[f64], w: &[f64]| f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
    let best = |w: &[f64]| {
        let mut b = 0;
        for i in 1..rows.len() {
            if dot(&rows[i], w) > dot(&rows[b], w) {
                b = i;
            }
        }
        b
    };
    dot(&rows[best(w_true)], w_true) - dot(&rows[best(w_hat)], w_true)
}
