//! The discrete slider: grid positions, rounding, and the Gaussian bucket
//! probabilities of a noisy response landing on each position.

use crate::error::{Error, Result};

const GRID_TOL: f64 = 1e-9;

/// Positions a slider with step size `epsilon` can take.
///
/// Points are `n·ε` for integers `n` with `|n·ε| ≤ 1`, plus the end points
/// `±1` when `1/ε` is not an integer. A response is attributed to the nearest
/// position, so bucket edges sit halfway between neighbouring points.
#[derive(Debug, Clone, PartialEq)]
pub struct SliderGrid {
    epsilon: f64,
    // 1/ε when it is (numerically) an integer
    steps: Option<f64>,
    n_max: i64,
    points: Vec<f64>,
    edges: Vec<f64>,
}

impl SliderGrid {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::invalid(format!(
                "slider step must lie in (0, 1], got {epsilon}"
            )));
        }
        let inv = 1.0 / epsilon;
        let steps = ((inv - inv.round()).abs() < GRID_TOL).then(|| inv.round());
        let n_max = match steps {
            Some(s) => s as i64,
            None => (inv + GRID_TOL).floor() as i64,
        };
        let value = |n: i64| match steps {
            Some(s) => n as f64 / s,
            None => n as f64 * epsilon,
        };
        let mut points: Vec<f64> = (-n_max..=n_max).map(value).collect();
        if steps.is_none() && value(n_max) < 1.0 - GRID_TOL {
            points.insert(0, -1.0);
            points.push(1.0);
        }
        let edges = points.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        Ok(SliderGrid {
            epsilon,
            steps,
            n_max,
            points,
            edges,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Inner bucket edges; bucket `i` spans `edges[i-1]..edges[i]`, with the
    /// outer buckets open towards ±∞.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Index of the grid point equal to `mu`, if `mu` is on the grid.
    pub fn index_of(&self, mu: f64) -> Option<usize> {
        if !mu.is_finite() {
            return None;
        }
        let i = self.nearest_index(mu);
        ((self.points[i] - mu).abs() <= GRID_TOL).then_some(i)
    }

    /// Nearest grid point to `x`, clamped to `[-1, 1]`; ties away from zero.
    pub fn round(&self, x: f64) -> f64 {
        self.points[self.nearest_index(x)]
    }

    pub fn nearest_index(&self, x: f64) -> usize {
        let x = x.clamp(-1.0, 1.0);
        let offset = (self.points.len() as i64 - (2 * self.n_max + 1)) / 2;
        if let Some(s) = self.steps {
            // f64::round already breaks ties away from zero
            let n = (x * s).round() as i64;
            return (n.clamp(-self.n_max, self.n_max) + self.n_max + offset) as usize;
        }
        let n = (x / self.epsilon).round() as i64;
        let mut best = (n.clamp(-self.n_max, self.n_max) + self.n_max + offset) as usize;
        for cand in [best.saturating_sub(1), best + 1] {
            if cand >= self.points.len() {
                continue;
            }
            let (dc, db) = ((self.points[cand] - x).abs(), (self.points[best] - x).abs());
            if dc < db || (dc == db && self.points[cand].abs() > self.points[best].abs()) {
                best = cand;
            }
        }
        best
    }

    /// Probability that `round(psi + ν)` lands on point `index`, ν ~ N(0, σ²).
    pub fn bucket_probability(&self, index: usize, psi: f64, sigma: f64) -> f64 {
        let lo = if index == 0 {
            f64::NEG_INFINITY
        } else {
            (self.edges[index - 1] - psi) / sigma
        };
        let hi = if index + 1 == self.points.len() {
            f64::INFINITY
        } else {
            (self.edges[index] - psi) / sigma
        };
        normal_interval(lo, hi)
    }

    /// Writes the probability of every grid point for response centre `psi`.
    pub fn bucket_probabilities(&self, psi: f64, sigma: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.points.len());
        // (lower cdf, upper tail, z) at the previous edge; one erfc per edge
        let mut prev = (0.0, 1.0, f64::NEG_INFINITY);
        for (i, slot) in out.iter_mut().enumerate() {
            let cur = match self.edges.get(i) {
                Some(&e) => {
                    let z = (e - psi) / sigma;
                    let t = upper_tail(z.abs());
                    if z > 0.0 {
                        (1.0 - t, t, z)
                    } else {
                        (t, 1.0 - t, z)
                    }
                }
                None => (1.0, 0.0, f64::INFINITY),
            };
            *slot = if prev.2 > 0.0 {
                prev.1 - cur.1
            } else {
                cur.0 - prev.0
            }
            .max(0.0);
            prev = cur;
        }
    }
}

/// Standard normal cdf.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

#[inline]
fn upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z * std::f64::consts::FRAC_1_SQRT_2)
}

/// `Φ(hi) − Φ(lo)`, evaluated on whichever tail keeps precision.
#[inline]
pub(crate) fn normal_interval(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        (upper_tail(lo) - upper_tail(hi)).max(0.0)
    } else {
        (normal_cdf(hi) - normal_cdf(lo)).max(0.0)
    }
}

/// Rounds `x` onto the slider grid of step `epsilon`.
pub fn round_to_grid(x: f64, epsilon: f64) -> Result<f64> {
    Ok(SliderGrid::new(epsilon)?.round(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_examples() {
        assert!((round_to_grid(0.44, 0.1).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(round_to_grid(1.3, 0.1).unwrap(), 1.0);
        assert_eq!(round_to_grid(0.2, 1.0).unwrap(), 0.0);
        assert_eq!(round_to_grid(-7.0, 0.1).unwrap(), -1.0);
        // midpoints go away from zero
        assert_eq!(round_to_grid(0.5, 1.0).unwrap(), 1.0);
        assert_eq!(round_to_grid(-0.5, 1.0).unwrap(), -1.0);
        assert_eq!(round_to_grid(0.25, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(SliderGrid::new(0.1).unwrap().len(), 21);
        assert_eq!(SliderGrid::new(1.0).unwrap().points(), &[-1.0, 0.0, 1.0]);
        let g = SliderGrid::new(0.3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.points()[0], -1.0);
        assert_eq!(g.points()[8], 1.0);
        assert!((g.round(0.97) - 1.0).abs() < 1e-15);
        assert!((g.round(0.93) - 0.9).abs() < 1e-12);
        assert!(SliderGrid::new(0.0).is_err());
        assert!(SliderGrid::new(1.5).is_err());
    }

    #[test]
    fn on_grid_lookup() {
        let g = SliderGrid::new(0.1).unwrap();
        assert_eq!(g.index_of(0.4), Some(14));
        assert_eq!(g.index_of(0.35), None);
        assert_eq!(g.index_of(-1.0), Some(0));
        assert_eq!(g.index_of(f64::NAN), None);
    }

    #[test]
    fn bucket_vector_matches_single_buckets() {
        for eps in [0.1, 0.3, 1.0] {
            let g = SliderGrid::new(eps).unwrap();
            let mut out = vec![0.0; g.len()];
            for psi in [-1.0, -0.37, 0.0, 0.52, 1.0] {
                for sigma in [0.05, 0.35, 1.0] {
                    g.bucket_probabilities(psi, sigma, &mut out);
                    for (i, p) in out.iter().enumerate() {
                        let single = g.bucket_probability(i, psi, sigma);
                        assert!((p - single).abs() < 1e-14, "{eps} {psi} {sigma} {i}");
                    }
                    assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
