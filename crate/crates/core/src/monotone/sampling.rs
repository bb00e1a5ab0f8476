use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box of admissible parameter values, one `[lo, hi]` per
/// component of `θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension {
                context: "parameter box",
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::config("bounds", "every component needs finite lo <= hi"));
        }
        Ok(ParamBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Regular grid with `per_dim` points along each axis (corners included)
    /// followed by `random` uniform points drawn from a seeded generator.
    pub fn samples(&self, per_dim: usize, random: usize, seed: u64) -> Vec<DVector<f64>> {
        let n = self.dim();
        let per_dim = per_dim.max(2);
        let mut out = Vec::new();
        let total = per_dim.pow(n as u32);
        for mut idx in 0..total {
            let mut p = DVector::zeros(n);
            for d in 0..n {
                let k = idx % per_dim;
                idx /= per_dim;
                let frac = k as f64 / (per_dim - 1) as f64;
                p[d] = self.lo[d] + frac * (self.hi[d] - self.lo[d]);
            }
            out.push(p);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random {
            let p = DVector::from_fn(n, |d, _| {
                if self.hi[d] > self.lo[d] {
                    rng.gen_range(self.lo[d]..=self.hi[d])
                } else {
                    self.lo[d]
                }
            });
            out.push(p);
        }
        out
    }

    /// Smallest `|θ_i|` over the box (zero when the interval straddles zero).
    pub fn abs_min(&self, i: usize) -> f64 {
        let (l, h) = (self.lo[i], self.hi[i]);
        if l <= 0.0 && h >= 0.0 {
            0.0
        } else {
            l.abs().min(h.abs())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_contains_corners() {
        let b = ParamBox::new(vec![1.0, -2.0], vec![3.0, 2.0]).unwrap();
        let s = b.samples(3, 0, 0);
        assert_eq!(s.len(), 9);
        for corner in [[1.0, -2.0], [3.0, -2.0], [1.0, 2.0], [3.0, 2.0]] {
            assert!(s.iter().any(|p| p[0] == corner[0] && p[1] == corner[1]));
        }
    }

    #[test]
    fn random_points_stay_inside_and_are_seeded() {
        let b = ParamBox::new(vec![0.5, 0.0, -1.0], vec![1.5, 0.0, 1.0]).unwrap();
        let s1 = b.samples(2, 50, 7);
        let s2 = b.samples(2, 50, 7);
        assert_eq!(s1, s2);
        for p in &s1 {
            for d in 0..3 {
                assert!(p[d] >= b.lo[d] && p[d] <= b.hi[d]);
            }
        }
    }

    #[test]
    fn abs_min_handles_sign() {
        let b = ParamBox::new(vec![-3.0, 1.0, -1.0], vec![-2.0, 4.0, 1.0]).unwrap();
        assert_eq!(b.abs_min(0), 2.0);
        assert_eq!(b.abs_min(1), 1.0);
        assert_eq!(b.abs_min(2), 0.0);
    }

    #[test]
    fn rejects_inverted_box() {
        assert!(ParamBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(ParamBox::new(vec![1.0], vec![1.0, 2.0]).is_err());
    }
}
