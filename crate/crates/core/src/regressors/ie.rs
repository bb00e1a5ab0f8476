//! Interval-excitation monitor: accumulates `∫φφᵀdt` by the trapezoidal rule.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};

#[derive(Debug, Clone)]
pub struct IeMonitor {
    gram: DMatrix<f64>,
    prev: Option<DVector<f64>>,
    t_start: f64,
    t: f64,
    first_ie: Option<f64>,
}

/// Outcome of an excitation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IeReport {
    pub passed: bool,
    pub min_eig: f64,
    pub window: f64,
}

impl IeMonitor {
    pub fn new(s: usize, t_start: f64) -> Self {
        IeMonitor {
            gram: DMatrix::zeros(s, s),
            prev: None,
            t_start,
            t: t_start,
            first_ie: None,
        }
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Adds the sample `φ(t)` taken `dt` after the previous one. The first
    /// call only records the sample.
    pub fn ie_update(&mut self, phi: &[f64], dt: f64) -> Result<()> {
        let s = self.gram.nrows();
        if phi.len() != s {
            return Err(Error::Dimension {
                context: "IE monitor regressor",
                expected: s,
                got: phi.len(),
            });
        }
        for v in phi {
            finite("phi", *v, self.t)?;
        }
        let cur = DVector::from_column_slice(phi);
        if let Some(prev) = &self.prev {
            self.gram += (prev * prev.transpose() + &cur * cur.transpose()) * (0.5 * dt);
            self.t += dt;
        }
        self.prev = Some(cur);
        Ok(())
    }

    pub fn min_eig(&self) -> f64 {
        if self.gram.nrows() == 0 {
            return 0.0;
        }
        crate::monotone::min_eig(&self.gram)
    }

    pub fn ie_check(&self, c_c: f64) -> IeReport {
        let min_eig = self.min_eig();
        IeReport {
            passed: min_eig >= c_c && c_c > 0.0,
            min_eig,
            window: self.t - self.t_start,
        }
    }

    /// Records the first time the check passes; returns it once known.
    pub fn track_first_pass(&mut self, c_c: f64) -> Option<f64> {
        if self.first_ie.is_none() && self.ie_check(c_c).passed {
            self.first_ie = Some(self.t);
        }
        self.first_ie
    }

    pub fn first_pass(&self) -> Option<f64> {
        self.first_ie
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_one_is_not_ie() {
        let mut m = IeMonitor::new(3, 0.0);
        for _ in 0..=1000 {
            m.ie_update(&[1.0, 0.0, 0.0], 1e-3).unwrap();
        }
        assert!((m.gram()[(0, 0)] - 1.0).abs() < 1e-12);
        assert_eq!(m.min_eig(), 0.0);
        for c in [1e-12, 1e-3, 1.0] {
            assert!(!m.ie_check(c).passed);
        }
    }

    #[test]
    fn zero_regressor_never_passes() {
        let mut m = IeMonitor::new(2, 0.0);
        for _ in 0..100 {
            m.ie_update(&[0.0, 0.0], 0.1).unwrap();
        }
        assert!(!m.ie_check(1e-300).passed);
    }

    #[test]
    fn basis_cycling_spans() {
        // Each basis vector held for one unit of time.
        let s = 3;
        let dt = 1e-3;
        let mut m = IeMonitor::new(s, 0.0);
        let per = 1000;
        for k in 0..=(s * per) {
            let mut phi = vec![0.0; s];
            phi[(k / per).min(s - 1)] = 1.0;
            m.ie_update(&phi, dt).unwrap();
        }
        let r = m.ie_check(0.5);
        assert!(r.passed);
        assert!((r.min_eig - 1.0).abs() <= dt);
    }

    #[test]
    fn sine_cosine_gram() {
        // ∫₀ᵀ [sin; cos][sin cos] = [T/2 − sin2T/4, sin²T/2; ·, T/2 + sin2T/4]
        let dt = 1e-3;
        let n = 20_000;
        let mut m = IeMonitor::new(2, 0.0);
        for k in 0..=n {
            let t = k as f64 * dt;
            m.ie_update(&[t.sin(), t.cos()], dt).unwrap();
        }
        let tt = n as f64 * dt;
        let g = m.gram();
        assert!((g[(0, 0)] - (tt / 2.0 - (2.0 * tt).sin() / 4.0)).abs() < 1e-5);
        assert!((g[(1, 1)] - (tt / 2.0 + (2.0 * tt).sin() / 4.0)).abs() < 1e-5);
        assert!((g[(0, 1)] - tt.sin().powi(2) / 2.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_input() {
        let mut m = IeMonitor::new(2, 0.0);
        assert!(m.ie_update(&[1.0], 0.1).is_err());
        assert!(m.ie_update(&[1.0, f64::NAN], 0.1).is_err());
    }

    proptest! {
        #[test]
        fn gram_is_psd_and_nondecreasing(vals in prop::collection::vec(-3.0f64..3.0, 60)) {
            let mut m = IeMonitor::new(3, 0.0);
            let mut prev = 0.0;
            for c in vals.chunks(3) {
                let before = m.gram().clone();
                m.ie_update(c, 0.1).unwrap();
                let g = m.gram();
                prop_assert!((g - g.transpose()).abs().max() < 1e-12);
                let e = m.min_eig();
                prop_assert!(e >= prev - 1e-9);
                prop_assert!(crate::monotone::min_eig(&(g - before)) >= -1e-9);
                prev = e;
            }
        }
    }
}
