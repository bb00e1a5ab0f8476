//! Systems `ẋ = f₁(x,u) + f₂(x,u)G(η)`, `y₁ = h₁ + h₂θ₂ + h₃e^{h₄(x)θ₁}`.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::monotone::EtaMap;

/// Known functions of a Class I model. Matrices are row-major.
pub trait ClassIModel: std::fmt::Debug + Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn p_eta(&self) -> usize;
    fn f1(&self, x: &[f64], u: &[f64], out: &mut [f64]);
    /// `n × p_η`.
    fn f2(&self, x: &[f64], u: &[f64], out: &mut [f64]);
    fn h1(&self, x: &[f64], u: &[f64]) -> f64;
    fn h2(&self, x: &[f64], u: &[f64]) -> f64;
    fn h3(&self, x: &[f64], u: &[f64]) -> f64;
    fn h4(&self, x: &[f64]) -> f64;
    fn grad_h4(&self, x: &[f64], out: &mut [f64]);
}

/// A Class I model together with its true parameters `θ = (θ₁, θ₂, η)`.
#[derive(Debug, Clone)]
pub struct ClassISystem {
    pub model: Arc<dyn ClassIModel>,
    pub g: Arc<dyn EtaMap>,
    pub theta: Vec<f64>,
    pub h3_floor: f64,
    g_true: DVector<f64>,
}

impl ClassISystem {
    pub fn new(
        model: Arc<dyn ClassIModel>,
        g: Arc<dyn EtaMap>,
        theta: Vec<f64>,
        h3_floor: f64,
    ) -> Result<Self> {
        if g.p_eta() != model.p_eta() {
            return Err(Error::Dimension {
                context: "class I G(eta) output",
                expected: model.p_eta(),
                got: g.p_eta(),
            });
        }
        if theta.len() != 2 + g.n_eta() {
            return Err(Error::Dimension {
                context: "class I theta",
                expected: 2 + g.n_eta(),
                got: theta.len(),
            });
        }
        if !(h3_floor > 0.0) {
            return Err(Error::config("model.h3_floor", "must be positive"));
        }
        let g_true = g.eval(&theta[2..]);
        Ok(ClassISystem {
            model,
            g,
            theta,
            h3_floor,
            g_true,
        })
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn m(&self) -> usize {
        self.model.m()
    }

    pub fn p_eta(&self) -> usize {
        self.model.p_eta()
    }

    pub fn n_eta(&self) -> usize {
        self.g.n_eta()
    }

    pub fn g_true(&self) -> &DVector<f64> {
        &self.g_true
    }

    /// `ẋ = f₁ + f₂G(η)`.
    pub fn rhs(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let (n, p) = (self.n(), self.p_eta());
        self.model.f1(x, u, dx);
        let mut f2 = vec![0.0; n * p];
        self.model.f2(x, u, &mut f2);
        for i in 0..n {
            for j in 0..p {
                dx[i] += f2[i * p + j] * self.g_true[j];
            }
        }
    }

    /// Checked `h₃(x, u)`.
    pub fn h3_checked(&self, x: &[f64], u: &[f64], t: f64) -> Result<f64> {
        let h3 = self.model.h3(x, u);
        if !(h3.abs() >= self.h3_floor) {
            return Err(Error::Singularity {
                what: "h3",
                value: h3.abs(),
                floor: self.h3_floor,
                t,
            });
        }
        Ok(h3)
    }

    /// `y₁ = h₁ + h₂θ₂ + h₃e^{h₄θ₁}`.
    pub fn y1(&self, x: &[f64], u: &[f64], t: f64) -> Result<f64> {
        let h3 = self.h3_checked(x, u, t)?;
        let m = &self.model;
        Ok(m.h1(x, u) + m.h2(x, u) * self.theta[1] + h3 * (m.h4(x) * self.theta[0]).exp())
    }

    /// `[y₁; x]`.
    pub fn output(&self, x: &[f64], u: &[f64], t: f64) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.n() + 1);
        out[0] = self.y1(x, u, t)?;
        out.rows_mut(1, self.n()).copy_from_slice(x);
        Ok(out)
    }
}

/// Scalar test model: `f₁ = −x + u`, `f₂ = u`, `h₁ = x²`, `h₂ = x − 353`,
/// `h₃ = 0.1 + x²`, `h₄ = −1/x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticClassI;

impl ClassIModel for SyntheticClassI {
    fn n(&self) -> usize {
        1
    }
    fn m(&self) -> usize {
        1
    }
    fn p_eta(&self) -> usize {
        1
    }
    fn f1(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = -x[0] + u[0];
    }
    fn f2(&self, _x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = u[0];
    }
    fn h1(&self, x: &[f64], _u: &[f64]) -> f64 {
        x[0] * x[0]
    }
    fn h2(&self, x: &[f64], _u: &[f64]) -> f64 {
        x[0] - 353.0
    }
    fn h3(&self, x: &[f64], _u: &[f64]) -> f64 {
        0.1 + x[0] * x[0]
    }
    fn h4(&self, x: &[f64]) -> f64 {
        -1.0 / x[0]
    }
    fn grad_h4(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0 / (x[0] * x[0]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::IdentityMap;

    fn synthetic(theta: [f64; 3]) -> ClassISystem {
        ClassISystem::new(
            Arc::new(SyntheticClassI),
            Arc::new(IdentityMap(1)),
            theta.to_vec(),
            1e-6,
        )
        .unwrap()
    }

    #[test]
    fn rhs_values() {
        let s = synthetic([2.0, 3.0, 0.5]);
        let mut dx = [0.0];
        s.rhs(&[1.0], &[0.0], &mut dx);
        assert_eq!(dx[0], -1.0);
        s.rhs(&[2.0], &[1.0], &mut dx);
        assert_eq!(dx[0], -0.5);
    }

    #[test]
    fn output_values() {
        let (t1, t2) = (0.7, -1.3);
        let s = synthetic([t1, t2, 0.5]);
        let y = s.output(&[1.0], &[0.4], 0.0).unwrap();
        let expected = 1.0 + (1.0 - 353.0) * t2 + 1.1 * (-t1).exp();
        assert!((y[0] - expected).abs() < 1e-12);
        assert_eq!(y[1], 1.0);
        let s0 = synthetic([0.0, 0.0, 0.5]);
        assert!((s0.y1(&[2.0], &[0.0], 0.0).unwrap() - (4.0 + 4.1)).abs() < 1e-12);
    }

    #[test]
    fn dimension_checks() {
        let err = ClassISystem::new(
            Arc::new(SyntheticClassI),
            Arc::new(IdentityMap(2)),
            vec![1.0; 4],
            1e-6,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
        let err = ClassISystem::new(
            Arc::new(SyntheticClassI),
            Arc::new(IdentityMap(1)),
            vec![1.0; 4],
            1e-6,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn h3_floor_violation() {
        let s = ClassISystem::new(
            Arc::new(SyntheticClassI),
            Arc::new(IdentityMap(1)),
            vec![1.0, 1.0, 1.0],
            0.5,
        )
        .unwrap();
        let err = s.y1(&[0.1], &[0.0], 2.5).unwrap_err();
        assert!(matches!(err, Error::Singularity { what: "h3", t, .. } if t == 2.5));
    }
}
