//! Class I regression.
//!
//! With `h₇ = (y₁ − h₁)/h₃` and `h₈ = −h₂/h₃` the output equation reads
//! `e^{h₄θ₁} = h₇ + h₈θ₂`. Differentiating and using `ḣ₄ = h₅ + h₆ᵀG(η)`,
//! `h₅ = ∇h₄ᵀf₁`, `h₆ = f₂ᵀ∇h₄`, then filtering with `λ/(p+λ)` gives
//!
//! ```text
//! Y = λp/(p+λ) h₇
//! φ = [L(h₅h₇), −λp/(p+λ) h₈, L(h₅h₈), L(h₇h₆), L(h₈h₆)],   L = λ/(p+λ)
//! ```

use crate::error::{finite, Result};
use crate::systems::class1::ClassISystem;
use crate::systems::integrator::{lerp, Rk4};

use super::RegressorSample;

/// Auxiliary signals `h₅ … h₈`.
#[derive(Debug, Clone, PartialEq)]
pub struct H5678 {
    pub h5: f64,
    pub h6: Vec<f64>,
    pub h7: f64,
    pub h8: f64,
}

impl H5678 {
    pub fn compute(sys: &ClassISystem, x: &[f64], u: &[f64], y1: f64, t: f64) -> Result<Self> {
        let (n, p) = (sys.n(), sys.p_eta());
        let m = &sys.model;
        let h3 = sys.h3_checked(x, u, t)?;
        let mut grad = vec![0.0; n];
        m.grad_h4(x, &mut grad);
        let mut f1 = vec![0.0; n];
        m.f1(x, u, &mut f1);
        let mut f2 = vec![0.0; n * p];
        m.f2(x, u, &mut f2);
        let h5 = grad.iter().zip(&f1).map(|(a, b)| a * b).sum::<f64>();
        let h6 = (0..p)
            .map(|j| (0..n).map(|i| f2[i * p + j] * grad[i]).sum())
            .collect();
        let out = H5678 {
            h5: finite("h5", h5, t)?,
            h6,
            h7: finite("h7", (y1 - m.h1(x, u)) / h3, t)?,
            h8: finite("h8", -m.h2(x, u) / h3, t)?,
        };
        Ok(out)
    }

    fn lerp(&self, other: &H5678, frac: f64) -> H5678 {
        H5678 {
            h5: lerp(self.h5, other.h5, frac),
            h6: self
                .h6
                .iter()
                .zip(&other.h6)
                .map(|(a, b)| lerp(*a, *b, frac))
                .collect(),
            h7: lerp(self.h7, other.h7, frac),
            h8: lerp(self.h8, other.h8, frac),
        }
    }
}

/// Filter bank of the Class I regression: `4 + 2p_η` states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Class1Regressor {
    pub lambda: f64,
    pub p: usize,
}

impl Class1Regressor {
    pub fn dim(&self) -> usize {
        4 + 2 * self.p
    }

    pub fn s(&self) -> usize {
        3 + 2 * self.p
    }

    pub fn derivative(&self, z: &[f64], h: &H5678, dz: &mut [f64]) {
        let l = self.lambda;
        let p = self.p;
        dz[0] = l * (h.h7 - z[0]);
        dz[1] = l * (h.h5 * h.h7 - z[1]);
        dz[2] = l * (h.h8 - z[2]);
        dz[3] = l * (h.h5 * h.h8 - z[3]);
        for j in 0..p {
            dz[4 + j] = l * (h.h7 * h.h6[j] - z[4 + j]);
            dz[4 + p + j] = l * (h.h8 * h.h6[j] - z[4 + p + j]);
        }
    }

    /// Writes `φ` and returns `Y`.
    pub fn output(&self, z: &[f64], h: &H5678, phi: &mut [f64]) -> f64 {
        let l = self.lambda;
        let p = self.p;
        phi[0] = z[1];
        phi[1] = -l * (h.h8 - z[2]);
        phi[2] = z[3];
        phi[3..3 + p].copy_from_slice(&z[4..4 + p]);
        phi[3 + p..3 + 2 * p].copy_from_slice(&z[4 + p..4 + 2 * p]);
        l * (h.h7 - z[0])
    }
}

/// Standalone Class I regressor advanced sample by sample; auxiliary signals
/// are interpolated linearly between samples.
#[derive(Debug, Clone)]
pub struct Class1RegressorState {
    reg: Class1Regressor,
    z: Vec<f64>,
    last: Option<H5678>,
    t: f64,
    rk: Rk4,
}

impl Class1RegressorState {
    pub fn new(lambda: f64, p: usize) -> Result<Self> {
        crate::filters::FilterSpec::new(crate::filters::FilterKind::Low1, lambda)?;
        let reg = Class1Regressor { lambda, p };
        Ok(Class1RegressorState {
            reg,
            z: vec![0.0; reg.dim()],
            last: None,
            t: 0.0,
            rk: Rk4::new(reg.dim()),
        })
    }

    pub fn regressor(&self) -> &Class1Regressor {
        &self.reg
    }

    pub fn class1_step(
        &mut self,
        sys: &ClassISystem,
        x: &[f64],
        u: &[f64],
        y1: f64,
        dt: f64,
    ) -> Result<RegressorSample> {
        let t1 = self.t + dt;
        let h = H5678::compute(sys, x, u, y1, t1)?;
        let prev = self.last.take().unwrap_or_else(|| h.clone());
        let reg = self.reg;
        self.rk.step_with(&mut self.z, dt, |frac, z, dz| {
            reg.derivative(z, &prev.lerp(&h, frac), dz);
            Ok(())
        })?;
        self.t = t1;
        let mut phi = vec![0.0; reg.s()];
        let y = reg.output(&self.z, &h, &mut phi);
        self.last = Some(h);
        Ok(RegressorSample { t: t1, y, phi })
    }
}
