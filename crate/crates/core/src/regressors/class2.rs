//! Class II regression.
//!
//! With `ρ = ẍ − f₁ − f₂ᵀG − u = θ₂h̄₃e^{θ₁h₄}` one has
//! `ρ̇ = (ḣ₃/h₃ + θ₁ḣ₄)ρ`, which rearranges to
//!
//! ```text
//! d³x − ḟ₁ − u̇ − (ḣ₃/h₃)(ẍ − f₁ − u)
//!     = θ₁ḣ₄(ẍ − f₁ − u) + Gᵀ(ḟ₂ − (ḣ₃/h₃)f₂) − θ₁Gᵀḣ₄f₂.
//! ```
//!
//! Filtering with `Λ = λ²/(p+λ)²` and splitting every `ẍ`-bearing product
//! with the swapping identity yields, with `L = λ/(p+λ)`, `a = f₁ + u`,
//! `r₃ = h₃′/h₃`:
//!
//! ```text
//! Y   = λ²p²/(p+λ)² ẋ − L(λp/(p+λ) a) − L[S₃] + Λ[r₃ẋa]
//! φ₁  = L[S₄] − Λ[h₄′ẋa]
//! φ_G = L[S_ψ] + Λ[(∂ₓf₂ − r₃f₂)ẋ]
//! φ_θG = −Λ[h₄′ẋf₂]
//! ```
//!
//! where `S₃ = L[r₃ẋẍ]`, `S₄ = L[h₄′ẋẍ]`, `S_ψ = L[ψ_aψ̇_c]` are realized by
//! [`SwapKernel`] from `x`, `ẋ` only.

use crate::error::{finite, Error, Result};
use crate::filters::SwapKernel;
use crate::systems::class2::ClassIISystem;
use crate::systems::integrator::{lerp, Rk4};

use super::RegressorSample;

/// Measured signals consumed by the Class II filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct Class2Signals {
    pub xdot: f64,
    /// `f₁ + u`
    pub a: f64,
    /// `h₃′/h₃`
    pub h3r: f64,
    /// `h₃″/h₃ − (h₃′/h₃)²`, the `x`-derivative of `h₃′/h₃`.
    pub h3r_d1: f64,
    pub h4_d1: f64,
    pub h4_d2: f64,
    pub psi_a: Vec<f64>,
    pub psi_a_d1: Vec<f64>,
    pub psi_c: Vec<f64>,
    pub f2: Vec<f64>,
    pub f2_dx: Vec<f64>,
}

impl Class2Signals {
    pub fn compute(sys: &ClassIISystem, x: f64, xdot: f64, u: f64, t: f64) -> Result<Self> {
        let (p, k) = (sys.p_eta(), sys.k_psi());
        let m = &sys.model;
        let h3 = sys.h3_checked(x, t)?;
        let h4 = m.h4(x);
        let h3r = h3[1] / h3[0];
        let mut s = Class2Signals {
            xdot: finite("xdot", xdot, t)?,
            a: finite("f1 + u", m.f1(x) + u, t)?,
            h3r,
            h3r_d1: h3[2] / h3[0] - h3r * h3r,
            h4_d1: h4[1],
            h4_d2: h4[2],
            psi_a: vec![0.0; p * k],
            psi_a_d1: vec![0.0; p * k],
            psi_c: vec![0.0; k],
            f2: vec![0.0; p],
            f2_dx: vec![0.0; p],
        };
        m.psi_a(x, &mut s.psi_a);
        m.psi_a_d1(x, &mut s.psi_a_d1);
        m.psi_c(xdot, &mut s.psi_c);
        m.f2(x, xdot, &mut s.f2);
        m.f2_dx(x, xdot, &mut s.f2_dx);
        Ok(s)
    }

    fn lerp(&self, o: &Class2Signals, frac: f64) -> Class2Signals {
        let v = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| lerp(*x, *y, frac)).collect()
        };
        Class2Signals {
            xdot: lerp(self.xdot, o.xdot, frac),
            a: lerp(self.a, o.a, frac),
            h3r: lerp(self.h3r, o.h3r, frac),
            h3r_d1: lerp(self.h3r_d1, o.h3r_d1, frac),
            h4_d1: lerp(self.h4_d1, o.h4_d1, frac),
            h4_d2: lerp(self.h4_d2, o.h4_d2, frac),
            psi_a: v(&self.psi_a, &o.psi_a),
            psi_a_d1: v(&self.psi_a_d1, &o.psi_a_d1),
            psi_c: v(&self.psi_c, &o.psi_c),
            f2: v(&self.f2, &o.f2),
            f2_dx: v(&self.f2_dx, &o.f2_dx),
        }
    }
}

/// Filter bank of the Class II regression: `14 + 6p_η + k` states.
#[derive(Debug, Clone)]
pub struct Class2Regressor {
    lambda: f64,
    p: usize,
    k: usize,
    scalar: SwapKernel,
    psi: SwapKernel,
}

const S3: usize = 4;
const S4: usize = 9;
const PSI: usize = 14;

impl Class2Regressor {
    pub fn new(lambda: f64, p: usize, k: usize) -> Result<Self> {
        if p == 0 || k == 0 {
            return Err(Error::config("model", "p_eta and k_psi must be positive"));
        }
        Ok(Class2Regressor {
            lambda,
            p,
            k,
            scalar: SwapKernel::new(lambda, 1, 1)?,
            psi: SwapKernel::new(lambda, p, k)?,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        14 + 6 * self.p + self.k
    }

    pub fn s(&self) -> usize {
        1 + 2 * self.p
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let l_psi = PSI + self.k + self.p;
        let grad = l_psi + self.p;
        let cross = grad + 2 * self.p;
        (l_psi, grad, cross)
    }

    fn check(&self, s: &Class2Signals) -> Result<()> {
        if s.psi_a.len() != self.p * self.k || s.psi_c.len() != self.k || s.f2.len() != self.p {
            return Err(Error::Dimension {
                context: "class II psi_a psi_b product",
                expected: self.p * self.k,
                got: s.psi_a.len(),
            });
        }
        Ok(())
    }

    pub fn derivative(&self, z: &[f64], s: &Class2Signals, dz: &mut [f64]) {
        let l = self.lambda;
        let (p, k) = (self.p, self.k);
        let v = s.xdot;
        let v2 = v * v;

        dz[0] = l * (v - z[0]);
        dz[1] = l * (z[0] - z[1]);

        let ha = l * (s.a - z[2]);
        dz[2] = ha;
        dz[3] = l * (ha - z[3]);

        let g3_dot = s.h3r_d1 * v;
        self.scalar
            .derivative(&z[S3..S3 + 2], &[g3_dot], &[v2], &mut dz[S3..S3 + 2]);
        let s3 = 0.5 * (s.h3r * l * (v2 - z[S3]) - z[S3 + 1]);
        dz[6] = l * (s3 - z[6]);

        dz[7] = l * (s.h3r * v * s.a - z[7]);
        dz[8] = l * (z[7] - z[8]);

        let g4_dot = s.h4_d2 * v;
        self.scalar
            .derivative(&z[S4..S4 + 2], &[g4_dot], &[v2], &mut dz[S4..S4 + 2]);
        let s4 = 0.5 * (s.h4_d1 * l * (v2 - z[S4]) - z[S4 + 1]);
        dz[11] = l * (s4 - z[11]);

        dz[12] = l * (s.h4_d1 * v * s.a - z[12]);
        dz[13] = l * (z[12] - z[13]);

        let psi_dim = k + p;
        let g_dot: Vec<f64> = s.psi_a_d1.iter().map(|d| d * v).collect();
        self.psi.derivative(
            &z[PSI..PSI + psi_dim],
            &g_dot,
            &s.psi_c,
            &mut dz[PSI..PSI + psi_dim],
        );
        let mut s_psi = vec![0.0; p];
        self.psi.output(&z[PSI..PSI + psi_dim], &s.psi_a, &s.psi_c, &mut s_psi);

        let (l_psi, grad, cross) = self.offsets();
        for i in 0..p {
            dz[l_psi + i] = l * (s_psi[i] - z[l_psi + i]);
            let gi = (s.f2_dx[i] - s.h3r * s.f2[i]) * v;
            dz[grad + i] = l * (gi - z[grad + i]);
            dz[grad + p + i] = l * (z[grad + i] - z[grad + p + i]);
            let ci = s.h4_d1 * v * s.f2[i];
            dz[cross + i] = l * (ci - z[cross + i]);
            dz[cross + p + i] = l * (z[cross + i] - z[cross + p + i]);
        }
    }

    /// Writes `φ` and returns `Y`.
    pub fn output(&self, z: &[f64], s: &Class2Signals, phi: &mut [f64]) -> f64 {
        let l = self.lambda;
        let p = self.p;
        let (l_psi, grad, cross) = self.offsets();
        phi[0] = z[11] - z[13];
        for i in 0..p {
            phi[1 + i] = z[l_psi + i] + z[grad + p + i];
            phi[1 + p + i] = -z[cross + p + i];
        }
        l * l * (s.xdot - 2.0 * z[0] + z[1]) - z[3] - z[6] + z[8]
    }
}

/// Standalone Class II regressor advanced sample by sample; measured signals
/// are interpolated linearly between samples.
#[derive(Debug, Clone)]
pub struct Class2RegressorState {
    reg: Class2Regressor,
    z: Vec<f64>,
    last: Option<Class2Signals>,
    t: f64,
    rk: Rk4,
}

impl Class2RegressorState {
    pub fn new(lambda: f64, p: usize, k: usize) -> Result<Self> {
        let reg = Class2Regressor::new(lambda, p, k)?;
        let dim = reg.dim();
        Ok(Class2RegressorState {
            reg,
            z: vec![0.0; dim],
            last: None,
            t: 0.0,
            rk: Rk4::new(dim),
        })
    }

    pub fn regressor(&self) -> &Class2Regressor {
        &self.reg
    }

    /// Only `x`, `ẋ` and `u` are consumed; `ẍ` and `u̇` never appear.
    pub fn class2_step(
        &mut self,
        sys: &ClassIISystem,
        x: f64,
        xdot: f64,
        u: f64,
        dt: f64,
    ) -> Result<RegressorSample> {
        let t1 = self.t + dt;
        let sig = Class2Signals::compute(sys, x, xdot, u, t1)?;
        self.reg.check(&sig)?;
        let prev = self.last.take().unwrap_or_else(|| sig.clone());
        let reg = &self.reg;
        self.rk.step_with(&mut self.z, dt, |frac, z, dz| {
            reg.derivative(z, &prev.lerp(&sig, frac), dz);
            Ok(())
        })?;
        self.t = t1;
        let mut phi = vec![0.0; reg.s()];
        let y = reg.output(&self.z, &sig, &mut phi);
        self.last = Some(sig);
        Ok(RegressorSample { t: t1, y, phi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::IdentityMap;
    use crate::systems::class2::{ShankModel, SignMode};
    use std::sync::Arc;

    #[test]
    fn dimensions() {
        let r = Class2Regressor::new(10.0, 3, 3).unwrap();
        assert_eq!(r.dim(), 14 + 18 + 3);
        assert_eq!(r.s(), 7);
    }

    #[test]
    fn rest_gives_zero_regression() {
        // Static balance with ẋ ≡ 0: every filtered entry stays zero.
        let q0 = -0.5;
        let sys = ClassIISystem::new(
            Arc::new(ShankModel { q0, sign: SignMode::default() }),
            Arc::new(IdentityMap(3)),
            vec![1.5, 1.7, 0.7, 34.0],
            17.0,
            1e-6,
        )
        .unwrap();
        let x = 0.2;
        let u = -sys.rhs(x, 0.0, 0.0, 0.0).unwrap()[1];
        assert!(sys.rhs(x, 0.0, u, 0.0).unwrap()[1].abs() < 1e-12);
        let mut st = Class2RegressorState::new(10.0, 3, 3).unwrap();
        for k in 1..=4000 {
            let smp = st.class2_step(&sys, x, 0.0, u, 1e-3).unwrap();
            assert!(smp.phi.iter().all(|v| v.abs() < 1e-12));
            // Only the zero-initial-condition transient of the input filter.
            if k > 3000 {
                assert!(smp.y.abs() < 1e-9 * (1.0 + u.abs()));
            }
        }
    }
}
