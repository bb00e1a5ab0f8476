//! Systems `ẍ = f₁(x) + f₂ᵀ(x,ẋ)G(η) + θ₂h̄₃(x)e^{θ₁h₄(x)} + u` with
//! `∇_ẋf₂ = ψ_a(x)ψ_b(ẋ)` and `ψ_c = ∫ψ_b`.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::EtaMap;

/// Value and first two derivatives of a scalar function of `x`.
pub type Jet = [f64; 3];

/// Known functions of a Class II model. Matrices are row-major `p_η × k`.
pub trait ClassIIModel: std::fmt::Debug + Send + Sync {
    fn p_eta(&self) -> usize;
    /// Length of `ψ_c`.
    fn k_psi(&self) -> usize;
    fn f1(&self, x: f64) -> f64;
    fn f2(&self, x: f64, xdot: f64, out: &mut [f64]);
    /// `∂f₂/∂x`.
    fn f2_dx(&self, x: f64, xdot: f64, out: &mut [f64]);
    fn psi_a(&self, x: f64, out: &mut [f64]);
    fn psi_a_d1(&self, x: f64, out: &mut [f64]);
    fn psi_c(&self, xdot: f64, out: &mut [f64]);
    /// `h̄₃` with derivatives; the full coefficient is `θ₂h̄₃`.
    fn h3(&self, x: f64) -> Jet;
    fn h4(&self, x: f64) -> Jet;
}

/// A Class II model with true parameters `θ = (θ₁, η)` and the
/// multiplicative coefficient `θ₂` (1 when absent).
#[derive(Debug, Clone)]
pub struct ClassIISystem {
    pub model: Arc<dyn ClassIIModel>,
    pub g: Arc<dyn EtaMap>,
    pub theta: Vec<f64>,
    pub theta2: f64,
    pub h3_floor: f64,
    g_true: DVector<f64>,
}

impl ClassIISystem {
    pub fn new(
        model: Arc<dyn ClassIIModel>,
        g: Arc<dyn EtaMap>,
        theta: Vec<f64>,
        theta2: f64,
        h3_floor: f64,
    ) -> Result<Self> {
        if g.p_eta() != model.p_eta() {
            return Err(Error::Dimension {
                context: "class II G(eta) output",
                expected: model.p_eta(),
                got: g.p_eta(),
            });
        }
        if theta.len() != 1 + g.n_eta() {
            return Err(Error::Dimension {
                context: "class II theta",
                expected: 1 + g.n_eta(),
                got: theta.len(),
            });
        }
        if !(h3_floor > 0.0) {
            return Err(Error::config("model.h3_floor", "must be positive"));
        }
        let g_true = g.eval(&theta[1..]);
        Ok(ClassIISystem {
            model,
            g,
            theta,
            theta2,
            h3_floor,
            g_true,
        })
    }

    pub fn p_eta(&self) -> usize {
        self.model.p_eta()
    }

    pub fn n_eta(&self) -> usize {
        self.g.n_eta()
    }

    pub fn k_psi(&self) -> usize {
        self.model.k_psi()
    }

    pub fn g_true(&self) -> &DVector<f64> {
        &self.g_true
    }

    /// Checked `h̄₃` jet.
    pub fn h3_checked(&self, x: f64, t: f64) -> Result<Jet> {
        let h = self.model.h3(x);
        if !(h[0].abs() >= self.h3_floor) {
            return Err(Error::Singularity {
                what: "h3",
                value: h[0].abs(),
                floor: self.h3_floor,
                t,
            });
        }
        Ok(h)
    }

    /// `ẍ` for the given state and input, using parameters `θ₁`, `θ₂`,
    /// `G`.
    pub fn accel_with(
        &self,
        x: f64,
        xdot: f64,
        u: f64,
        theta1: f64,
        theta2: f64,
        g: &[f64],
        t: f64,
    ) -> Result<f64> {
        let p = self.p_eta();
        let mut f2 = vec![0.0; p];
        self.model.f2(x, xdot, &mut f2);
        let h3 = self.h3_checked(x, t)?[0];
        let h4 = self.model.h4(x)[0];
        let drift: f64 = f2.iter().zip(g).map(|(a, b)| a * b).sum();
        Ok(self.model.f1(x) + drift + theta2 * h3 * (theta1 * h4).exp() + u)
    }

    /// `[ẋ, ẍ]` with the true parameters.
    pub fn rhs(&self, x: f64, xdot: f64, u: f64, t: f64) -> Result<[f64; 2]> {
        let a = self.accel_with(
            x,
            xdot,
            u,
            self.theta[0],
            self.theta2,
            self.g_true.as_slice(),
            t,
        )?;
        Ok([xdot, a])
    }
}

/// Treatment of `sign(ẋ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SignMode {
    /// Exact sign with `|v| < eps` mapped to 0.
    Exact { eps: f64 },
    /// `tanh(b₃v)`.
    Tanh { b3: f64 },
}

impl Default for SignMode {
    fn default() -> Self {
        SignMode::Exact { eps: 1e-6 }
    }
}

impl SignMode {
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        match *self {
            SignMode::Exact { eps } => {
                if v.abs() < eps {
                    0.0
                } else {
                    v.signum()
                }
            }
            SignMode::Tanh { b3 } => (b3 * v).tanh(),
        }
    }
}

/// Physical shank parameters of `Jẍ + b₁ẋ + b₂sign(ẋ) + k₁e^{−k₂x}(x − q₀)
/// + mgℓ sin x = u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShankParams {
    pub j: f64,
    pub b1: f64,
    pub b2: f64,
    pub k1: f64,
    pub k2: f64,
    pub mgl: f64,
    pub q0: f64,
}

impl ShankParams {
    /// `θ = (k₂, b₁/J, b₂/J, mgℓ/J)`.
    pub fn theta(&self) -> Vec<f64> {
        vec![self.k2, self.b1 / self.j, self.b2 / self.j, self.mgl / self.j]
    }

    /// `θ₂ = k₁/J`.
    pub fn theta2(&self) -> f64 {
        self.k1 / self.j
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j > 0.0) {
            return Err(Error::config("shank.j", "inertia must be positive"));
        }
        for (name, v) in [
            ("shank.b1", self.b1),
            ("shank.b2", self.b2),
            ("shank.k1", self.k1),
            ("shank.k2", self.k2),
            ("shank.mgl", self.mgl),
            ("shank.q0", self.q0),
        ] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Rest angle with `ẋ = 0` and `u = 0`: root of
    /// `k₁e^{−k₂x}(x − q₀) + mgℓ sin x` next to `q₀`, by bisection.
    pub fn rest_angle(&self) -> Result<f64> {
        let f = |x: f64| self.k1 * (-self.k2 * x).exp() * (x - self.q0) + self.mgl * x.sin();
        let (mut a, mut b) = if self.q0 <= 0.0 {
            (self.q0, 0.0)
        } else {
            (0.0, self.q0)
        };
        if f(a) == 0.0 {
            return Ok(a);
        }
        if f(a).signum() == f(b).signum() {
            return Err(Error::config("shank", "no rest angle between q0 and 0"));
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m).signum() == f(a).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Normalized shank: `f₁ = 0`, `f₂ = [−ẋ, −sign ẋ, −sin x]`,
/// `h̄₃ = q₀ − x`, `h₄ = −x`, `ψ_a = diag(−1, −1, 0)`,
/// `ψ_c = [ẋ, sign ẋ, 0]`. The input is `u/J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShankModel {
    pub q0: f64,
    pub sign: SignMode,
}

impl ClassIIModel for ShankModel {
    fn p_eta(&self) -> usize {
        3
    }
    fn k_psi(&self) -> usize {
        3
    }
    fn f1(&self, _x: f64) -> f64 {
        0.0
    }
    fn f2(&self, x: f64, xdot: f64, out: &mut [f64]) {
        out[0] = -xdot;
        out[1] = -self.sign.eval(xdot);
        out[2] = -x.sin();
    }
    fn f2_dx(&self, x: f64, _xdot: f64, out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = -x.cos();
    }
    fn psi_a(&self, _x: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] = -1.0;
        out[4] = -1.0;
    }
    fn psi_a_d1(&self, _x: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    fn psi_c(&self, xdot: f64, out: &mut [f64]) {
        out[0] = xdot;
        out[1] = self.sign.eval(xdot);
        out[2] = 0.0;
    }
    fn h3(&self, x: f64) -> Jet {
        [self.q0 - x, -1.0, 0.0]
    }
    fn h4(&self, x: f64) -> Jet {
        [-x, -1.0, 0.0]
    }
}
