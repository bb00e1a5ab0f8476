//! Second-stage estimation of the coefficient `θ₂` multiplying the
//! exponential once `θ₁` and `η` are known (certainty equivalence).
//!
//! Filtering `ẍ = f₁ + f₂ᵀG(η) + θ₂h̄₃e^{θ₁h₄} + u` with `L = λ/(p+λ)` gives
//! the scalar linear regression `z = θ₂ζ`,
//!
//! ```text
//! z = λp/(p+λ) ẋ − L(f₁ + f₂ᵀG(η̂) + u),   ζ = L(h̄₃e^{θ̂₁h₄}),
//! ```
//!
//! solved by the normalized gradient `θ̂̇₂ = γζ(z − ζθ̂₂)/(1 + ζ²)`. Over one
//! sample the regressor is held, so the update is integrated exactly; this
//! keeps large gains stable at any step size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{FilterKind, FilterSpec, FilterState};
use crate::systems::class2::ClassIISystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientConfig {
    pub gamma: f64,
    pub lambda: f64,
    #[serde(default)]
    pub k0: f64,
    /// `|ζ|` below which the regressor counts as absent.
    #[serde(default = "default_stall_eps")]
    pub stall_eps: f64,
    /// Duration of absent regressor after which a stall is reported.
    #[serde(default = "default_stall_window")]
    pub stall_window: f64,
}

fn default_stall_eps() -> f64 {
    1e-9
}

fn default_stall_window() -> f64 {
    1.0
}

impl GradientConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::config("gradient.gamma", "must be positive"));
        }
        FilterSpec::new(FilterKind::Low1, self.lambda)
            .map_err(|_| Error::config("gradient.lambda", "must be positive"))?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GradientStageState {
    pub cfg: GradientConfig,
    pub k_hat: f64,
    hp_xdot: FilterState,
    lp_drift: FilterState,
    lp_zeta: FilterState,
    quiet_for: f64,
    stalled: bool,
    last: (f64, f64),
}

impl GradientStageState {
    pub fn new(cfg: GradientConfig) -> Result<Self> {
        cfg.validate()?;
        let hp = FilterSpec::new(FilterKind::HighPass1, cfg.lambda)?;
        let lp = FilterSpec::new(FilterKind::Low1, cfg.lambda)?;
        Ok(GradientStageState {
            cfg,
            k_hat: cfg.k0,
            hp_xdot: FilterState::new(hp),
            lp_drift: FilterState::new(lp),
            lp_zeta: FilterState::new(lp),
            quiet_for: 0.0,
            stalled: false,
            last: (0.0, 0.0),
        })
    }

    /// True once the regressor has stayed below `stall_eps` for
    /// `stall_window` seconds while adapting.
    pub fn stalled(&self) -> bool {
        self.stalled
    }

    /// Last `(z, ζ)`.
    pub fn regression(&self) -> (f64, f64) {
        self.last
    }

    /// Advances the filters with the estimates `θ̂₁`, `η̂` substituted and,
    /// when `adapt` is set, updates `θ̂₂`. Returns the current `θ̂₂`.
    #[allow(clippy::too_many_arguments)]
    pub fn gradient_stage_step(
        &mut self,
        sys: &ClassIISystem,
        theta1_hat: f64,
        eta_hat: &[f64],
        x: f64,
        xdot: f64,
        u: f64,
        dt: f64,
        adapt: bool,
    ) -> Result<f64> {
        let t = self.hp_xdot.time() + dt;
        let p = sys.p_eta();
        let g = sys.g.eval(eta_hat);
        let mut f2 = vec![0.0; p];
        sys.model.f2(x, xdot, &mut f2);
        let drift = sys.model.f1(x) + f2.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>() + u;
        let h3 = sys.h3_checked(x, t)?[0];
        let basis = h3 * (theta1_hat * sys.model.h4(x)[0]).exp();

        let z = self.hp_xdot.step(xdot, dt)? - self.lp_drift.step(drift, dt)?;
        let zeta = self.lp_zeta.step(basis, dt)?;
        self.last = (z, zeta);
        if !adapt {
            return Ok(self.k_hat);
        }
        if zeta.abs() < self.cfg.stall_eps {
            self.quiet_for += dt;
            if self.quiet_for >= self.cfg.stall_window && !self.stalled {
                self.stalled = true;
                log::warn!("gradient stage regressor vanished for {:.3} s at t = {t:.3}", self.quiet_for);
            }
            return Ok(self.k_hat);
        }
        self.quiet_for = 0.0;
        let a = self.cfg.gamma * zeta * zeta / (1.0 + zeta * zeta);
        let e = z - zeta * self.k_hat;
        self.k_hat += -(-a * dt).exp_m1() * e / zeta;
        Ok(self.k_hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::IdentityMap;
    use crate::systems::class2::{ShankModel, SignMode};
    use crate::systems::integrator::Rk4;
    use std::sync::Arc;

    fn shank() -> ClassIISystem {
        ClassIISystem::new(
            Arc::new(ShankModel { q0: -0.5, sign: SignMode::Tanh { b3: 50.0 } }),
            Arc::new(IdentityMap(3)),
            vec![1.5, 1.7, 0.7, 34.0],
            17.0,
            1e-6,
        )
        .unwrap()
    }

    fn run(k0: f64, gamma: f64, t_end: f64) -> (GradientStageState, f64) {
        let sys = shank();
        let cfg = GradientConfig { gamma, lambda: 10.0, k0, stall_eps: 1e-9, stall_window: 1.0 };
        let mut g = GradientStageState::new(cfg).unwrap();
        let dt = 1e-4;
        let x_eq = crate::systems::class2::ShankParams {
            j: 1.0, b1: 1.7, b2: 0.7, k1: 17.0, k2: 1.5, mgl: 34.0, q0: -0.5,
        }
        .rest_angle()
        .unwrap();
        let mut y = [x_eq, 0.0];
        let mut rk = Rk4::new(2);
        let u = |t: f64| 8.0 * (1.3 * t).sin() + 5.0 * (3.1 * t).sin();
        let n = (t_end / dt) as usize;
        for k in 0..n {
            let t = k as f64 * dt;
            rk.step_with(&mut y, dt, |frac, z, dz| {
                dz.copy_from_slice(&sys.rhs(z[0], z[1], u(t + frac * dt), t)?);
                Ok(())
            })
            .unwrap();
            let t1 = t + dt;
            g.gradient_stage_step(&sys, 1.5, &[1.7, 0.7, 34.0], y[0], y[1], u(t1), dt, t1 > 0.5)
                .unwrap();
        }
        (g, 17.0)
    }

    #[test]
    fn exact_start_stays_put() {
        let (g, k) = run(17.0, 1e6, 3.0);
        assert!((g.k_hat - k).abs() < 1e-3 * k, "{}", g.k_hat);
    }

    #[test]
    fn converges_from_zero() {
        let (g, k) = run(0.0, 1e6, 5.0);
        assert!((g.k_hat - k).abs() < 0.01 * k, "{}", g.k_hat);
        assert!(!g.stalled());
    }

    #[test]
    fn stall_is_reported() {
        let cfg = GradientConfig { gamma: 1.0, lambda: 5.0, k0: 1.0, stall_eps: 1e-9, stall_window: 0.1 };
        let mut g = GradientStageState::new(cfg).unwrap();
        #[derive(Debug)]
        struct ZeroH3;
        impl crate::systems::class2::ClassIIModel for ZeroH3 {
            fn p_eta(&self) -> usize { 1 }
            fn k_psi(&self) -> usize { 1 }
            fn f1(&self, _x: f64) -> f64 { 0.0 }
            fn f2(&self, _x: f64, _v: f64, o: &mut [f64]) { o[0] = 0.0 }
            fn f2_dx(&self, _x: f64, _v: f64, o: &mut [f64]) { o[0] = 0.0 }
            fn psi_a(&self, _x: f64, o: &mut [f64]) { o[0] = 0.0 }
            fn psi_a_d1(&self, _x: f64, o: &mut [f64]) { o[0] = 0.0 }
            fn psi_c(&self, _v: f64, o: &mut [f64]) { o[0] = 0.0 }
            fn h3(&self, _x: f64) -> [f64; 3] { [1.0, 0.0, 0.0] }
            fn h4(&self, _x: f64) -> [f64; 3] { [-1e4, 0.0, 0.0] }
        }
        let sys = ClassIISystem::new(Arc::new(ZeroH3), Arc::new(IdentityMap(1)), vec![1.0, 0.0], 1.0, 1e-6)
            .unwrap();
        for _ in 0..2000 {
            g.gradient_stage_step(&sys, 1.0, &[0.0], 0.0, 0.0, 0.0, 1e-3, true).unwrap();
        }
        assert!(g.stalled());
        assert_eq!(g.k_hat, 1.0);
    }
}
