//! Reference generator and robust tracking controller for the shank
//! scenario.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::integrator::{lerp, Rk4};
use crate::error::{Error, Result};

/// Piecewise-constant drive `w(t)`: `values[i]` applies from `starts[i]`
/// until the next start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub starts: Vec<f64>,
    pub values: Vec<f64>,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.starts.is_empty() || self.starts.len() != self.values.len() {
            return Err(Error::config(
                "reference.schedule",
                "starts and values must be nonempty and of equal length",
            ));
        }
        if self.starts[0] != 0.0 {
            return Err(Error::config("reference.schedule", "first segment must start at 0"));
        }
        if self.starts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("reference.schedule", "starts must be increasing"));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.starts.partition_point(|s| *s <= t);
        self.values[i.saturating_sub(1)]
    }
}

/// `ẋ₁ = Ax₁ + Bw(t)`, `x₁ = [x_d, ẋ_d, ẍ_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceGenerator {
    /// Row-major `A`.
    pub a: [f64; 9],
    pub b: [f64; 3],
    pub schedule: Schedule,
}

impl ReferenceGenerator {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_row_slice(&self.a)
    }

    /// Rejects non-Hurwitz `A`.
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        let eig = self.matrix().complex_eigenvalues();
        if eig.iter().any(|l| !(l.re < 0.0)) {
            return Err(Error::config(
                "reference.a",
                format!("matrix is not Hurwitz, eigenvalues {:?}", eig.as_slice()),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn derivative(&self, t: f64, x1: &[f64], dx1: &mut [f64]) {
        let w = self.schedule.eval(t);
        for i in 0..3 {
            dx1[i] = (0..3).map(|j| self.a[i * 3 + j] * x1[j]).sum::<f64>() + self.b[i] * w;
        }
    }

    /// Steady state `−A⁻¹Bw` for a constant drive.
    pub fn steady_state(&self, w: f64) -> Result<Vector3<f64>> {
        let inv = self
            .matrix()
            .try_inverse()
            .ok_or_else(|| Error::config("reference.a", "matrix is singular"))?;
        Ok(-inv * Vector3::from_row_slice(&self.b) * w)
    }
}

/// Standalone reference state advanced sample by sample.
#[derive(Debug, Clone)]
pub struct ReferenceState {
    pub gen: ReferenceGenerator,
    pub x1: [f64; 3],
    pub t: f64,
    rk: Rk4,
}

impl ReferenceState {
    pub fn new(gen: ReferenceGenerator, x1: [f64; 3]) -> Result<Self> {
        gen.validate()?;
        Ok(ReferenceState {
            gen,
            x1,
            t: 0.0,
            rk: Rk4::new(3),
        })
    }

    /// Advances by `dt` and returns `(x_d, ẋ_d, ẍ_d)`.
    pub fn step(&mut self, dt: f64) -> Result<[f64; 3]> {
        let (gen, t0) = (&self.gen, self.t);
        self.rk.step_with(&mut self.x1, dt, |frac, z, dz| {
            gen.derivative(t0 + frac * dt, z, dz);
            Ok(())
        })?;
        self.t += dt;
        Ok(self.x1)
    }
}

/// Sign convention of the filtered tracking error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorConvention {
    /// `e = x_d − x`, `r = ė + μe`.
    #[default]
    Stable,
    /// `e = x − x_d`, `r = ė − μe`.
    Literal,
}

/// `u = (k₁+1)r − (k₁+1)r(0) + ∫[(k₁+1)k₂r + k₃sign(r)]dτ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Controller {
    pub mu: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    #[serde(default)]
    pub convention: ErrorConvention,
}

impl Controller {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("controller.mu", self.mu),
            ("controller.k1", self.k1),
            ("controller.k2", self.k2),
            ("controller.k3", self.k3),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be nonnegative"));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn filtered_error(&self, x: f64, xdot: f64, xd: f64, xd_dot: f64) -> f64 {
        match self.convention {
            ErrorConvention::Stable => (xd_dot - xdot) + self.mu * (xd - x),
            ErrorConvention::Literal => (xdot - xd_dot) - self.mu * (x - xd),
        }
    }

    /// Integrand of the control law.
    #[inline]
    pub fn integrand(&self, r: f64) -> f64 {
        (self.k1 + 1.0) * self.k2 * r + self.k3 * sign(r)
    }

    #[inline]
    pub fn law(&self, r: f64, r0: f64, integral: f64) -> f64 {
        (self.k1 + 1.0) * (r - r0) + integral
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum()
    }
}

/// Standalone controller with its integral state.
#[derive(Debug, Clone)]
pub struct ControllerState {
    pub ctrl: Controller,
    pub integral: f64,
    r0: Option<f64>,
    last_r: Option<f64>,
    rk: Rk4,
}

impl ControllerState {
    pub fn new(ctrl: Controller) -> Self {
        ControllerState {
            ctrl,
            integral: 0.0,
            r0: None,
            last_r: None,
            rk: Rk4::new(1),
        }
    }

    /// Advances the integral over `dt` towards the new sample (filtered error
    /// interpolated linearly) and returns the control at the new time. The
    /// first call also fixes `r(0)`.
    pub fn step(&mut self, x: f64, xdot: f64, xd: f64, xd_dot: f64, dt: f64) -> Result<f64> {
        let r = self.ctrl.filtered_error(x, xdot, xd, xd_dot);
        let r0 = *self.r0.get_or_insert(r);
        let prev = self.last_r.unwrap_or(r);
        let ctrl = self.ctrl;
        let mut i = [self.integral];
        self.rk.step_with(&mut i, dt, |frac, _, di| {
            di[0] = ctrl.integrand(lerp(prev, r, frac));
            Ok(())
        })?;
        self.integral = i[0];
        self.last_r = Some(r);
        Ok(ctrl.law(r, r0, self.integral))
    }
}

/// The paper reference generator with poles −10, −10, −60 and drive
/// `1000π/3`, `1000π`, `2500π` switching at 20 s and 40 s.
pub fn default_reference() -> ReferenceGenerator {
    use std::f64::consts::PI;
    ReferenceGenerator {
        a: [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -6000.0, -1300.0, -80.0],
        b: [0.0, 0.0, 1.0],
        schedule: Schedule {
            starts: vec![0.0, 20.0, 40.0],
            values: vec![1000.0 * PI / 3.0, 1000.0 * PI, 2500.0 * PI],
        },
    }
}

pub fn default_controller() -> Controller {
    Controller {
        mu: 4.0,
        k1: 1.0,
        k2: 2.0,
        k3: 40.0,
        convention: ErrorConvention::Stable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_lookup() {
        let s = default_reference().schedule;
        s.validate().unwrap();
        let pi = std::f64::consts::PI;
        assert_eq!(s.eval(0.0), 1000.0 * pi / 3.0);
        assert_eq!(s.eval(19.999), 1000.0 * pi / 3.0);
        assert_eq!(s.eval(20.0), 1000.0 * pi);
        assert_eq!(s.eval(39.0), 1000.0 * pi);
        assert_eq!(s.eval(100.0), 2500.0 * pi);
    }

    #[test]
    fn schedule_validation() {
        let bad = Schedule { starts: vec![0.0, 5.0, 5.0], values: vec![1.0; 3] };
        assert!(bad.validate().is_err());
        let bad = Schedule { starts: vec![1.0], values: vec![1.0] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn reference_is_hurwitz_with_expected_poles() {
        let g = default_reference();
        g.validate().unwrap();
        let mut re: Vec<f64> = g.matrix().complex_eigenvalues().iter().map(|l| l.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 60.0).abs() < 1e-6);
        assert!((re[1] + 10.0).abs() < 1e-4 && (re[2] + 10.0).abs() < 1e-4);
        let mut unstable = g.clone();
        unstable.a[8] = 80.0;
        assert!(unstable.validate().is_err());
    }

    #[test]
    fn reference_zero_drive_stays_at_rest() {
        let mut g = default_reference();
        g.schedule.values = vec![0.0; 3];
        let mut r = ReferenceState::new(g, [0.0; 3]).unwrap();
        for _ in 0..1000 {
            assert_eq!(r.step(1e-3).unwrap(), [0.0; 3]);
        }
    }

    #[test]
    fn reference_dc_gain() {
        let mut g = default_reference();
        let c = 1200.0;
        g.schedule = Schedule { starts: vec![0.0], values: vec![c] };
        let ss = g.steady_state(c).unwrap();
        assert!((ss[0] - c / 6000.0).abs() < 1e-12);
        let mut r = ReferenceState::new(g, [0.0; 3]).unwrap();
        let mut x = [0.0; 3];
        for _ in 0..5000 {
            x = r.step(1e-3).unwrap();
        }
        assert!((x[0] - c / 6000.0).abs() < 1e-9);
        assert!(x[1].abs() < 1e-9 && x[2].abs() < 1e-8);
    }

    #[test]
    fn controller_zero_error_gives_zero_input() {
        let mut c = ControllerState::new(default_controller());
        for k in 0..100 {
            let xd = (k as f64 * 0.01).sin();
            assert_eq!(c.step(xd, 0.3, xd, 0.3, 0.01).unwrap(), 0.0);
        }
    }

    #[test]
    fn controller_constant_filtered_error() {
        // ė = 0, e = c/μ: r ≡ c, u(t) = ((k₁+1)k₂c + k₃ sign c)·t.
        let ctrl = default_controller();
        let c = 0.25;
        let mut st = ControllerState::new(ctrl);
        let dt = 1e-3;
        let mut u = 0.0;
        for _ in 0..2000 {
            u = st.step(0.0, 0.0, c / ctrl.mu, 0.0, dt).unwrap();
        }
        let expected = ((ctrl.k1 + 1.0) * ctrl.k2 * c + ctrl.k3) * 2.0;
        assert!((u - expected).abs() < 1e-9, "{u} vs {expected}");
    }

    #[test]
    fn literal_convention_flips_sign() {
        let mut c = default_controller();
        let r1 = c.filtered_error(0.1, 0.2, 0.3, 0.5);
        c.convention = ErrorConvention::Literal;
        let r2 = c.filtered_error(0.1, 0.2, 0.3, 0.5);
        assert!((r1 - (0.3 + 4.0 * 0.2)).abs() < 1e-15);
        assert!((r2 - (-0.3 + 4.0 * 0.2)).abs() < 1e-15);
    }
}
