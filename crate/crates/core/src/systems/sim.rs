//! One experiment: plant, regressor filters and estimator integrated as a
//! single augmented ODE with fixed-step RK4.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::class1::ClassISystem;
use super::class2::ClassIISystem;
use super::excitation::Excitation;
use super::integrator::Rk4;
use super::tracking::{Controller, ReferenceGenerator};
use crate::error::{finite, Error, Result};
use crate::estimator::{
    estimator_errors, GradientConfig, GradientStageState, LsDrem, LsDremScratch,
};
use crate::regressors::{
    Class1Regressor, Class2Regressor, Class2Signals, IeMonitor, RegressorSample, H5678,
};

/// Input of a Class II plant. `scale` maps the physical input to the
/// normalized one entering the model (e.g. `1/J`).
#[derive(Debug, Clone)]
pub enum Class2Input {
    Open {
        excitation: Excitation,
        scale: f64,
    },
    Tracking {
        controller: Controller,
        reference: ReferenceGenerator,
        x1_0: [f64; 3],
        scale: f64,
    },
}

#[derive(Debug, Clone)]
pub enum Plant {
    ClassI {
        sys: ClassISystem,
        input: Excitation,
        x0: Vec<f64>,
    },
    ClassII {
        sys: ClassIISystem,
        input: Class2Input,
        x0: [f64; 2],
    },
}

impl Plant {
    pub fn dim(&self) -> usize {
        match self {
            Plant::ClassI { sys, .. } => sys.n(),
            Plant::ClassII { input, .. } => match input {
                Class2Input::Open { .. } => 2,
                Class2Input::Tracking { .. } => 6,
            },
        }
    }

    pub fn state_names(&self) -> Vec<String> {
        match self {
            Plant::ClassI { sys, .. } => (0..sys.n()).map(|i| format!("x{}", i + 1)).collect(),
            Plant::ClassII { input, .. } => {
                let mut v = vec!["x".to_string(), "xdot".to_string()];
                if let Class2Input::Tracking { .. } = input {
                    for n in ["xd", "xd_dot", "xd_ddot", "u_int"] {
                        v.push(n.into());
                    }
                }
                v
            }
        }
    }

    pub fn initial_state(&self) -> Vec<f64> {
        match self {
            Plant::ClassI { x0, .. } => x0.clone(),
            Plant::ClassII { input, x0, .. } => {
                let mut v = x0.to_vec();
                if let Class2Input::Tracking { x1_0, .. } = input {
                    v.extend_from_slice(x1_0);
                    v.push(0.0);
                }
                v
            }
        }
    }

    /// `r(0)` of the tracking controller.
    fn r0(&self) -> f64 {
        match self {
            Plant::ClassII {
                input: Class2Input::Tracking { controller, x1_0, .. },
                x0,
                ..
            } => controller.filtered_error(x0[0], x0[1], x1_0[0], x1_0[1]),
            _ => 0.0,
        }
    }

    /// Physical input at the given state.
    fn input(&self, t: f64, y: &[f64], r0: f64) -> f64 {
        match self {
            Plant::ClassI { input, .. } => input.eval(t),
            Plant::ClassII { input, .. } => match input {
                Class2Input::Open { excitation, .. } => excitation.eval(t),
                Class2Input::Tracking { controller, .. } => {
                    let r = controller.filtered_error(y[0], y[1], y[2], y[3]);
                    controller.law(r, r0, y[5])
                }
            },
        }
    }

    fn scale(&self) -> f64 {
        match self {
            Plant::ClassI { .. } => 1.0,
            Plant::ClassII { input, .. } => match input {
                Class2Input::Open { scale, .. } | Class2Input::Tracking { scale, .. } => *scale,
            },
        }
    }

    fn derivative(&self, t: f64, y: &[f64], u: f64, dy: &mut [f64]) -> Result<()> {
        match self {
            Plant::ClassI { sys, .. } => sys.rhs(y, &[u], dy),
            Plant::ClassII { sys, input, .. } => {
                let r = sys.rhs(y[0], y[1], u * self.scale(), t)?;
                dy[..2].copy_from_slice(&r);
                if let Class2Input::Tracking {
                    controller,
                    reference,
                    ..
                } = input
                {
                    reference.derivative(t, &y[2..5], &mut dy[2..5]);
                    let rr = controller.filtered_error(y[0], y[1], y[2], y[3]);
                    dy[5] = controller.integrand(rr);
                }
            }
        }
        Ok(())
    }

    pub fn theta_true(&self) -> &[f64] {
        match self {
            Plant::ClassI { sys, .. } => &sys.theta,
            Plant::ClassII { sys, .. } => &sys.theta,
        }
    }
}

#[derive(Debug, Clone)]
pub enum RegressorBank {
    ClassI(Class1Regressor),
    ClassII(Class2Regressor),
}

impl RegressorBank {
    pub fn for_plant(plant: &Plant, lambda: f64) -> Result<Self> {
        crate::filters::FilterSpec::new(crate::filters::FilterKind::Low1, lambda)?;
        Ok(match plant {
            Plant::ClassI { sys, .. } => RegressorBank::ClassI(Class1Regressor {
                lambda,
                p: sys.p_eta(),
            }),
            Plant::ClassII { sys, .. } => {
                RegressorBank::ClassII(Class2Regressor::new(lambda, sys.p_eta(), sys.k_psi())?)
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            RegressorBank::ClassI(r) => r.dim(),
            RegressorBank::ClassII(r) => r.dim(),
        }
    }

    pub fn s(&self) -> usize {
        match self {
            RegressorBank::ClassI(r) => r.s(),
            RegressorBank::ClassII(r) => r.s(),
        }
    }
}

/// Measured signals of one plant evaluation.
enum Signals {
    ClassI(H5678),
    ClassII(Class2Signals),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Recording interval; 0 records every step.
    pub record_dt: f64,
    /// Estimator switch-on time.
    pub switch_on: f64,
    /// Samples before this time are excluded from the estimator.
    pub gate: f64,
    /// Threshold `C_c` of the excitation check.
    pub ie_threshold: f64,
    /// Residual statistics are collected from this time on.
    pub residual_from: f64,
}

/// Second-stage configuration: estimates are frozen at `freeze_at` and
/// adaptation starts one settling time of its filters later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientStagePlan {
    pub cfg: GradientConfig,
    pub freeze_at: f64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub plant: Plant,
    pub regressor: RegressorBank,
    pub estimator: Option<LsDrem>,
    pub gradient: Option<GradientStagePlan>,
    /// `W(θ*)` for the residual oracle.
    pub w_true: Option<DVector<f64>>,
    pub opts: SimOptions,
}

/// Full-rate statistics gathered during a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub steps: usize,
    /// `max |Y − φᵀW(θ*)| / (1 + |Y|)` from `residual_from` on.
    pub max_rel_residual: f64,
    /// Time of that maximum.
    pub max_rel_residual_t: f64,
    /// Largest decrease of `Δ` between consecutive steps (0 if monotone).
    pub delta_max_drop: f64,
    /// Time of that decrease.
    pub delta_max_drop_t: f64,
    pub delta_max: f64,
    pub delta_end: f64,
    /// Largest asymmetry removed from `P = F⁻¹` in one step.
    pub p_max_asymmetry: f64,
    pub ie_first_pass: Option<f64>,
    pub ie_min_eig_end: f64,
    /// Smallest `|h₃|` seen.
    pub h3_min: f64,
    pub gradient_stalled: bool,
}

/// Recorded time series.
#[derive(Debug, Clone, Default)]
pub struct SimTrajectory {
    pub state_names: Vec<String>,
    pub t: Vec<f64>,
    pub state: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    /// `y₁` (Class I) or `x` (Class II).
    pub y: Vec<f64>,
    pub reg_y: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
    pub delta: Vec<f64>,
    pub theta_hat: Vec<Vec<f64>>,
    pub theta_err: Vec<Vec<f64>>,
    pub ie_min_eig: Vec<f64>,
    pub k_hat: Vec<f64>,
    pub theta_true: Vec<f64>,
    pub k_true: Option<f64>,
    pub stats: SimStats,
}

impl SimTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.state.last().map(|v| v.as_slice())
    }
}

struct Layout {
    plant: usize,
    reg: usize,
    est: usize,
}

impl Simulation {
    pub fn validate(&self) -> Result<()> {
        let o = &self.opts;
        if !(o.dt > 0.0 && o.dt.is_finite()) {
            return Err(Error::config("integrator.dt", "must be positive"));
        }
        if !(o.t_end > 0.0) {
            return Err(Error::config("integrator.t_end", "horizon must be positive"));
        }
        if self.plant.initial_state().len() != self.plant.dim() {
            return Err(Error::Dimension {
                context: "initial plant state",
                expected: self.plant.dim(),
                got: self.plant.initial_state().len(),
            });
        }
        if let Some(est) = &self.estimator {
            if est.s() != self.regressor.s() {
                return Err(Error::Dimension {
                    context: "estimator vs regressor",
                    expected: self.regressor.s(),
                    got: est.s(),
                });
            }
        }
        if let Some(w) = &self.w_true {
            if w.len() != self.regressor.s() {
                return Err(Error::Dimension {
                    context: "W(theta*)",
                    expected: self.regressor.s(),
                    got: w.len(),
                });
            }
        }
        if let Some(g) = &self.gradient {
            g.cfg.validate()?;
            if !matches!(self.plant, Plant::ClassII { .. }) {
                return Err(Error::config("gradient", "only defined for class II plants"));
            }
            if self.estimator.is_none() {
                return Err(Error::config("gradient", "needs the first-stage estimator"));
            }
        }
        Ok(())
    }

    fn layout(&self) -> Layout {
        Layout {
            plant: self.plant.dim(),
            reg: self.regressor.dim(),
            est: self.estimator.as_ref().map_or(0, |e| e.dim()),
        }
    }

    fn signals(&self, t: f64, y: &[f64], u: f64) -> Result<(Signals, f64, f64)> {
        match (&self.plant, &self.regressor) {
            (Plant::ClassI { sys, .. }, RegressorBank::ClassI(_)) => {
                let y1 = sys.y1(y, &[u], t)?;
                let h3 = sys.model.h3(y, &[u]).abs();
                Ok((Signals::ClassI(H5678::compute(sys, y, &[u], y1, t)?), y1, h3))
            }
            (Plant::ClassII { sys, .. }, RegressorBank::ClassII(_)) => {
                let ub = u * self.plant.scale();
                let h3 = sys.model.h3(y[0])[0].abs();
                Ok((
                    Signals::ClassII(Class2Signals::compute(sys, y[0], y[1], ub, t)?),
                    y[0],
                    h3,
                ))
            }
            _ => Err(Error::config("regressor", "class does not match the plant")),
        }
    }

    fn reg_derivative(&self, z: &[f64], sig: &Signals, dz: &mut [f64]) {
        match (&self.regressor, sig) {
            (RegressorBank::ClassI(r), Signals::ClassI(h)) => r.derivative(z, h, dz),
            (RegressorBank::ClassII(r), Signals::ClassII(s)) => r.derivative(z, s, dz),
            _ => unreachable!("signals are built for the matching regressor"),
        }
    }

    fn reg_output(&self, z: &[f64], sig: &Signals, phi: &mut [f64]) -> f64 {
        match (&self.regressor, sig) {
            (RegressorBank::ClassI(r), Signals::ClassI(h)) => r.output(z, h, phi),
            (RegressorBank::ClassII(r), Signals::ClassII(s)) => r.output(z, s, phi),
            _ => unreachable!("signals are built for the matching regressor"),
        }
    }

    /// Time from which the estimator integrates.
    pub fn t_active(&self) -> f64 {
        self.opts.switch_on.max(self.opts.gate)
    }

    pub fn simulate(&self) -> Result<SimTrajectory> {
        self.validate()?;
        let lay = self.layout();
        let dim = lay.plant + lay.reg + lay.est;
        let s = self.regressor.s();
        let dt = self.opts.dt;
        let n_steps = (self.opts.t_end / dt).round() as usize;
        let every = if self.opts.record_dt > 0.0 {
            ((self.opts.record_dt / dt).round() as usize).max(1)
        } else {
            1
        };
        let t_active = self.t_active();
        let r0 = self.plant.r0();

        let mut y = self.plant.initial_state();
        y.resize(lay.plant + lay.reg, 0.0);
        if let Some(est) = &self.estimator {
            y.extend(est.initial_state());
        }
        debug_assert_eq!(y.len(), dim);

        let mut rk = Rk4::new(dim);
        let mut sc = self
            .estimator
            .as_ref()
            .map_or_else(|| LsDremScratch::new(s), |e| e.scratch());
        let mut phi_stage = vec![0.0; s];
        let mut ie = IeMonitor::new(s, t_active);
        let mut grad = match &self.gradient {
            Some(g) => Some(GradientStageState::new(g.cfg)?),
            None => None,
        };
        let mut frozen: Option<Vec<f64>> = None;

        let theta_true = self.plant.theta_true().to_vec();
        let mut traj = SimTrajectory {
            state_names: self.plant.state_names(),
            theta_true: theta_true.clone(),
            k_true: match (&self.plant, &self.gradient) {
                (Plant::ClassII { sys, .. }, Some(_)) => Some(sys.theta2),
                _ => None,
            },
            ..Default::default()
        };
        let mut stats = SimStats {
            h3_min: f64::INFINITY,
            ..Default::default()
        };
        let mut prev_delta = 0.0;

        for step in 0..=n_steps {
            let t = step as f64 * dt;
            if step > 0 {
                let t0 = t - dt;
                let this = self;
                let sc_ref = &mut sc;
                let phi_ref = &mut phi_stage;
                rk.step_with(&mut y, dt, |frac, z, dz| {
                    let ts = t0 + frac * dt;
                    let (zp, rest) = z.split_at(lay.plant);
                    let (zr, ze) = rest.split_at(lay.reg);
                    let (dp, drest) = dz.split_at_mut(lay.plant);
                    let (dr, de) = drest.split_at_mut(lay.reg);
                    let u = this.plant.input(ts, zp, r0);
                    this.plant.derivative(ts, zp, u, dp)?;
                    let (sig, _, _) = this.signals(ts, zp, u)?;
                    this.reg_derivative(zr, &sig, dr);
                    if let Some(est) = &this.estimator {
                        let yy = this.reg_output(zr, &sig, phi_ref);
                        est.derivative(ze, yy, phi_ref, ts >= t_active, sc_ref, de)?;
                    }
                    Ok(())
                })?;
                if let Some(est) = &self.estimator {
                    let off = lay.plant + lay.reg;
                    let asym = est.post_step(&mut y[off..], &mut sc)?;
                    stats.p_max_asymmetry = stats.p_max_asymmetry.max(asym);
                }
                for v in &y {
                    finite("simulation state", *v, t)?;
                }
            }

            // Measurements and regression at the step end.
            let (zp, rest) = y.split_at(lay.plant);
            let (zr, ze) = rest.split_at(lay.reg);
            let u = self.plant.input(t, zp, r0);
            let (sig, out_y, h3) = self.signals(t, zp, u)?;
            stats.h3_min = stats.h3_min.min(h3);
            let mut phi = vec![0.0; s];
            let reg_y = self.reg_output(zr, &sig, &mut phi);
            let sample = RegressorSample { t, y: reg_y, phi };
            let residual = match &self.w_true {
                Some(w) => sample.residual(w.as_slice()),
                None => f64::NAN,
            };
            if t >= self.opts.residual_from && residual.is_finite() {
                let rel = residual.abs() / (1.0 + reg_y.abs());
                if rel > stats.max_rel_residual {
                    stats.max_rel_residual = rel;
                    stats.max_rel_residual_t = t;
                }
            }
            if t >= t_active {
                ie.ie_update(&sample.phi, dt)?;
                ie.track_first_pass(self.opts.ie_threshold);
            }

            let (delta, theta_hat) = match &self.estimator {
                Some(est) => {
                    let (d, _) = est.delta_ycal(ze, &mut sc)?;
                    (d, est.theta_hat(ze).to_vec())
                }
                None => (0.0, Vec::new()),
            };
            if step > 0 {
                if prev_delta - delta > stats.delta_max_drop {
                    stats.delta_max_drop = prev_delta - delta;
                    stats.delta_max_drop_t = t;
                }
            }
            prev_delta = delta;
            stats.delta_max = stats.delta_max.max(delta);

            let mut k_hat = f64::NAN;
            if let (Some(g), Some(plan), Plant::ClassII { sys, .. }) =
                (grad.as_mut(), &self.gradient, &self.plant)
            {
                if t >= plan.freeze_at && frozen.is_none() {
                    frozen = Some(theta_hat.clone());
                }
                let est_now = frozen.as_ref().unwrap_or(&theta_hat);
                let adapt = t >= plan.freeze_at + 5.0 / plan.cfg.lambda;
                if step > 0 {
                    k_hat = g.gradient_stage_step(
                        sys,
                        est_now[0],
                        &est_now[1..],
                        zp[0],
                        zp[1],
                        u * self.plant.scale(),
                        dt,
                        adapt,
                    )?;
                } else {
                    k_hat = g.k_hat;
                }
            }

            if step % every == 0 || step == n_steps {
                traj.t.push(t);
                traj.state.push(zp.to_vec());
                traj.u.push(u);
                traj.y.push(out_y);
                traj.reg_y.push(reg_y);
                traj.residual.push(residual);
                traj.delta.push(delta);
                if !theta_hat.is_empty() {
                    traj.theta_err
                        .push(estimator_errors(&theta_hat, &theta_true)?.abs);
                }
                traj.phi.push(sample.phi);
                traj.theta_hat.push(theta_hat);
                traj.ie_min_eig.push(ie.min_eig());
                traj.k_hat.push(k_hat);
            }
        }

        stats.steps = n_steps;
        stats.delta_end = prev_delta;
        stats.ie_first_pass = ie.first_pass();
        stats.ie_min_eig_end = ie.min_eig();
        stats.gradient_stalled = grad.as_ref().is_some_and(|g| g.stalled());
        traj.stats = stats;
        Ok(traj)
    }
}
