//! Offline checks of a scenario: monotonicity LMI, `α` selection, Jacobians
//! and the regression residual at the true parameters.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::run::residual_tolerance;
use crate::error::{Error, Result};
use crate::monotone::{alpha_min, fd_jacobian, AlphaBounds, ExtendedMapping, MappingKind};
use crate::par::{self, Exec};

const GRID_PER_DIM: usize = 4;
const RANDOM_SAMPLES: usize = 200;
const FD_POINTS: usize = 100;
const FD_TOL: f64 = 1e-6;
const SEED: u64 = 0xC0FFEE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub name: String,
    pub checks: Vec<VerifyCheck>,
    /// `(α, min-eig)` pairs of the Class I sweep.
    pub alpha_sweep: Vec<(f64, f64)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, value: f64, detail: String) {
        self.checks.push(VerifyCheck {
            name: name.into(),
            passed,
            value,
            detail,
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify `{}`", self.name)?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {:<14} {:>12.5e}  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.detail
            )?;
        }
        if !self.alpha_sweep.is_empty() {
            writeln!(f, "  alpha sweep:")?;
            for (a, e) in &self.alpha_sweep {
                writeln!(f, "    alpha = {a:<12.5e} min-eig = {e:.5e}")?;
            }
        }
        write!(f, "  overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Smallest `α` in `[lo, hi]` with a nonnegative LMI minimum over `samples`,
/// by bisection. Assumes the minimum is nondecreasing in `α`.
pub fn alpha_crossing(
    mapping: &ExtendedMapping,
    samples: &[DVector<f64>],
    mut lo: f64,
    mut hi: f64,
    exec: Exec,
) -> Result<f64> {
    let sign = mapping
        .sign_theta1
        .ok_or_else(|| Error::Monotone("alpha crossing needs a class I mapping".into()))?;
    let at = |a: f64| ExtendedMapping::class1(mapping.spec.clone(), a, sign).lmi_min_eig(samples, exec);
    if at(hi)? < 0.0 {
        return Err(Error::Monotone(format!("LMI still fails at alpha = {hi}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Runs every check; a failing check is reported, not returned as an error.
pub fn verify(cfg: &ScenarioConfig, exec: Exec) -> Result<VerifyReport> {
    let mut rep = VerifyReport {
        name: cfg.label(),
        ..Default::default()
    };
    let mapping = cfg.extended_mapping()?;
    let bounds = cfg
        .param_box()?
        .ok_or_else(|| Error::config("mapping.bounds", "verify needs a parameter box"))?;
    let samples = bounds.samples(GRID_PER_DIM, RANDOM_SAMPLES, SEED);

    let eig = mapping.lmi_min_eig(&samples, exec)?;
    let (margin, what) = match mapping.kind() {
        MappingKind::ClassII => (
            2f64.min(cfg.mapping.rho_g * bounds.abs_min(0)) * (1.0 - 1e-6),
            "min(2, rho_G inf|theta1|)".to_string(),
        ),
        MappingKind::ClassI => (0.0, "0".to_string()),
    };
    rep.push(
        "lmi",
        eig > margin || (margin == 0.0 && eig > 0.0),
        eig,
        format!("min-eig over {} samples, required > {what}", samples.len()),
    );

    if mapping.kind() == MappingKind::ClassI {
        let spec = &mapping.spec;
        let ab = AlphaBounds::from_box(spec, &bounds, exec)?;
        let am = alpha_min(spec, ab)?;
        let alpha = mapping.alpha.unwrap_or(f64::NAN);
        rep.push(
            "alpha",
            alpha >= am,
            alpha,
            format!("configured alpha vs alpha_m = {am:.6e}"),
        );
        let sign = mapping.sign_theta1.unwrap_or(1.0);
        for f in [0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 4.0] {
            let a = f * am.max(f64::MIN_POSITIVE);
            let e = ExtendedMapping::class1(spec.clone(), a, sign).lmi_min_eig(&samples, exec)?;
            rep.alpha_sweep.push((a, e));
        }
    }

    let fd_pts = bounds.samples(2, FD_POINTS, SEED ^ 1);
    let fd_pts = &fd_pts[fd_pts.len() - FD_POINTS..];
    let errs: Vec<Result<f64>> = par::map(exec, fd_pts, |th| {
        let j = mapping.jac_w(th.as_slice())?;
        let fd = fd_jacobian(&mapping, th.as_slice(), 1e-5)?;
        Ok((&j - &fd).norm() / j.norm().max(1.0))
    });
    let mut worst: f64 = 0.0;
    for e in errs {
        worst = worst.max(e?);
    }
    rep.push(
        "jacobian_fd",
        worst <= FD_TOL,
        worst,
        format!("max relative deviation at {FD_POINTS} random points"),
    );

    let mut short = cfg.clone();
    let from = cfg.residual_from();
    short.integrator.t_end = cfg.integrator.t_end.min(from + 2.0);
    short.estimator.switch_on = 0.0;
    if let Some(g) = &mut short.gradient {
        g.freeze_at = 0.0;
    }
    let traj = short.build(false)?.simulate()?;
    let tol = residual_tolerance(cfg.model);
    rep.push(
        "residual",
        traj.stats.max_rel_residual <= tol,
        traj.stats.max_rel_residual,
        format!(
            "max |Y - phi'W(theta*)|/(1+|Y|) on [{from:.3}, {:.3}] s, required <= {tol:e}",
            short.integrator.t_end
        ),
    );
    Ok(rep)
}
