//! Executes a scenario and exports its artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ModelName, ScenarioConfig};
use super::plot::{line_plot, Series};
use crate::error::{Error, Result};
use crate::systems::SimTrajectory;

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "EXPID_OUTPUT_DIR";

/// Largest step-to-step decrease of `Δ` accepted as round-off. `P = F⁻¹`
/// accumulates `γ_W φφᵀ` with an eigenvalue spread near 10¹⁰ on the presets,
/// so its smallest eigenvalue carries an absolute error of order
/// `ε‖P‖`, which shows up in `Δ` at the 10⁻⁸ level.
pub const DELTA_DROP_TOL: f64 = 1e-7;

/// Residual tolerance of the consistency check, relative to `1 + |Y|`.
pub fn residual_tolerance(model: ModelName) -> f64 {
    match model {
        ModelName::Class1Synthetic => 1e-6,
        ModelName::Shank => 1e-5,
    }
}

/// Final scaled-error tolerance of the convergence check.
pub fn convergence_tolerance(model: ModelName) -> f64 {
    match model {
        ModelName::Class1Synthetic => 1e-3,
        ModelName::Shank => 1e-2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub model: ModelName,
    pub t_end: f64,
    pub steps: usize,
    pub theta_true: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub abs_errors: Vec<f64>,
    pub scaled_errors: Vec<f64>,
    pub error_norm: f64,
    /// `−slope` of a least-squares line through `ln‖θ̃‖` over the final third.
    pub decay_rate: Option<f64>,
    pub ie_min_eig: f64,
    pub ie_first_pass: Option<f64>,
    pub delta_end: f64,
    pub delta_max_drop: f64,
    pub max_rel_residual: f64,
    pub max_rel_residual_t: f64,
    pub k_hat: Option<f64>,
    pub k_true: Option<f64>,
    pub k_rel_error: Option<f64>,
    pub checks: BTreeMap<String, bool>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.values().all(|v| *v)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub trajectory: SimTrajectory,
}

/// Slope of the least-squares line through `(t, ln v)` over samples with
/// `t ≥ from` and `v > 0`.
pub fn log_slope(t: &[f64], v: &[f64], from: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(v)
        .filter(|(t, v)| **t >= from && **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    Some(sxy / sxx)
}

fn error_norms(traj: &SimTrajectory) -> Vec<f64> {
    traj.theta_err
        .iter()
        .map(|e| e.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}

pub fn summarize(cfg: &ScenarioConfig, traj: &SimTrajectory) -> RunSummary {
    let st = &traj.stats;
    let theta_hat = traj.theta_hat.last().cloned().unwrap_or_default();
    let theta_true = traj.theta_true.clone();
    let abs_errors: Vec<f64> = theta_hat.iter().zip(&theta_true).map(|(a, b)| (a - b).abs()).collect();
    let scaled_errors: Vec<f64> = abs_errors
        .iter()
        .zip(&theta_true)
        .map(|(e, t)| e / t.abs().max(1.0))
        .collect();
    let error_norm = abs_errors.iter().map(|e| e * e).sum::<f64>().sqrt();
    let t_end = cfg.integrator.t_end;
    let from = t_end - (t_end - cfg.gate().max(cfg.estimator.switch_on)) / 3.0;
    let decay_rate = log_slope(&traj.t, &error_norms(traj), from).map(|s| -s);
    let k_hat = traj.k_hat.last().cloned().filter(|k| k.is_finite());
    let k_rel_error = match (k_hat, traj.k_true) {
        (Some(k), Some(kt)) => Some((k - kt).abs() / kt.abs().max(1e-300)),
        _ => None,
    };

    let mut checks = BTreeMap::new();
    checks.insert(
        "residual".to_string(),
        st.max_rel_residual <= residual_tolerance(cfg.model),
    );
    if cfg.estimator.enabled {
        let tol = convergence_tolerance(cfg.model);
        checks.insert(
            "convergence".to_string(),
            !scaled_errors.is_empty() && scaled_errors.iter().all(|e| *e < tol),
        );
        checks.insert(
            "delta_monotone".to_string(),
            st.delta_max_drop <= DELTA_DROP_TOL && st.delta_max < 1.0,
        );
        checks.insert("ie_certified".to_string(), st.ie_first_pass.is_some());
        if let Some(e) = k_rel_error {
            checks.insert("second_stage".to_string(), e < 1e-2);
        }
    }

    RunSummary {
        name: cfg.label(),
        model: cfg.model,
        t_end,
        steps: st.steps,
        theta_true,
        theta_hat,
        abs_errors,
        scaled_errors,
        error_norm,
        decay_rate,
        ie_min_eig: st.ie_min_eig_end,
        ie_first_pass: st.ie_first_pass,
        delta_end: st.delta_end,
        delta_max_drop: st.delta_max_drop,
        max_rel_residual: st.max_rel_residual,
        max_rel_residual_t: st.max_rel_residual_t,
        k_hat,
        k_true: traj.k_true,
        k_rel_error,
        checks,
    }
}

/// Simulates the scenario; no files are touched.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let sim = cfg.build(true)?;
    log::info!("running `{}` for {} s at dt = {}", cfg.label(), cfg.integrator.t_end, cfg.integrator.dt);
    let trajectory = sim.simulate()?;
    let summary = summarize(cfg, &trajectory);
    Ok(RunOutcome { summary, trajectory })
}

/// `output.dir` unless [`OUTPUT_DIR_ENV`] is set.
pub fn output_root(cfg: &ScenarioConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => PathBuf::from(&cfg.output.dir),
    }
}

fn write_str(path: &Path, s: &str) -> Result<()> {
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Column names of `trajectory.csv`: `t`, the plant states, `u`, `y`.
pub fn trajectory_header(traj: &SimTrajectory) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(traj.state_names.iter().cloned());
    h.push("u".into());
    h.push("y".into());
    h
}

/// Column names of `estimator.csv`.
pub fn estimator_header(traj: &SimTrajectory, verbose: bool) -> Vec<String> {
    let ell = traj.theta_true.len();
    let mut h = vec!["t".to_string(), "Y".into(), "residual".into(), "delta".into(), "ie_min_eig".into()];
    h.extend((1..=ell).map(|i| format!("theta_hat{i}")));
    h.extend((1..=ell).map(|i| format!("theta_err{i}")));
    h.push("k_hat".into());
    if verbose {
        let s = traj.phi.first().map_or(0, |p| p.len());
        h.extend((1..=s).map(|i| format!("phi{i}")));
    }
    h
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn write_csv(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes CSVs, `summary.toml` and SVG plots into `dir`; returns the
/// written paths.
pub fn write_artifacts(cfg: &ScenarioConfig, out: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let traj = &out.trajectory;
    let n = traj.len();
    let mut written = Vec::new();

    let p = dir.join("trajectory.csv");
    write_csv(
        &p,
        &trajectory_header(traj),
        (0..n).map(|i| {
            let mut r = vec![traj.t[i]];
            r.extend_from_slice(&traj.state[i]);
            r.push(traj.u[i]);
            r.push(traj.y[i]);
            r
        }),
    )?;
    written.push(p);

    let verbose = cfg.output.verbose;
    let p = dir.join("estimator.csv");
    write_csv(
        &p,
        &estimator_header(traj, verbose),
        (0..n).map(|i| {
            let mut r = vec![traj.t[i], traj.reg_y[i], traj.residual[i], traj.delta[i], traj.ie_min_eig[i]];
            r.extend_from_slice(&traj.theta_hat[i]);
            r.extend_from_slice(&traj.theta_err[i]);
            r.push(traj.k_hat[i]);
            if verbose {
                r.extend_from_slice(&traj.phi[i]);
            }
            r
        }),
    )?;
    written.push(p);

    let p = dir.join("summary.toml");
    write_str(&p, &out.summary.to_toml()?)?;
    written.push(p);

    if cfg.output.plots {
        written.extend(write_plots(traj, dir)?);
    }
    Ok(written)
}

fn write_plots(traj: &SimTrajectory, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let ell = traj.theta_true.len();
    for i in 0..ell {
        let e: Vec<f64> = traj.theta_err.iter().map(|r| r[i]).collect();
        let label = format!("theta{0} - theta_hat{0}", i + 1);
        let svg = line_plot(&format!("Estimation error of theta{}", i + 1), &label, &[Series { label: &label, t: &traj.t, v: &e }]);
        let p = dir.join(format!("error_theta{}.svg", i + 1));
        write_str(&p, &svg)?;
        written.push(p);
    }
    if let Some(kt) = traj.k_true {
        let e: Vec<f64> = traj.k_hat.iter().map(|k| kt - k).collect();
        let svg = line_plot("Second-stage estimation error", "k - k_hat", &[Series { label: "k - k_hat", t: &traj.t, v: &e }]);
        let p = dir.join("error_k.svg");
        write_str(&p, &svg)?;
        written.push(p);
    }
    if let Some(ix) = traj.state_names.iter().position(|s| s == "xd") {
        let x: Vec<f64> = traj.state.iter().map(|s| s[0]).collect();
        let xd: Vec<f64> = traj.state.iter().map(|s| s[ix]).collect();
        let svg = line_plot(
            "System output",
            "x [rad]",
            &[Series { label: "x", t: &traj.t, v: &x }, Series { label: "x_d", t: &traj.t, v: &xd }],
        );
        let p = dir.join("output.svg");
        write_str(&p, &svg)?;
        written.push(p);
        let e: Vec<f64> = x.iter().zip(&xd).map(|(a, b)| a - b).collect();
        let svg = line_plot("Tracking error", "x - x_d [rad]", &[Series { label: "x - x_d", t: &traj.t, v: &e }]);
        let p = dir.join("tracking_error.svg");
        write_str(&p, &svg)?;
        written.push(p);
    }
    let svg = line_plot("Mixing determinant", "Delta", &[Series { label: "Delta", t: &traj.t, v: &traj.delta }]);
    let p = dir.join("delta.svg");
    write_str(&p, &svg)?;
    written.push(p);
    Ok(written)
}
