//! LS+DREM interlaced estimator.
//!
//! ```text
//! Ŵ̇ = γ_W Fφ(Y − φᵀŴ)            Ŵ(0) = W₀
//! Ḟ = −γ_W FφφᵀF                  F(0) = I/f₀
//! θ̂̇ = ΔΓT_W[𝒴 − ΔW(θ̂)]
//! Δ = det(I − f₀F),  𝒴 = adj(I − f₀F)(Ŵ − f₀FW₀)
//! ```
//!
//! The least-squares part is carried in information form, `P = F⁻¹` and
//! `q = F⁻¹Ŵ`, which obey the linear equations
//!
//! ```text
//! Ṗ = γ_W φφᵀ                     P(0) = f₀I
//! q̇ = γ_W φY                      q(0) = f₀W₀
//! ```
//!
//! and carry no stiffness however large `γ_W|φ|²` gets. To keep round-off
//! proportional to the prediction error rather than to `|q|`, `q` is stored
//! relative to a base point: `q = P Ŵ_b + r`, so `Ŵ = Ŵ_b + P⁻¹r` and
//! `ṙ = γ_W φ(Y − φᵀŴ_b)`. [`LsDrem::rebase`] folds `r` into `Ŵ_b` between
//! steps. The state is packed as
//! `[r (s) | P (s·s, row-major) | θ̂ (ℓ) | Ŵ_b (s)]` so that it can be
//! embedded in a larger ODE.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::adjugate::AdjugateWorkspace;

use crate::error::{Error, Result};
use crate::monotone::ExtendedMapping;
use std::sync::Arc;
use crate::regressors::RegressorSample;
use crate::systems::integrator::{lerp, Rk4};

/// The parameter map `W(θ)` the estimator inverts, with its monotonizing
/// matrix.
pub trait ParameterMap: std::fmt::Debug + Send + Sync {
    fn s(&self) -> usize;
    fn ell(&self) -> usize;
    fn eval_w(&self, theta: &[f64]) -> Result<DVector<f64>>;
    fn t_w(&self) -> Result<DMatrix<f64>>;
}

impl ParameterMap for ExtendedMapping {
    fn s(&self) -> usize {
        ExtendedMapping::s(self)
    }

    fn ell(&self) -> usize {
        ExtendedMapping::ell(self)
    }

    fn eval_w(&self, theta: &[f64]) -> Result<DVector<f64>> {
        ExtendedMapping::eval_w(self, theta)
    }

    fn t_w(&self) -> Result<DMatrix<f64>> {
        self.build_t_w()
    }
}

/// `W(θ) = θ`, `T_W = I`: the linear regression special case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearParameterMap(pub usize);

impl ParameterMap for LinearParameterMap {
    fn s(&self) -> usize {
        self.0
    }

    fn ell(&self) -> usize {
        self.0
    }

    fn eval_w(&self, theta: &[f64]) -> Result<DVector<f64>> {
        if theta.len() != self.0 {
            return Err(Error::Dimension {
                context: "theta",
                expected: self.0,
                got: theta.len(),
            });
        }
        Ok(DVector::from_column_slice(theta))
    }

    fn t_w(&self) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(self.0, self.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsDremGains {
    pub gamma_w: f64,
    pub f0: f64,
    /// Diagonal of `Γ`.
    pub gamma: Vec<f64>,
}

impl LsDremGains {
    pub fn validate(&self, ell: usize) -> Result<()> {
        if !(self.gamma_w > 0.0 && self.gamma_w.is_finite()) {
            return Err(Error::config("estimator.gamma_w", "must be positive"));
        }
        if !(self.f0 > 0.0 && self.f0.is_finite()) {
            return Err(Error::config("estimator.f0", "must be positive"));
        }
        if self.gamma.len() != ell {
            return Err(Error::config(
                "estimator.gamma",
                format!("expected {ell} diagonal entries, got {}", self.gamma.len()),
            ));
        }
        if self.gamma.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::config("estimator.gamma", "entries must be positive"));
        }
        Ok(())
    }
}

/// Owned snapshot of the estimator state and its derived signals.
#[derive(Debug, Clone, PartialEq)]
pub struct LsDremState {
    pub w_hat: DVector<f64>,
    pub f: DMatrix<f64>,
    pub theta_hat: DVector<f64>,
    pub w0: DVector<f64>,
    pub delta: f64,
    pub ycal: DVector<f64>,
}

/// Scratch buffers for derivative evaluations.
#[derive(Debug, Clone)]
pub struct LsDremScratch {
    p: DMatrix<f64>,
    f: Vec<f64>,
    w: Vec<f64>,
    a: Vec<f64>,
    adj_ws: AdjugateWorkspace,
    delta: f64,
    adj: Vec<f64>,
    rhs: Vec<f64>,
    ycal: Vec<f64>,
}

impl LsDremScratch {
    pub fn new(s: usize) -> Self {
        LsDremScratch {
            p: DMatrix::zeros(s, s),
            f: vec![0.0; s * s],
            w: vec![0.0; s],
            a: vec![0.0; s * s],
            adj_ws: AdjugateWorkspace::new(s),
            delta: 0.0,
            adj: vec![0.0; s * s],
            rhs: vec![0.0; s],
            ycal: vec![0.0; s],
        }
    }
}

#[derive(Debug, Clone)]
pub struct LsDrem {
    mapping: Arc<dyn ParameterMap>,
    t_w: DMatrix<f64>,
    gamma_t_w: DMatrix<f64>,
    gains: LsDremGains,
    w0: Vec<f64>,
    theta0: Vec<f64>,
}

impl LsDrem {
    pub fn new(
        mapping: Arc<dyn ParameterMap>,
        gains: LsDremGains,
        w0: Vec<f64>,
        theta0: Vec<f64>,
    ) -> Result<Self> {
        let (s, ell) = (mapping.s(), mapping.ell());
        gains.validate(ell)?;
        if w0.len() != s {
            return Err(Error::Dimension {
                context: "initial W estimate",
                expected: s,
                got: w0.len(),
            });
        }
        if theta0.len() != ell {
            return Err(Error::Dimension {
                context: "initial theta estimate",
                expected: ell,
                got: theta0.len(),
            });
        }
        let t_w = mapping.t_w()?;
        let gamma_t_w = DMatrix::from_diagonal(&DVector::from_vec(gains.gamma.clone())) * &t_w;
        Ok(LsDrem {
            mapping,
            t_w,
            gamma_t_w,
            gains,
            w0,
            theta0,
        })
    }

    pub fn s(&self) -> usize {
        self.mapping.s()
    }

    pub fn ell(&self) -> usize {
        self.mapping.ell()
    }

    pub fn dim(&self) -> usize {
        let s = self.s();
        2 * s + s * s + self.ell()
    }

    pub fn mapping(&self) -> &Arc<dyn ParameterMap> {
        &self.mapping
    }

    pub fn t_w(&self) -> &DMatrix<f64> {
        &self.t_w
    }

    pub fn gains(&self) -> &LsDremGains {
        &self.gains
    }

    pub fn scratch(&self) -> LsDremScratch {
        LsDremScratch::new(self.s())
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let s = self.s();
        let mut y = Vec::with_capacity(self.dim());
        y.extend(std::iter::repeat(0.0).take(s));
        for i in 0..s {
            for j in 0..s {
                y.push(if i == j { self.gains.f0 } else { 0.0 });
            }
        }
        y.extend_from_slice(&self.theta0);
        y.extend_from_slice(&self.w0);
        y
    }

    fn split<'a>(&self, state: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        let (s, ell) = (self.s(), self.ell());
        let (r, rest) = state.split_at(s);
        let (p, rest) = rest.split_at(s * s);
        let (th, wb) = rest.split_at(ell);
        (r, p, th, &wb[..s])
    }

    /// Fills `F = P⁻¹` (Cholesky), `Ŵ`, `Δ = det(I − f₀F)` and
    /// `adj(I − f₀F)` in the scratch buffers.
    fn recover(&self, state: &[f64], sc: &mut LsDremScratch) -> Result<()> {
        let s = self.s();
        let f0 = self.gains.f0;
        let (r, p, _, wb) = self.split(state);
        sc.p.copy_from_slice(p);
        let chol = sc.p.clone().cholesky().ok_or(Error::NonFinite {
            signal: "information matrix",
            t: f64::NAN,
        })?;
        let f = chol.inverse();
        for i in 0..s {
            for j in 0..s {
                let fij = 0.5 * (f[(i, j)] + f[(j, i)]);
                sc.f[i * s + j] = fij;
                sc.a[i * s + j] = if i == j { 1.0 } else { 0.0 } - f0 * fij;
            }
        }
        sc.delta = sc.adj_ws.compute(&sc.a, &mut sc.adj);
        for i in 0..s {
            sc.w[i] = wb[i] + (0..s).map(|j| sc.f[i * s + j] * r[j]).sum::<f64>();
        }
        Ok(())
    }

    /// Writes `𝒴` into the scratch buffer and returns `Δ`. Expects
    /// [`recover`](Self::recover) to have run on the same state.
    fn mix(&self, sc: &mut LsDremScratch) -> f64 {
        let s = self.s();
        let f0 = self.gains.f0;
        for i in 0..s {
            let fw0: f64 = (0..s).map(|j| sc.f[i * s + j] * self.w0[j]).sum();
            sc.rhs[i] = sc.w[i] - f0 * fw0;
        }
        for i in 0..s {
            sc.ycal[i] = (0..s).map(|j| sc.adj[i * s + j] * sc.rhs[j]).sum();
        }
        sc.delta
    }

    /// `(Δ, 𝒴)` at the given state.
    pub fn delta_ycal(&self, state: &[f64], sc: &mut LsDremScratch) -> Result<(f64, DVector<f64>)> {
        self.recover(state, sc)?;
        let d = self.mix(sc);
        Ok((d, DVector::from_column_slice(&sc.ycal)))
    }

    /// State derivative for one regressor sample. When `active` is false the
    /// estimator is frozen and all derivatives are zero.
    pub fn derivative(
        &self,
        state: &[f64],
        y: f64,
        phi: &[f64],
        active: bool,
        sc: &mut LsDremScratch,
        d: &mut [f64],
    ) -> Result<()> {
        let (s, ell) = (self.s(), self.ell());
        debug_assert_eq!(d.len(), self.dim());
        if phi.len() != s {
            return Err(Error::Dimension {
                context: "regressor",
                expected: s,
                got: phi.len(),
            });
        }
        if !active {
            d.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        let gw = self.gains.gamma_w;
        let (_, _, th, wb) = self.split(state);
        let (dr, rest) = d.split_at_mut(s);
        let (dp, rest) = rest.split_at_mut(s * s);
        let (dth, dwb) = rest.split_at_mut(ell);
        dwb.iter_mut().for_each(|v| *v = 0.0);
        let err = y - phi.iter().zip(wb).map(|(p, w)| p * w).sum::<f64>();
        for i in 0..s {
            dr[i] = gw * phi[i] * err;
            for j in 0..s {
                dp[i * s + j] = gw * phi[i] * phi[j];
            }
        }
        self.recover(state, sc)?;
        let delta = self.mix(sc);
        let w_th = self.mapping.eval_w(th)?;
        for i in 0..s {
            sc.rhs[i] = sc.ycal[i] - delta * w_th[i];
        }
        for k in 0..ell {
            let acc: f64 = (0..s).map(|i| self.gamma_t_w[(k, i)] * sc.rhs[i]).sum();
            dth[k] = delta * acc;
        }
        Ok(())
    }

    /// Replaces `P` by `½(P + Pᵀ)` and returns the largest asymmetry removed.
    pub fn resymmetrize(&self, state: &mut [f64]) -> f64 {
        let s = self.s();
        let f = &mut state[s..s + s * s];
        let mut worst: f64 = 0.0;
        for i in 0..s {
            for j in i + 1..s {
                let (a, b) = (f[i * s + j], f[j * s + i]);
                worst = worst.max((a - b).abs());
                let m = 0.5 * (a + b);
                f[i * s + j] = m;
                f[j * s + i] = m;
            }
        }
        worst
    }

    /// Moves `r` into the base point: `Ŵ_b ← Ŵ_b + P⁻¹r`, `r ← 0`. Leaves
    /// `(F, Ŵ, θ̂)` unchanged.
    pub fn rebase(&self, state: &mut [f64], sc: &mut LsDremScratch) -> Result<()> {
        let (s, ell) = (self.s(), self.ell());
        self.recover(state, sc)?;
        state[..s].iter_mut().for_each(|v| *v = 0.0);
        let off = s + s * s + ell;
        state[off..off + s].copy_from_slice(&sc.w);
        Ok(())
    }

    /// Resymmetrizes `P` and rebases; returns the asymmetry removed.
    pub fn post_step(&self, state: &mut [f64], sc: &mut LsDremScratch) -> Result<f64> {
        let asym = self.resymmetrize(state);
        self.rebase(state, sc)?;
        Ok(asym)
    }

    pub fn theta_hat<'a>(&self, state: &'a [f64]) -> &'a [f64] {
        self.split(state).2
    }

    pub fn snapshot(&self, state: &[f64], sc: &mut LsDremScratch) -> Result<LsDremState> {
        let s = self.s();
        let (delta, ycal) = self.delta_ycal(state, sc)?;
        let th = self.theta_hat(state);
        Ok(LsDremState {
            w_hat: DVector::from_column_slice(&sc.w),
            f: DMatrix::from_row_slice(s, s, &sc.f),
            theta_hat: DVector::from_column_slice(th),
            w0: DVector::from_column_slice(&self.w0),
            delta,
            ycal,
        })
    }
}

/// Parameter estimation errors `θ̂ − θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamErrors {
    /// `|θ̂ᵢ − θᵢ|`.
    pub abs: Vec<f64>,
    /// `|θ̂ᵢ − θᵢ| / max(1, |θᵢ|)`.
    pub scaled: Vec<f64>,
    pub norm: f64,
}

pub fn estimator_errors(theta_hat: &[f64], theta_true: &[f64]) -> Result<ParamErrors> {
    if theta_hat.len() != theta_true.len() {
        return Err(Error::Dimension {
            context: "estimator_errors",
            expected: theta_true.len(),
            got: theta_hat.len(),
        });
    }
    let abs: Vec<f64> = theta_hat
        .iter()
        .zip(theta_true)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let scaled = abs
        .iter()
        .zip(theta_true)
        .map(|(e, t)| e / t.abs().max(1.0))
        .collect();
    let norm = abs.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(ParamErrors { abs, scaled, norm })
}

/// Standalone estimator driven by sampled regressor pairs. Between samples
/// `Y` and `φ` are interpolated linearly.
#[derive(Debug, Clone)]
pub struct LsDremRunner {
    est: LsDrem,
    state: Vec<f64>,
    t: f64,
    switch_on: f64,
    last: Option<(f64, Vec<f64>)>,
    rk: Rk4,
    sc: LsDremScratch,
}

impl LsDremRunner {
    pub fn new(est: LsDrem, switch_on: f64) -> Self {
        let state = est.initial_state();
        let rk = Rk4::new(est.dim());
        let sc = est.scratch();
        LsDremRunner {
            est,
            state,
            t: 0.0,
            switch_on,
            last: None,
            rk,
            sc,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn estimator(&self) -> &LsDrem {
        &self.est
    }

    pub fn snapshot(&mut self) -> Result<LsDremState> {
        self.est.snapshot(&self.state, &mut self.sc)
    }

    pub fn step(&mut self, sample: &RegressorSample, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::config("dt", format!("step must be positive, got {dt}")));
        }
        if sample.phi.len() != self.est.s() {
            return Err(Error::Dimension {
                context: "regressor",
                expected: self.est.s(),
                got: sample.phi.len(),
            });
        }
        let (y1, phi1) = (sample.y, sample.phi.as_slice());
        let (y0, phi0) = match &self.last {
            Some((y, p)) => (*y, p.clone()),
            None => (y1, phi1.to_vec()),
        };
        let (est, sc, t0, on) = (&self.est, &mut self.sc, self.t, self.switch_on);
        let mut phi = vec![0.0; phi1.len()];
        self.rk.step_with(&mut self.state, dt, |frac, z, dz| {
            for (k, p) in phi.iter_mut().enumerate() {
                *p = lerp(phi0[k], phi1[k], frac);
            }
            est.derivative(z, lerp(y0, y1, frac), &phi, t0 + frac * dt >= on, sc, dz)
        })?;
        self.est.post_step(&mut self.state, &mut self.sc)?;
        if self.state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                signal: "estimator state",
                t: t0 + dt,
            });
        }
        self.t += dt;
        self.last = Some((y1, phi1.to_vec()));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(gamma_w: f64, f0: f64) -> LsDrem {
        LsDrem::new(
            Arc::new(LinearParameterMap(1)),
            LsDremGains {
                gamma_w,
                f0,
                gamma: vec![10.0],
            },
            vec![0.0],
            vec![0.0],
        )
        .unwrap()
    }

    fn sample(t: f64, y: f64, phi: Vec<f64>) -> RegressorSample {
        RegressorSample { t, y, phi }
    }

    #[test]
    fn initial_state_layout() {
        let est = scalar(1.0, 4.0);
        assert_eq!(est.dim(), 4);
        assert_eq!(est.initial_state(), vec![0.0, 4.0, 0.0, 0.0]);
    }

    #[test]
    fn delta_vanishes_at_start() {
        let map = LinearParameterMap(3);
        let est = LsDrem::new(
            Arc::new(map),
            LsDremGains {
                gamma_w: 2.0,
                f0: 0.5,
                gamma: vec![1.0; 3],
            },
            vec![1.0, 2.0, 3.0],
            vec![0.0; 3],
        )
        .unwrap();
        let mut sc = est.scratch();
        let z = est.initial_state();
        let (delta, ycal) = est.delta_ycal(&z, &mut sc).unwrap();
        assert!(delta.abs() < 1e-30);
        assert!(ycal.norm() < 1e-12);
        let mut d = vec![1.0; est.dim()];
        est.derivative(&z, 0.3, &[1.0, -1.0, 0.5], true, &mut sc, &mut d).unwrap();
        assert!(d[est.dim() - 3..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_regressor_freezes_everything() {
        let est = scalar(1.0, 1.0);
        let mut sc = est.scratch();
        let z = vec![0.3, 2.0, 0.1, 0.4];
        let mut d = vec![9.0; 4];
        est.derivative(&z, 2.0, &[0.0], true, &mut sc, &mut d).unwrap();
        assert_eq!(&d[..2], &[0.0, 0.0]);
        assert_eq!(d[3], 0.0);
        est.derivative(&z, 2.0, &[1.0], false, &mut sc, &mut d).unwrap();
        assert_eq!(d, vec![0.0; 4]);
    }

    #[test]
    fn scalar_closed_form() {
        // φ ≡ 1, γ_W = f₀ = 1: F = 1/(1+t), Δ = t/(1+t), Ŵ = tθ*/(1+t).
        let theta = 2.5;
        let mut r = LsDremRunner::new(scalar(1.0, 1.0), 0.0);
        let dt = 1e-3;
        let mut prev_delta = 0.0;
        for k in 1..=10_000 {
            r.step(&sample(k as f64 * dt, theta, vec![1.0]), dt).unwrap();
            let t = r.time();
            let snap = r.snapshot().unwrap();
            assert!((snap.f[(0, 0)] - 1.0 / (1.0 + t)).abs() < 1e-6);
            assert!((snap.delta - t / (1.0 + t)).abs() < 1e-6);
            assert!((snap.w_hat[0] - t * theta / (1.0 + t)).abs() < 1e-6);
            assert!(snap.delta >= prev_delta && snap.delta < 1.0);
            prev_delta = snap.delta;
            // 𝒴 = ΔW exactly when the regression holds from the start.
            assert!((snap.ycal[0] - snap.delta * theta).abs() < 1e-9);
        }
        assert!((r.snapshot().unwrap().theta_hat[0] - theta).abs() < 1e-9);
    }

    #[test]
    fn mixing_at_rank_deficient_information() {
        let est = LsDrem::new(
            Arc::new(LinearParameterMap(4)),
            LsDremGains { gamma_w: 3.0, f0: 0.7, gamma: vec![1.0; 4] },
            vec![0.5, -1.0, 2.0, 0.1],
            vec![0.0; 4],
        )
        .unwrap();
        let mut z = est.initial_state();
        // P = f₀I + Σ φφᵀ over a few directions, plus an arbitrary r.
        let dirs = [[1.0, 0.2, -0.3, 0.0], [0.0, 1.0, 0.5, 0.4], [0.3, -0.2, 1.0, 0.9]];
        for d in dirs {
            for i in 0..4 {
                for j in 0..4 {
                    z[4 + i * 4 + j] += d[i] * d[j];
                }
            }
        }
        z[..4].copy_from_slice(&[0.3, -0.1, 0.2, 0.05]);
        let mut sc = est.scratch();
        let snap = est.snapshot(&z, &mut sc).unwrap();
        let a = DMatrix::identity(4, 4) - snap.f.clone() * 0.7;
        let (adj, det) = crate::estimator::adjugate_det(&a);
        // Rank-3 information: Δ vanishes but the adjugate does not.
        assert!(det.abs() < 1e-12 && snap.delta.abs() < 1e-12);
        let ycal = adj * (&snap.w_hat - snap.f.clone() * DVector::from_vec(vec![0.35, -0.7, 1.4, 0.07]));
        assert!((ycal - &snap.ycal).norm() < 1e-10);
        assert!(snap.ycal.norm() > 1e-6);
    }

    #[test]
    fn switch_on_holds_state() {
        let mut r = LsDremRunner::new(scalar(1.0, 1.0), 0.5);
        for k in 1..=400 {
            r.step(&sample(k as f64 * 1e-3, 1.0, vec![1.0]), 1e-3).unwrap();
        }
        assert_eq!(r.state(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn estimator_errors_norms() {
        let e = estimator_errors(&[1.0, 2.0, -3.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(e.abs, vec![0.0, 2.0, 4.0]);
        assert_eq!(e.scaled, vec![0.0, 2.0, 4.0]);
        assert!((e.norm - 20f64.sqrt()).abs() < 1e-15);
        let z = estimator_errors(&[3.0, -7.0], &[3.0, -7.0]).unwrap();
        assert_eq!(z.norm, 0.0);
        assert!(estimator_errors(&[1.0], &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn riccati_is_monotone_and_delta_bounded(
            w1 in 0.5f64..3.0, w2 in 0.5f64..3.0, th in prop::collection::vec(-3.0f64..3.0, 2),
        ) {
            let est = LsDrem::new(
                Arc::new(LinearParameterMap(2)),
                LsDremGains { gamma_w: 5.0, f0: 1.0, gamma: vec![2.0, 2.0] },
                vec![0.0; 2],
                vec![0.0; 2],
            ).unwrap();
            let mut r = LsDremRunner::new(est, 0.0);
            let dt = 1e-3;
            let mut prev_delta = 0.0;
            let mut prev_lmax = f64::INFINITY;
            for k in 1..=3000 {
                let t = k as f64 * dt;
                let phi = vec![(w1 * t).sin(), (w2 * t).cos()];
                let y = phi[0] * th[0] + phi[1] * th[1];
                r.step(&sample(t, y, phi), dt).unwrap();
                let snap = r.snapshot().unwrap();
                let lmax = snap.f.clone().symmetric_eigenvalues().max();
                prop_assert!(lmax <= prev_lmax + 1e-12);
                prop_assert!(snap.delta >= prev_delta - 1e-12 && snap.delta < 1.0);
                prev_delta = snap.delta;
                prev_lmax = lmax;
            }
        }
    }
}
