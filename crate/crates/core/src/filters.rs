//! Stable LTI filters that make the regression equations measurable.
//!
//! Every filter is realized as a cascade of first-order stages
//! `ż = λ(u − z)`. Proper filters with a direct feed-through term
//! (`λp/(p+λ)`, `λ²p²/(p+λ)²`) are formed algebraically from the stage states,
//! so no input is ever differentiated.
//!
//! The same kernels drive two call paths: the standalone `step` methods below,
//! which integrate over one sampling interval with linearly interpolated
//! inputs, and the augmented simulation ODE, which calls the `derivative` /
//! `output` kernels directly at every Runge-Kutta stage.

use crate::error::{finite, Error, Result};
use crate::systems::integrator::{lerp, Rk4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FilterKind {
    /// `λ/(p+λ)`
    Low1,
    /// `λp/(p+λ)`, realized as `λ·(u − Low1(u))`.
    HighPass1,
    /// `λ²/(p+λ)²`, two cascaded `Low1` stages.
    Low2,
    /// `λ²p²/(p+λ)²`, realized as `λ²·(u − 2·Low1(u) + Low2(u))`.
    Deriv2Low2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    kind: FilterKind,
    lambda: f64,
}

impl FilterSpec {
    pub fn new(kind: FilterKind, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::config(
                "lambda",
                format!("filter pole must be positive and finite, got {lambda}"),
            ));
        }
        Ok(FilterSpec { kind, lambda })
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of internal states.
    pub fn order(&self) -> usize {
        match self.kind {
            FilterKind::Low1 | FilterKind::HighPass1 => 1,
            FilterKind::Low2 | FilterKind::Deriv2Low2 => 2,
        }
    }

    /// Steady-state gain for a constant input.
    pub fn dc_gain(&self) -> f64 {
        match self.kind {
            FilterKind::Low1 | FilterKind::Low2 => 1.0,
            FilterKind::HighPass1 | FilterKind::Deriv2Low2 => 0.0,
        }
    }

    #[inline]
    pub fn derivative(&self, z: &[f64], u: f64, dz: &mut [f64]) {
        let l = self.lambda;
        dz[0] = l * (u - z[0]);
        if self.order() == 2 {
            dz[1] = l * (z[0] - z[1]);
        }
    }

    #[inline]
    pub fn output(&self, z: &[f64], u: f64) -> f64 {
        let l = self.lambda;
        match self.kind {
            FilterKind::Low1 => z[0],
            FilterKind::HighPass1 => l * (u - z[0]),
            FilterKind::Low2 => z[1],
            FilterKind::Deriv2Low2 => l * l * (u - 2.0 * z[0] + z[1]),
        }
    }
}

/// A filter together with its internal state, advanced sample by sample.
#[derive(Debug, Clone)]
pub struct FilterState {
    spec: FilterSpec,
    z: [f64; 2],
    t: f64,
    last_input: Option<f64>,
    rk: Rk4,
}

impl FilterState {
    /// Zero initial condition.
    pub fn new(spec: FilterSpec) -> Self {
        FilterState::with_state(spec, [0.0, 0.0])
    }

    pub fn with_state(spec: FilterSpec, z: [f64; 2]) -> Self {
        FilterState {
            spec,
            z,
            t: 0.0,
            last_input: None,
            rk: Rk4::new(spec.order()),
        }
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn states(&self) -> &[f64] {
        &self.z[..self.spec.order()]
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Advances the filter by `dt` towards the new input sample and returns
    /// the output at the new time. Between the previous and the new sample
    /// the input is interpolated linearly; the first call holds the input
    /// constant over the interval.
    pub fn step(&mut self, input: f64, dt: f64) -> Result<f64> {
        let input = finite("filter input", input, self.t + dt)?;
        if !(dt > 0.0) {
            return Err(Error::config("dt", format!("step must be positive, got {dt}")));
        }
        let prev = self.last_input.unwrap_or(input);
        let spec = self.spec;
        let n = spec.order();
        self.rk.step_with(&mut self.z[..n], dt, |frac, z, dz| {
            spec.derivative(z, lerp(prev, input, frac), dz);
            Ok(())
        })?;
        self.t += dt;
        self.last_input = Some(input);
        Ok(spec.output(&self.z[..n], input))
    }

    /// Output at the current time (zero before the first sample).
    pub fn output(&self) -> f64 {
        match self.last_input {
            Some(u) => self.spec.output(self.states(), u),
            None => 0.0,
        }
    }
}

/// Realizes `λ/(p+λ)` applied to `g·ṗv`-type products through the swapping
/// identity
///
/// ```text
/// λ/(p+λ) [g · p(v)] = g · λp/(p+λ)(v) − λ/(p+λ)[ ġ · p/(p+λ)(v) ]
/// ```
///
/// where `g` is a `p × k` matrix signal, `v` a `k`-vector and `ġ` is formed from
/// measured quantities by the caller. The inner stage `w` filters `v` with
/// `λ/(p+λ)` so that `p/(p+λ)(v) = v − w`; the outer stage `c` holds the
/// correction term.
#[derive(Debug, Clone)]
pub struct SwapKernel {
    lambda: f64,
    rows: usize,
    cols: usize,
}

impl SwapKernel {
    pub fn new(lambda: f64, rows: usize, cols: usize) -> Result<Self> {
        FilterSpec::new(FilterKind::Low1, lambda)?;
        Ok(SwapKernel { lambda, rows, cols })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Output dimension `p`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of states: `k` inner plus `p` outer.
    pub fn dim(&self) -> usize {
        self.rows + self.cols
    }

    /// `g` and `g_dot` are row-major `p × k`.
    pub fn derivative(&self, z: &[f64], g_dot: &[f64], v: &[f64], dz: &mut [f64]) {
        let (w, c) = z.split_at(self.cols);
        let (dw, dc) = dz.split_at_mut(self.cols);
        let l = self.lambda;
        for j in 0..self.cols {
            dw[j] = l * (v[j] - w[j]);
        }
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += g_dot[i * self.cols + j] * (v[j] - w[j]);
            }
            dc[i] = l * (acc - c[i]);
        }
    }

    pub fn output(&self, z: &[f64], g: &[f64], v: &[f64], out: &mut [f64]) {
        let (w, c) = z.split_at(self.cols);
        let l = self.lambda;
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += g[i * self.cols + j] * l * (v[j] - w[j]);
            }
            out[i] = acc - c[i];
        }
    }
}

/// Inputs of one swapping term, already reduced to the `(g, ġ, v, scale)`
/// form consumed by [`SwapKernel`].
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct SwapInputs {
    pub g: Vec<f64>,
    pub g_dot: Vec<f64>,
    pub v: Vec<f64>,
}

impl SwapInputs {
    fn lerp(&self, other: &SwapInputs, frac: f64) -> SwapInputs {
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| lerp(*x, *y, frac)).collect()
        };
        SwapInputs {
            g: mix(&self.g, &other.g),
            g_dot: mix(&self.g_dot, &other.g_dot),
            v: mix(&self.v, &other.v),
        }
    }
}

/// `ḣ₄ẍ = ½ h₄′ p(ẋ²)`: `g = h₄′`, `ġ = h₄″ẋ`, `v = ẋ²`.
pub(crate) fn hdot4_inputs(xdot: f64, h4_d1: f64, h4_d2: f64) -> SwapInputs {
    SwapInputs {
        g: vec![h4_d1],
        g_dot: vec![h4_d2 * xdot],
        v: vec![xdot * xdot],
    }
}

/// `(ḣ₃/h₃)ẍ = ½ (h₃′/h₃) p(ẋ²)`; `d/dt(h₃′/h₃) = (h₃″/h₃ − (h₃′/h₃)²) ẋ`.
pub(crate) fn h3ratio_inputs(xdot: f64, h3: f64, h3_d1: f64, h3_d2: f64) -> SwapInputs {
    let r = h3_d1 / h3;
    SwapInputs {
        g: vec![r],
        g_dot: vec![(h3_d2 / h3 - r * r) * xdot],
        v: vec![xdot * xdot],
    }
}

/// State of one swapping term advanced sample by sample.
#[derive(Debug, Clone)]
pub struct SwapTermState {
    kernel: SwapKernel,
    z: Vec<f64>,
    last: Option<SwapInputs>,
    t: f64,
    h3_floor: f64,
    rk: Rk4,
}

impl SwapTermState {
    /// Scalar term (`ḣ₄ẍ` or `(ḣ₃/h₃)ẍ`).
    pub fn scalar(lambda: f64) -> Result<Self> {
        Self::vector(lambda, 1, 1)
    }

    /// Vector term `ψ_a ψ̇_c` with `ψ_a ∈ ℝ^{p×k}`.
    pub fn vector(lambda: f64, p: usize, k: usize) -> Result<Self> {
        let kernel = SwapKernel::new(lambda, p, k)?;
        let dim = kernel.dim();
        Ok(SwapTermState {
            kernel,
            z: vec![0.0; dim],
            last: None,
            t: 0.0,
            h3_floor: 1e-9,
            rk: Rk4::new(dim),
        })
    }

    /// Floor on `|h₃|` used by [`SwapTermState::h3ratio_step`].
    pub fn with_h3_floor(mut self, floor: f64) -> Self {
        self.h3_floor = floor;
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    fn advance(&mut self, inputs: SwapInputs, dt: f64, out: &mut [f64]) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::config("dt", format!("step must be positive, got {dt}")));
        }
        for v in inputs.g.iter().chain(&inputs.g_dot).chain(&inputs.v) {
            finite("swap input", *v, self.t + dt)?;
        }
        let prev = self.last.take().unwrap_or_else(|| inputs.clone());
        let kernel = &self.kernel;
        self.rk.step_with(&mut self.z, dt, |frac, z, dz| {
            let s = prev.lerp(&inputs, frac);
            kernel.derivative(z, &s.g_dot, &s.v, dz);
            Ok(())
        })?;
        self.t += dt;
        kernel.output(&self.z, &inputs.g, &inputs.v, out);
        self.last = Some(inputs);
        Ok(())
    }

    /// `λ/(p+λ)(ḣ₄ẍ)` from `x`, `ẋ` and `h₄′(x)`, `h₄″(x)`.
    pub fn hdot4_step(
        &mut self,
        _x: f64,
        xdot: f64,
        h4_d1: f64,
        h4_d2: f64,
        dt: f64,
    ) -> Result<f64> {
        let mut out = [0.0];
        self.advance(hdot4_inputs(xdot, h4_d1, h4_d2), dt, &mut out)?;
        Ok(0.5 * out[0])
    }

    /// `λ/(p+λ)((ḣ₃/h₃)ẍ)` from `x`, `ẋ` and `h₃`, `h₃′`, `h₃″` at `x`.
    pub fn h3ratio_step(
        &mut self,
        _x: f64,
        xdot: f64,
        h3: f64,
        h3_d1: f64,
        h3_d2: f64,
        dt: f64,
    ) -> Result<f64> {
        if !(h3.abs() >= self.h3_floor) {
            return Err(Error::Singularity {
                what: "h3",
                value: h3.abs(),
                floor: self.h3_floor,
                t: self.t + dt,
            });
        }
        let mut out = [0.0];
        self.advance(h3ratio_inputs(xdot, h3, h3_d1, h3_d2), dt, &mut out)?;
        Ok(0.5 * out[0])
    }

    /// `λ/(p+λ)(ψ_a ψ̇_c)`. `psi_a` and `psi_a_d1` are row-major `p × k`,
    /// `psi_c` has length `k`.
    pub fn psi_step(
        &mut self,
        _x: f64,
        xdot: f64,
        psi_a: &[f64],
        psi_a_d1: &[f64],
        psi_c: &[f64],
        dt: f64,
    ) -> Result<Vec<f64>> {
        let (p, k) = (self.kernel.rows, self.kernel.cols);
        if psi_a.len() != p * k || psi_a_d1.len() != p * k {
            return Err(Error::Dimension {
                context: "swap_psi psi_a",
                expected: p * k,
                got: psi_a.len().min(psi_a_d1.len()),
            });
        }
        if psi_c.len() != k {
            return Err(Error::Dimension {
                context: "swap_psi psi_c",
                expected: k,
                got: psi_c.len(),
            });
        }
        let inputs = SwapInputs {
            g: psi_a.to_vec(),
            g_dot: psi_a_d1.iter().map(|d| d * xdot).collect(),
            v: psi_c.to_vec(),
        };
        let mut out = vec![0.0; p];
        self.advance(inputs, dt, &mut out)?;
        Ok(out)
    }
}
