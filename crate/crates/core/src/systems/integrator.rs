//! Fixed-step classical Runge-Kutta integration shared by plants, filters and
//! estimators.

use crate::error::Result;

/// A first-order ODE `ẏ = f(t, y)` with a fixed state dimension.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    /// Writes `f(t, y)` into `dy`.
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

/// Classical fourth-order Runge-Kutta with reusable stage buffers.
#[derive(Debug, Clone, Default)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    fn ensure(&mut self, dim: usize) {
        if self.k1.len() != dim {
            *self = Rk4::new(dim);
        }
    }

    /// Advances `y` from `t` to `t + h` for an [`OdeSystem`].
    pub fn step<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &S,
        t: f64,
        y: &mut [f64],
        h: f64,
    ) -> Result<()> {
        self.step_with(y, h, |frac, y, dy| sys.rhs(t + frac * h, y, dy))
    }

    /// Advances `y` by `h` for a right-hand side parameterized by the stage
    /// position `frac ∈ {0, ½, 1}` within the step. Standalone filters use the
    /// fraction to interpolate their sampled inputs linearly.
    pub fn step_with<F>(&mut self, y: &mut [f64], h: f64, mut f: F) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y.len();
        self.ensure(n);
        let Rk4 {
            k1,
            k2,
            k3,
            k4,
            tmp,
        } = self;

        f(0.0, y, k1)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        f(0.5, tmp, k2)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        f(0.5, tmp, k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        f(1.0, tmp, k4)?;
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Ok(())
    }
}

/// Linear interpolation between the previous and current sample of an input.
#[inline]
pub(crate) fn lerp(prev: f64, cur: f64, frac: f64) -> f64 {
    prev + (cur - prev) * frac
}
