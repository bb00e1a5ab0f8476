//! Online estimation of parameters entering through non-separable
//! exponentials `e^{θ₁h(x)}`.
//!
//! The pipeline builds a measurable regression `Y = φᵀW(θ)` from filtered
//! signals ([`regressors`]), estimates `W` by least squares and recovers `θ`
//! through the monotone map `T_W W` ([`estimator`], [`monotone`]).

pub mod error;
pub mod estimator;
pub mod filters;
pub mod monotone;
pub mod par;
pub mod regressors;
pub mod scenario;
pub mod systems;

pub use error::{Error, Result};
