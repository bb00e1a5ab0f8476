//! Measurable regression equations `Y = φᵀW(θ)` built online from filtered
//! signals, and the interval-excitation monitor.

mod class1;
mod class2;
mod ie;

pub use class1::{Class1Regressor, Class1RegressorState, H5678};
pub use class2::{Class2Regressor, Class2RegressorState, Class2Signals};
pub use ie::{IeReport, IeMonitor};

use serde::{Deserialize, Serialize};

/// One time-stamped pair of the regression `Y = φᵀW(θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorSample {
    pub t: f64,
    pub y: f64,
    pub phi: Vec<f64>,
}

impl RegressorSample {
    /// `Y − φᵀw`.
    pub fn residual(&self, w: &[f64]) -> f64 {
        self.y - self.phi.iter().zip(w).map(|(p, w)| p * w).sum::<f64>()
    }
}
