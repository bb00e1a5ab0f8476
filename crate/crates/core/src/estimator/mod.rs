//! LS+DREM estimation of the extended parameter vector and the second-stage
//! gradient estimator.

mod adjugate;
mod gradient;
mod lsdrem;

pub use adjugate::{adjugate, adjugate_det, AdjugateWorkspace};
pub use gradient::{GradientConfig, GradientStageState};
pub use lsdrem::{
    estimator_errors, LinearParameterMap, LsDrem, LsDremGains, LsDremRunner, LsDremScratch,
    LsDremState, ParamErrors, ParameterMap,
};
