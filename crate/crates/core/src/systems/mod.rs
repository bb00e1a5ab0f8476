//! Plant models, the shank tracking loop and the augmented-ODE simulator.

pub mod class1;
pub mod class2;
pub mod excitation;
pub mod integrator;
pub mod sim;
pub mod tracking;

pub use class1::{ClassIModel, ClassISystem, SyntheticClassI};
pub use class2::{ClassIIModel, ClassIISystem, Jet, ShankModel, ShankParams, SignMode};
pub use excitation::{Excitation, Sinusoid};
pub use integrator::{OdeSystem, Rk4};
pub use sim::{
    Class2Input, GradientStagePlan, Plant, RegressorBank, SimOptions, SimStats, SimTrajectory,
    Simulation,
};
pub use tracking::{
    default_controller, default_reference, Controller, ControllerState, ErrorConvention,
    ReferenceGenerator, ReferenceState, Schedule,
};
