//! Extended parameter mappings, their monotonizing matrices and sampled LMI
//! verification.

mod extended;
mod maps;
mod sampling;

pub use extended::{
    alpha_min, fd_jacobian, AlphaBounds, ExtendedMapping, MappingKind, MappingSpec,
};
pub(crate) use extended::min_eig;
pub use maps::{CubicAugmentedMap, EtaMap, IdentityMap, LinearMap};
pub use sampling::ParamBox;
