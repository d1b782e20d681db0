//! Integration of the modulation equations with `ν = 0` by the generalized
//! hodograph method.

mod data;
mod kernel;
mod newton;

pub use data::{InitialData, Monotonicity};
pub use kernel::{epd_q, epd_residual, EpdKernel, EpdResidual, Jet, DEFAULT_NODES};
pub use newton::{
    commuting_check, commuting_residual, commuting_speeds, Failure, Hodograph, PointSolution,
    SolveOptions, SolveOutcome,
};
pub use field::{
    pde_residual, solve_field, FieldPoint, FieldStats, ModulationSolution, PointStatus, PDE_TOLERANCE,
};

mod field;
