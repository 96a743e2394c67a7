//! Discretized Nelson fiber Hamiltonian, its ground state, dressing
//! functions and resolvents.

mod dressing;
mod eigen;
mod ground;
mod model;
mod params;
mod resolvent;

pub use dressing::{dressing_at, dressing_functions, Dressing};
pub use eigen::{generic_vector, lanczos_lowest, Eigenpair, LanczosOptions};
pub use ground::{
    dense_ground_state, grad_energy, ground_state, hessian_energy, solve_ground_state, GradientOptions,
    GroundState, GroundStateResult,
};
pub use model::NelsonModel;
pub use params::{smooth_step, NelsonParams, MOMENTUM_BOUND};
pub use resolvent::{
    cg_solve, lambda_apply, lambda_component, lambda_dot, resolvent_solve, CgOptions, Projector,
    ResolventSpec,
};
