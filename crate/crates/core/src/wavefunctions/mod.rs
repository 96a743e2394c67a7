//! n-photon ground-state wave functions.

mod extras;
mod routes;
mod tuple;

pub use extras::{
    derivative_p, f1_derivative_analytic, froehlich_derivative_k, gbound, safe_sectors, solve_at, DerivativeOptions, Residual,
    TableEntry, WaveFunctionTable,
};
pub use routes::{Method, Mutations, RouteOptions, Truncation, WaveFunctions};
pub use tuple::{permutation_resolvent_sum, MomentumTuple};
