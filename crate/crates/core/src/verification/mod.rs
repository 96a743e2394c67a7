//! Numerical certification: pull-through identities, derivative formulas,
//! resolvent bounds, infrared sweeps and bound ratios.

mod bounds;
mod derivatives;
mod identities;
mod report;
mod sweep;

pub use bounds::{
    check_bound_ratios, check_resolvent_bounds, lowest_shifted, BoundRatioReport, RatioGroup, RatioSample,
    ResolventBoundReport, ResolventSample,
};
pub use derivatives::{check_psi_derivatives, d2psi, dpsi, DerivativeCheck};
pub use identities::{check_pull_through, random_vectors, IdentitySuite, Operators};
pub use report::{fingerprint, IdentityReport};
pub use sweep::{
    delta_grid, fit_exponent, fit_sweep, measure, sigma_sweep, sweep_point, ExponentFit, Quantity, SweepConfig, SweepPoint, SweepResult, ZERO_FLOOR,
};
