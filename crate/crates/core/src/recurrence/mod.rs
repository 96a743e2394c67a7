//! Solution of `x_n = a x_{n-1} + b x_{n-2}` for non-commuting operators.

mod pattern;
mod quantize;
mod symbol;

pub use pattern::{enumerate_patterns, expand_closed_form, ContractionPattern, Convention};
pub use quantize::{
    quantize, solve_closed, solve_direct, GradedOps, OperatorSequence, RecurrenceProblem,
    RingScalar, UniformOps,
};
pub use symbol::{delta_apply, expand_by_recurrence, SymbolMonomial, SymbolPolynomial, Token};
