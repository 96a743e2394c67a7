pub mod error;
pub mod fock;
pub mod nelson;
pub mod recurrence;
pub mod verification;
pub mod wavefunctions;

pub use error::{Error, Result};
pub use nalgebra;
