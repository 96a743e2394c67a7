//! Truncated bosonic Fock space over a finite momentum grid.
//!
//! Continuum formulas are transcribed through the dictionary
//! `b(k_j) = b_j / sqrt(w_j)` and `int d^3k F(k) = sum_j w_j F(k_j)`.

mod basis;
mod grid;
mod table;
mod vector;

pub use basis::{binomial, fock_dimension, FockBasis};
pub use grid::{dot3, norm3, Mode, MomentumGrid, OCTAHEDRON};
pub use table::{apply_order_r, ModeTable, OrderROperator};
pub use vector::FockVector;
