//! Operator sequences, the quantization map, and the two recurrence solvers.

use std::fmt::Debug;
use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector};
use num_traits::{FromPrimitive, Zero};

use super::pattern::expand_closed_form;
use super::symbol::{SymbolPolynomial, Token};
use crate::error::{Error, Result};

/// Scalars the recurrence can run over: integers, reals, complex numbers.
pub trait RingScalar:
    nalgebra::Scalar + Copy + Zero + FromPrimitive + Add<Output = Self> + Mul<Output = Self> + Send + Sync
{
}

impl<T> RingScalar for T where
    T: nalgebra::Scalar + Copy + Zero + FromPrimitive + Add<Output = T> + Mul<Output = T> + Send + Sync
{
}

/// Two families of linear maps, `a_i: X_{i-1} -> X_i` and
/// `b_{i+1,i}: X_{i-1} -> X_{i+1}`. The `b` family is indexed by its lower
/// index `i`.
pub trait OperatorSequence<T: RingScalar> {
    /// Dimension of `X_level`.
    fn dim(&self, level: usize) -> usize;
    fn apply_a(&self, i: usize, x: &DVector<T>) -> Result<DVector<T>>;
    fn apply_b(&self, i: usize, x: &DVector<T>) -> Result<DVector<T>>;
}

fn matvec<T: RingScalar>(m: &DMatrix<T>, x: &DVector<T>, level: usize) -> Result<DVector<T>> {
    if m.ncols() != x.len() {
        return Err(Error::DimensionMismatch {
            level,
            expected: m.ncols(),
            got: x.len(),
        });
    }
    Ok(DVector::from_fn(m.nrows(), |r, _| {
        let mut acc = T::zero();
        for c in 0..m.ncols() {
            acc = acc + m[(r, c)] * x[c];
        }
        acc
    }))
}

/// Same pair of square matrices at every level.
#[derive(Debug, Clone)]
pub struct UniformOps<T: RingScalar> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
}

impl<T: RingScalar> UniformOps<T> {
    pub fn new(a: DMatrix<T>, b: DMatrix<T>) -> Result<Self> {
        let d = a.nrows();
        for (m, level) in [(&a, 0), (&b, 0)] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    level,
                    expected: d,
                    got: if m.nrows() != d { m.nrows() } else { m.ncols() },
                });
            }
        }
        Ok(Self { a, b })
    }

    /// One-dimensional operators, i.e. ordinary scalars.
    pub fn scalar(a: T, b: T) -> Self {
        Self {
            a: DMatrix::from_element(1, 1, a),
            b: DMatrix::from_element(1, 1, b),
        }
    }
}

impl<T: RingScalar> OperatorSequence<T> for UniformOps<T> {
    fn dim(&self, _level: usize) -> usize {
        self.a.nrows()
    }

    fn apply_a(&self, i: usize, x: &DVector<T>) -> Result<DVector<T>> {
        matvec(&self.a, x, i)
    }

    fn apply_b(&self, i: usize, x: &DVector<T>) -> Result<DVector<T>> {
        matvec(&self.b, x, i)
    }
}

/// Distinct spaces per level. `a[i - 1]` is `a_i` (`dims[i] x dims[i - 1]`),
/// `b[i - 1]` is `b_{i+1,i}` (`dims[i + 1] x dims[i - 1]`).
#[derive(Debug, Clone)]
pub struct GradedOps<T: RingScalar> {
    dims: Vec<usize>,
    a: Vec<DMatrix<T>>,
    b: Vec<DMatrix<T>>,
}

impl<T: RingScalar> GradedOps<T> {
    /// `dims` covers levels `0..=n`; `a` has `n` entries, `b` has `n - 1`.
    pub fn new(dims: Vec<usize>, a: Vec<DMatrix<T>>, b: Vec<DMatrix<T>>) -> Result<Self> {
        let n = dims.len().saturating_sub(1);
        if a.len() != n || b.len() + 1 != n.max(1) {
            return Err(Error::InvalidParameter {
                field: "levels",
                reason: format!("{} levels need {} a-maps and {} b-maps", n + 1, n, n.saturating_sub(1)),
            });
        }
        for (k, m) in a.iter().enumerate() {
            let i = k + 1;
            check_shape(m, dims[i], dims[i - 1], i)?;
        }
        for (k, m) in b.iter().enumerate() {
            let i = k + 1;
            check_shape(m, dims[i + 1], dims[i - 1], i)?;
        }
        Ok(Self { dims, a, b })
    }

    pub fn levels(&self) -> usize {
        self.dims.len() - 1
    }
}

fn check_shape<T: RingScalar>(m: &DMatrix<T>, rows: usize, cols: usize, level: usize) -> Result<()> {
    if m.nrows() != rows {
        return Err(Error::DimensionMismatch {
            level,
            expected: rows,
            got: m.nrows(),
        });
    }
    if m.ncols() != cols {
        return Err(Error::DimensionMismatch {
            level,
            expected: cols,
            got: m.ncols(),
        });
    }
    Ok(())
}

impl<T: RingScalar> OperatorSequence<T> for GradedOps<T> {
    fn dim(&self, level: usize) -> usize {
        self.dims.get(level).copied().unwrap_or(0)
    }

    fn apply_a(&self, i: usize, x: &DVector<T>) -> Result<DVector<T>> {
        let m = self.a.get(i.wrapping_sub(1)).ok_or(Error::IndexOutOfRange {
            index: i,
            max: self.a.len(),
        })?;
        matvec(m, x, i)
    }

    fn apply_b(&self, i: usize, x: &DVector<T>) -> Result<DVector<T>> {
        let m = self.b.get(i.wrapping_sub(1)).ok_or(Error::IndexOutOfRange {
            index: i,
            max: self.b.len(),
        })?;
        matvec(m, x, i)
    }
}

/// Operator sequence together with the initial vector `x_0`.
#[derive(Debug, Clone)]
pub struct RecurrenceProblem<T: RingScalar, O: OperatorSequence<T>> {
    pub ops: O,
    pub x0: DVector<T>,
}

impl<T: RingScalar, O: OperatorSequence<T>> RecurrenceProblem<T, O> {
    pub fn new(ops: O, x0: DVector<T>) -> Result<Self> {
        if ops.dim(0) != x0.len() {
            return Err(Error::DimensionMismatch {
                level: 0,
                expected: ops.dim(0),
                got: x0.len(),
            });
        }
        Ok(Self { ops, x0 })
    }
}

/// Replaces every symbol by its operator, applies each monomial to `x0`
/// right to left, and sums with the integer coefficients.
pub fn quantize<T: RingScalar, O: OperatorSequence<T>>(
    p: &SymbolPolynomial,
    ops: &O,
    x0: &DVector<T>,
) -> Result<DVector<T>> {
    let n = p.n();
    let mut out = DVector::from_element(ops.dim(n), T::zero());
    for m in p.monomials() {
        let mut level = 0;
        let mut x = x0.clone();
        for &t in m.tokens().iter().rev() {
            if t.lowest() != level + 1 {
                return Err(Error::DimensionMismatch {
                    level,
                    expected: level + 1,
                    got: t.lowest(),
                });
            }
            x = match t {
                Token::A(i) => ops.apply_a(i, &x)?,
                Token::B(i) => ops.apply_b(i, &x)?,
            };
            level = t.highest();
        }
        if x.len() != out.len() {
            return Err(Error::DimensionMismatch {
                level: n,
                expected: out.len(),
                got: x.len(),
            });
        }
        let c = T::from_i64(m.coeff).expect("integer coefficient representable");
        for (o, v) in out.iter_mut().zip(x.iter()) {
            *o = *o + c * *v;
        }
    }
    Ok(out)
}

/// Iterates `x_i = a_i x_{i-1} + b_{i,i-1} x_{i-2}` from `x_1 = a_1 x_0`.
pub fn solve_direct<T: RingScalar, O: OperatorSequence<T>>(
    prob: &RecurrenceProblem<T, O>,
    n: usize,
) -> Result<DVector<T>> {
    if n == 0 {
        return Ok(prob.x0.clone());
    }
    let mut prev2 = prob.x0.clone();
    let mut prev1 = prob.ops.apply_a(1, &prev2)?;
    for i in 2..=n {
        let mut next = prob.ops.apply_a(i, &prev1)?;
        let from_b = prob.ops.apply_b(i - 1, &prev2)?;
        if from_b.len() != next.len() {
            return Err(Error::DimensionMismatch {
                level: i,
                expected: next.len(),
                got: from_b.len(),
            });
        }
        for (o, v) in next.iter_mut().zip(from_b.iter()) {
            *o = *o + *v;
        }
        prev2 = prev1;
        prev1 = next;
    }
    Ok(prev1)
}

/// `quantize(expand_closed_form(n), ops, x0)`.
pub fn solve_closed<T: RingScalar, O: OperatorSequence<T>>(
    prob: &RecurrenceProblem<T, O>,
    n: usize,
) -> Result<DVector<T>> {
    quantize(&expand_closed_form(n), &prob.ops, &prob.x0)
}
