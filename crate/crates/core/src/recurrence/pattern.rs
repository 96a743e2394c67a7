//! Contraction patterns and the closed-form symbol expansion.

use serde::{Deserialize, Serialize};

use super::symbol::{delta_apply, SymbolMonomial, SymbolPolynomial};
use crate::error::{Error, Result};

/// Index convention for contraction tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// `1 <= i_1`, `i_l <= n - 1`. Index `i` contracts positions `i, i + 1`.
    Standard,
    /// `2 <= i_1`, `i_l <= n`. Index `i` contracts positions `i - 1, i`.
    Shifted,
}

/// A strictly separated tuple `i_1 << ... << i_l` (`i + 1 < i'`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContractionPattern {
    n: usize,
    indices: Vec<usize>,
    convention: Convention,
}

impl ContractionPattern {
    pub fn new(n: usize, indices: Vec<usize>, convention: Convention) -> Result<Self> {
        let invalid = |reason| Error::InvalidPattern {
            n,
            indices: indices.clone(),
            reason,
        };
        let (lo, hi) = match convention {
            Convention::Standard => (1, n.saturating_sub(1)),
            Convention::Shifted => (2, n),
        };
        if indices.iter().any(|&i| i < lo || i > hi) {
            return Err(invalid("index out of range"));
        }
        if indices.windows(2).any(|w| w[0] + 1 >= w[1]) {
            return Err(invalid("indices not strictly separated"));
        }
        Ok(Self {
            n,
            indices,
            convention,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Lower position of each contracted pair.
    pub fn lower_positions(&self) -> Vec<usize> {
        match self.convention {
            Convention::Standard => self.indices.clone(),
            Convention::Shifted => self.indices.iter().map(|i| i - 1).collect(),
        }
    }

    pub fn with_convention(&self, convention: Convention) -> Self {
        let lower = self.lower_positions();
        let indices = match convention {
            Convention::Standard => lower,
            Convention::Shifted => lower.iter().map(|i| i + 1).collect(),
        };
        Self {
            n: self.n,
            indices,
            convention,
        }
    }

    /// The doubled tuple `(i_1 - 1, i_1, ..., i_l - 1, i_l)` of all
    /// contracted positions, ascending.
    pub fn doubled(&self) -> Vec<usize> {
        self.lower_positions()
            .into_iter()
            .flat_map(|i| [i, i + 1])
            .collect()
    }

    /// Whether position `p` (1-based) is part of a contracted pair.
    pub fn is_contracted(&self, p: usize) -> bool {
        self.lower_positions().iter().any(|&i| i == p || i + 1 == p)
    }

    /// `delta_{i_1} ... delta_{i_l} (a_n ... a_1)`.
    pub fn apply_to_full_product(&self) -> Result<SymbolPolynomial> {
        let mut p = SymbolPolynomial::from_monomial(self.n, SymbolMonomial::full_product(self.n));
        for i in self.lower_positions() {
            p = delta_apply(i, &p)?;
        }
        Ok(p)
    }
}

/// All strictly separated tuples of length `l` in the given convention,
/// lexicographically ordered.
pub fn enumerate_patterns(n: usize, l: usize, convention: Convention) -> Vec<ContractionPattern> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    if 2 * l > n {
        return Vec::new();
    }
    let mut cur = Vec::with_capacity(l);
    fill(1, n.saturating_sub(1), l, &mut cur, &mut out);
    out.into_iter()
        .map(|indices| {
            ContractionPattern {
                n,
                indices,
                convention: Convention::Standard,
            }
            .with_convention(convention)
        })
        .collect()
}

fn fill(start: usize, hi: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if left == 0 {
        out.push(cur.clone());
        return;
    }
    // leave room for the remaining `left - 1` indices, each 2 apart
    if hi + 2 < 2 * left {
        return;
    }
    let last = hi + 2 - 2 * left;
    for i in start..=last {
        cur.push(i);
        fill(i + 2, hi, left - 1, cur, out);
        cur.pop();
    }
}

/// `exp(sum_i delta_i) a_n ... a_1`, evaluated as the finite pattern sum.
pub fn expand_closed_form(n: usize) -> SymbolPolynomial {
    let mut out = SymbolPolynomial::zero(n);
    for l in 0..=n / 2 {
        for pat in enumerate_patterns(n, l, Convention::Standard) {
            let term = pat
                .apply_to_full_product()
                .expect("enumerated patterns are valid");
            out.add(&term);
        }
    }
    out
}
