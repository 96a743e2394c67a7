use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{norm3, MomentumGrid};

/// Photon momenta `k_1, ..., k_n` with their partial sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumTuple {
    ks: Vec<[f64; 3]>,
    /// Grid indices when every momentum is a grid mode.
    modes: Option<Vec<usize>>,
}

impl MomentumTuple {
    pub fn new(ks: Vec<[f64; 3]>) -> Result<Self> {
        if let Some(i) = ks.iter().position(|k| !(norm3(k) > 0.0)) {
            return Err(Error::InvalidParameter {
                field: "k",
                reason: format!("k_{} has zero length", i + 1),
            });
        }
        Ok(Self { ks, modes: None })
    }

    pub fn from_modes(grid: &MomentumGrid, modes: &[usize]) -> Result<Self> {
        for &j in modes {
            grid.mode(j)?;
        }
        Ok(Self {
            ks: modes.iter().map(|&j| grid.k(j)).collect(),
            modes: Some(modes.to_vec()),
        })
    }

    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    pub fn k(&self, i: usize) -> [f64; 3] {
        self.ks[i]
    }

    pub fn momenta(&self) -> &[[f64; 3]] {
        &self.ks
    }

    pub fn modes(&self) -> Option<&[usize]> {
        self.modes.as_deref()
    }

    /// Arguments reordered as `(k_{perm[0]}, k_{perm[1]}, ...)`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            ks: perm.iter().map(|&i| self.ks[i]).collect(),
            modes: self.modes.as_ref().map(|m| perm.iter().map(|&i| m[i]).collect()),
        }
    }

    /// Sub-tuple of the listed positions.
    pub fn select(&self, positions: &[usize]) -> Self {
        self.permuted(positions)
    }

    /// `k_1 + ... + k_i` (1-based `i`; `i = 0` gives zero).
    pub fn partial_sum(&self, i: usize) -> [f64; 3] {
        let mut s = [0.0; 3];
        for k in &self.ks[..i] {
            for c in 0..3 {
                s[c] += k[c];
            }
        }
        s
    }

    /// `|k_1| + ... + |k_i|`.
    pub fn partial_abs_sum(&self, i: usize) -> f64 {
        self.ks[..i].iter().map(norm3).sum()
    }
}

/// `sum_{pi in S_n} prod_m 1 / (|k_{pi(1)}| + ... + |k_{pi(m)}|)`.
pub fn permutation_resolvent_sum(abs_k: &[f64]) -> f64 {
    use itertools::Itertools;
    let n = abs_k.len();
    (0..n)
        .permutations(n)
        .map(|p| {
            let mut acc = 0.0;
            let mut prod = 1.0;
            for &i in &p {
                acc += abs_k[i];
                prod /= acc;
            }
            prod
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn partial_sums() {
        let t = MomentumTuple::new(vec![[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, -3.0]]).unwrap();
        assert_eq!(t.partial_sum(0), [0.0; 3]);
        assert_eq!(t.partial_sum(2), [1.0, 2.0, 0.0]);
        assert_eq!(t.partial_abs_sum(3), 6.0);
        assert_eq!(t.permuted(&[2, 0, 1]).k(0), [0.0, 0.0, -3.0]);
        assert!(MomentumTuple::new(vec![[0.0; 3]]).is_err());
    }

    proptest! {
        #[test]
        fn combinatorial_identity(ks in proptest::collection::vec(0.01f64..10.0, 1..=7)) {
            let lhs = permutation_resolvent_sum(&ks);
            let rhs: f64 = ks.iter().map(|k| 1.0 / k).product();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }
}
