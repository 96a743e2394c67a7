//! Truncated symmetric Fock space over a finite set of modes.
//!
//! States are occupation vectors `(n_1, ..., n_M)` with `sum n_j <= N_max`,
//! ordered by total photon number and lexicographically (ascending) inside
//! each photon-number sector. Every sector is therefore a contiguous slice,
//! and truncating to `N' < N_max` photons is a prefix of the basis.

use std::collections::HashMap;
use std::ops::Range;

use nalgebra::DVector;

use super::grid::MomentumGrid;
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct FockBasis {
    modes: usize,
    n_max: usize,
    occ: Vec<u8>,
    index: HashMap<Vec<u8>, usize>,
    sector_start: Vec<usize>,
    lower: Vec<u32>,
    raise: Vec<u32>,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, j| acc * (n - j) / (j + 1))
}

/// `sum_{m <= n_max} C(modes + m - 1, m)`.
pub fn fock_dimension(modes: usize, n_max: usize) -> usize {
    (0..=n_max)
        .map(|m| if modes == 0 { usize::from(m == 0) } else { binomial(modes + m - 1, m) })
        .sum()
}

impl FockBasis {
    pub fn new(modes: usize, n_max: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter {
                field: "modes",
                reason: "need at least one mode".into(),
            });
        }
        if n_max > u8::MAX as usize {
            return Err(Error::InvalidParameter {
                field: "n_max",
                reason: format!("{n_max} exceeds {}", u8::MAX),
            });
        }
        let dim = fock_dimension(modes, n_max);
        if dim >= NONE as usize {
            return Err(Error::InvalidParameter {
                field: "n_max",
                reason: format!("basis dimension {dim} too large"),
            });
        }
        let mut occ = Vec::with_capacity(dim * modes);
        let mut sector_start = Vec::with_capacity(n_max + 2);
        let mut cur = vec![0u8; modes];
        for m in 0..=n_max {
            sector_start.push(occ.len() / modes);
            compositions(m, 0, &mut cur, &mut occ);
        }
        sector_start.push(dim);

        let index: HashMap<Vec<u8>, usize> = occ
            .chunks(modes)
            .enumerate()
            .map(|(i, s)| (s.to_vec(), i))
            .collect();
        let mut lower = vec![NONE; dim * modes];
        let mut raise = vec![NONE; dim * modes];
        let mut key = vec![0u8; modes];
        for i in 0..dim {
            key.copy_from_slice(&occ[i * modes..(i + 1) * modes]);
            let total: usize = key.iter().map(|&n| n as usize).sum();
            for j in 0..modes {
                if key[j] > 0 {
                    key[j] -= 1;
                    lower[i * modes + j] = index[&key] as u32;
                    key[j] += 1;
                }
                if total < n_max {
                    key[j] += 1;
                    raise[i * modes + j] = index[&key] as u32;
                    key[j] -= 1;
                }
            }
        }
        Ok(Self {
            modes,
            n_max,
            occ,
            index,
            sector_start,
            lower,
            raise,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.sector_start[self.n_max + 1]
    }

    /// Occupation vector of basis state `idx`.
    pub fn state(&self, idx: usize) -> &[u8] {
        &self.occ[idx * self.modes..(idx + 1) * self.modes]
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn photon_number(&self, idx: usize) -> usize {
        self.state(idx).iter().map(|&n| n as usize).sum()
    }

    /// Basis indices of the `m`-photon sector.
    pub fn sector(&self, m: usize) -> Range<usize> {
        self.sector_start[m]..self.sector_start[m + 1]
    }

    /// Number of states with at most `n` photons.
    pub fn prefix_dim(&self, n: usize) -> usize {
        self.sector_start[n.min(self.n_max) + 1]
    }

    /// Index of the state with one photon fewer in mode `j`.
    pub fn lowered(&self, idx: usize, j: usize) -> Option<usize> {
        let v = self.lower[idx * self.modes + j];
        (v != NONE).then_some(v as usize)
    }

    /// Index of the state with one photon more in mode `j`, if still inside
    /// the truncation.
    pub fn raised(&self, idx: usize, j: usize) -> Option<usize> {
        let v = self.raise[idx * self.modes + j];
        (v != NONE).then_some(v as usize)
    }

    fn check_mode(&self, j: usize) -> Result<()> {
        if j >= self.modes {
            return Err(Error::ModeOutOfRange {
                mode: j,
                modes: self.modes,
            });
        }
        Ok(())
    }

    /// `b_j x` on the first `x.len()` basis states (a prefix).
    pub fn annihilate(&self, j: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_mode(j)?;
        let d = x.len();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            let n = self.occ[i * self.modes + j];
            if n > 0 {
                if let Some(t) = self.lowered(i, j) {
                    out[t] += (n as f64).sqrt() * x[i];
                }
            }
        }
        Ok(out)
    }

    /// `b*_j x` on a prefix of the basis; amplitude leaving the prefix is dropped.
    pub fn create(&self, j: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_mode(j)?;
        let d = x.len();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if let Some(t) = self.raised(i, j) {
                if t < d {
                    let n = self.occ[t * self.modes + j];
                    out[t] += (n as f64).sqrt() * x[i];
                }
            }
        }
        Ok(out)
    }

    pub fn number_diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.photon_number(i) as f64).collect()
    }

    /// Diagonal of `H_f = sum_j |k_j| b*_j b_j`.
    pub fn hf_diag(&self, grid: &MomentumGrid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        let norms: Vec<f64> = (0..self.modes).map(|j| grid.norm(j)).collect();
        Ok((0..self.dim())
            .map(|i| {
                self.state(i)
                    .iter()
                    .zip(&norms)
                    .map(|(&n, r)| n as f64 * r)
                    .sum()
            })
            .collect())
    }

    /// Diagonal of `P_f = sum_j k_j b*_j b_j`, one 3-vector per state.
    pub fn pf_diag(&self, grid: &MomentumGrid) -> Result<Vec<[f64; 3]>> {
        self.check_grid(grid)?;
        Ok((0..self.dim())
            .map(|i| {
                let mut p = [0.0; 3];
                for (j, &n) in self.state(i).iter().enumerate() {
                    let k = grid.k(j);
                    for c in 0..3 {
                        p[c] += n as f64 * k[c];
                    }
                }
                p
            })
            .collect())
    }

    pub fn check_grid(&self, grid: &MomentumGrid) -> Result<()> {
        if grid.len() != self.modes {
            return Err(Error::DimensionMismatch {
                level: 0,
                expected: self.modes,
                got: grid.len(),
            });
        }
        Ok(())
    }

    /// Vacuum vector on the full basis.
    pub fn vacuum(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[0] = 1.0;
        v
    }

    /// Zeroes all components outside the sectors `lo..=hi`.
    pub fn project_sectors(&self, x: &DVector<f64>, lo: usize, hi: usize) -> DVector<f64> {
        let mut out = x.clone();
        for (i, v) in out.iter_mut().enumerate() {
            let m = self.photon_number(i);
            if m < lo || m > hi {
                *v = 0.0;
            }
        }
        out
    }
}

// Appends all occupation vectors with total `left` on modes `pos..`, in
// ascending lexicographic order.
fn compositions(left: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<u8>) {
    let m = cur.len();
    if pos + 1 == m {
        cur[pos] = left as u8;
        out.extend_from_slice(cur);
        cur[pos] = 0;
        return;
    }
    for n in 0..=left {
        cur[pos] = n as u8;
        compositions(left - n, pos + 1, cur, out);
    }
    cur[pos] = 0;
}
