//! Discretized fiber Hamiltonian
//! `H_{P-q} = 1/2 |P - q - P_f|^2 + H_f + sum_j sqrt(w_j) v_j (b_j + b*_j)`.
//!
//! The interaction is stored once as a sparse matrix; momentum shifts and
//! energy offsets only touch the diagonal.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::params::NelsonParams;
use crate::error::{Error, Result};
use crate::fock::{FockBasis, MomentumGrid};

#[derive(Debug, Clone)]
pub struct NelsonModel {
    params: NelsonParams,
    grid: MomentumGrid,
    basis: Arc<FockBasis>,
    form: Vec<f64>,
    interaction: CsrMatrix<f64>,
    hf: Vec<f64>,
    pf: Vec<[f64; 3]>,
    quadratic: bool,
}

impl NelsonModel {
    pub fn new(params: NelsonParams, grid: MomentumGrid, n_max: usize) -> Result<Self> {
        Self::build(params, grid, n_max, true)
    }

    /// With `quadratic = false` the kinetic term `1/2 |P - P_f|^2` is dropped
    /// and the model becomes the exactly solvable van Hove Hamiltonian.
    pub fn build(params: NelsonParams, grid: MomentumGrid, n_max: usize, quadratic: bool) -> Result<Self> {
        params.validate()?;
        let basis = Arc::new(FockBasis::new(grid.len(), n_max)?);
        Self::with_basis(params, grid, basis, quadratic)
    }

    pub fn with_basis(
        params: NelsonParams,
        grid: MomentumGrid,
        basis: Arc<FockBasis>,
        quadratic: bool,
    ) -> Result<Self> {
        params.validate()?;
        basis.check_grid(&grid)?;
        let form = params.form_factor_on(&grid);
        let d = basis.dim();
        let m = grid.len();
        let mut coo = CooMatrix::new(d, d);
        for i in 0..d {
            for j in 0..m {
                let c = grid.w(j).sqrt() * form[j];
                if c == 0.0 {
                    continue;
                }
                if let Some(t) = basis.raised(i, j) {
                    let a = c * (basis.state(t)[j] as f64).sqrt();
                    coo.push(t, i, a);
                    coo.push(i, t, a);
                }
            }
        }
        let interaction = CsrMatrix::from(&coo);
        let hf = basis.hf_diag(&grid)?;
        let pf = basis.pf_diag(&grid)?;
        Ok(Self {
            params,
            grid,
            basis,
            form,
            interaction,
            hf,
            pf,
            quadratic,
        })
    }

    pub fn params(&self) -> &NelsonParams {
        &self.params
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn n_max(&self) -> usize {
        self.basis.n_max()
    }

    pub fn quadratic(&self) -> bool {
        self.quadratic
    }

    /// Form factor `v_j` at each grid mode.
    pub fn form_factor(&self) -> &[f64] {
        &self.form
    }

    /// `sqrt(w_j) v_j`, the coefficient of `b_j + b*_j`.
    pub fn coupling(&self, j: usize) -> f64 {
        self.grid.w(j).sqrt() * self.form[j]
    }

    pub fn pf(&self) -> &[[f64; 3]] {
        &self.pf
    }

    pub fn hf(&self) -> &[f64] {
        &self.hf
    }

    pub fn interaction(&self) -> &CsrMatrix<f64> {
        &self.interaction
    }

    /// Same grid and basis, different parameters (used for finite differences in `P`).
    pub fn with_params(&self, params: NelsonParams) -> Result<Self> {
        if params.lambda == self.params.lambda
            && params.sigma == self.params.sigma
            && params.kappa == self.params.kappa
            && params.alpha_bar == self.params.alpha_bar
            && params.eps0 == self.params.eps0
        {
            params.validate()?;
            let mut out = self.clone();
            out.params = params;
            return Ok(out);
        }
        Self::with_basis(params, self.grid.clone(), Arc::clone(&self.basis), self.quadratic)
    }

    /// Diagonal of `H_{p_eff} + offset` on the first `dim` basis states,
    /// where `p_eff` is the total momentum entering the kinetic term.
    pub fn diagonal(&self, p_eff: [f64; 3], offset: f64, dim: usize) -> Vec<f64> {
        (0..dim)
            .map(|i| {
                let kin = if self.quadratic {
                    let pf = &self.pf[i];
                    let d = [p_eff[0] - pf[0], p_eff[1] - pf[1], p_eff[2] - pf[2]];
                    0.5 * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
                } else {
                    0.0
                };
                kin + self.hf[i] + offset
            })
            .collect()
    }

    /// `(diag + V) x` on the prefix of length `x.len()`.
    pub fn apply_with_diagonal(&self, diag: &[f64], x: &DVector<f64>) -> DVector<f64> {
        let d = x.len();
        let offsets = self.interaction.row_offsets();
        let cols = self.interaction.col_indices();
        let vals = self.interaction.values();
        DVector::from_fn(d, |r, _| {
            let mut acc = diag[r] * x[r];
            for k in offsets[r]..offsets[r + 1] {
                let c = cols[k];
                if c < d {
                    acc += vals[k] * x[c];
                }
            }
            acc
        })
    }

    /// `(H_{P - q} + offset) x` on the prefix of length `x.len()`.
    pub fn apply(&self, q: [f64; 3], offset: f64, x: &DVector<f64>) -> DVector<f64> {
        let diag = self.diagonal(self.shifted_p(q), offset, x.len());
        self.apply_with_diagonal(&diag, x)
    }

    pub fn shifted_p(&self, q: [f64; 3]) -> [f64; 3] {
        let p = self.params.p;
        [p[0] - q[0], p[1] - q[1], p[2] - q[2]]
    }

    /// Dense `H_{P - q} + offset` on the first `dim` states.
    pub fn dense(&self, q: [f64; 3], offset: f64, dim: usize) -> DMatrix<f64> {
        let diag = self.diagonal(self.shifted_p(q), offset, dim);
        let mut h = DMatrix::from_diagonal(&DVector::from_vec(diag));
        for (r, c, v) in self.interaction.triplet_iter() {
            if r < dim && c < dim {
                h[(r, c)] += *v;
            }
        }
        h
    }

    /// Largest `|H_rc - H_cr|` of the assembled interaction.
    pub fn hermiticity_defect(&self) -> f64 {
        let t = self.interaction.transpose();
        let diff = &self.interaction - &t;
        diff.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks that every interaction entry couples adjacent photon sectors.
    pub fn is_grade_tridiagonal(&self) -> bool {
        self.interaction
            .triplet_iter()
            .all(|(r, c, _)| self.basis.photon_number(r).abs_diff(self.basis.photon_number(c)) == 1)
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        if len > self.dim() {
            return Err(Error::DimensionMismatch {
                level: self.n_max(),
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }
}
