//! Recurrence residuals, the product bound `g^n_sigma`, tables and derivatives.

use std::fmt::Write as _;

use itertools::Itertools;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::routes::{Method, RouteOptions, WaveFunctions};
use super::tuple::MomentumTuple;
use crate::error::{Error, Result};
use crate::fock::{dot3, norm3};
use crate::nelson::{
    lambda_dot, solve_ground_state, GradientOptions, GroundStateResult, LanczosOptions, NelsonModel,
    NelsonParams, MOMENTUM_BOUND,
};

/// Raw and safe-sector residual norms of a vector identity, relative to the
/// size of its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub raw: f64,
    pub projected: f64,
    pub scale: f64,
}

/// Sectors where an `n`-fold pull-through identity is exact under truncation:
/// photon number at most `N_max - max(n, 2)`.
pub fn safe_sectors(n_max: usize, n: usize) -> usize {
    n_max.saturating_sub(n.max(2))
}

fn residual(model: &NelsonModel, n: usize, r: &DVector<f64>, scale: f64) -> Residual {
    let safe = model.basis().prefix_dim(safe_sectors(model.n_max(), n)).min(r.len());
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Residual {
        raw: r.norm() / scale,
        projected: r.rows(0, safe).norm() / scale,
        scale,
    }
}

fn others(n: usize, skip: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !skip.contains(i)).collect()
}

impl WaveFunctions<'_> {
    /// `(H_{P; k_1..k_n} - E) f~^n + sum_i v(k_i) f~^{n-1}(...i^...)` with
    /// `f~^n = b(k_1)..b(k_n) psi` taken from the direct route.
    pub fn froehlich_recurrence_residual(&self, modes: &[usize]) -> Result<Residual> {
        let n = modes.len();
        let t = MomentumTuple::from_modes(self.model.grid(), modes)?;
        let lhs = self.model.apply(t.partial_sum(n), t.partial_abs_sum(n) - self.gs.energy(), &self.direct_vector(modes)?);
        let mut rhs = DVector::zeros(lhs.len());
        for i in 0..n {
            let sub: Vec<usize> = others(n, &[i]).iter().map(|&j| modes[j]).collect();
            rhs -= self.direct_vector(&sub)? * self.model.coupling(modes[i]) / self.model.grid().w(modes[i]).sqrt();
        }
        Ok(residual(self.model, n, &(lhs - &rhs), rhs.norm()))
    }

    /// Residual of the recurrence for `^f^n = b_W(k_1)..b_W(k_n) psi`:
    /// `(H_{P; k_1..k_n} - E) ^f^n = sum_i g(k_i).(Lambda + k - k_i/2) ^f^{n-1} - sum_{i<i'} g.g ^f^{n-2}`,
    /// `k` the sum of all arguments.
    pub fn dressed_recurrence_residual(&self, modes: &[usize]) -> Result<Residual> {
        let n = modes.len();
        let t = MomentumTuple::from_modes(self.model.grid(), modes)?;
        let total = t.partial_sum(n);
        let lhs = self.model.apply(total, t.partial_abs_sum(n) - self.gs.energy(), &self.direct_dressed(modes)?);
        let mut rhs = DVector::zeros(lhs.len());
        let g: Vec<[f64; 3]> = t.momenta().iter().map(|k| self.dressing(k).map(|d| d.g)).collect::<Result<_>>()?;
        for i in 0..n {
            let sub: Vec<usize> = others(n, &[i]).iter().map(|&j| modes[j]).collect();
            let ki = t.k(i);
            let shift = [0, 1, 2].map(|c| total[c] - 0.5 * ki[c]);
            rhs += lambda_dot(self.model, self.gs, g[i], shift, &self.direct_dressed(&sub)?);
        }
        for (i, j) in (0..n).tuple_combinations() {
            let sub: Vec<usize> = others(n, &[i, j]).iter().map(|&m| modes[m]).collect();
            rhs -= self.direct_dressed(&sub)? * dot3(&g[i], &g[j]);
        }
        Ok(residual(self.model, n, &(lhs - &rhs), rhs.norm()))
    }

    /// Tabulates one route on every mode tuple of length `n` (sorted, with repetition).
    pub fn table(&self, method: Method, n: usize) -> Result<WaveFunctionTable> {
        let m = self.model.grid().len();
        let mut entries = Vec::new();
        for modes in (0..m).combinations_with_replacement(n) {
            let value = self.evaluate(method, &modes)?;
            entries.push(TableEntry { modes, value });
        }
        Ok(WaveFunctionTable {
            n,
            method,
            symmetrized: method != Method::Direct,
            entries,
        })
    }
}

/// `g^n_sigma(k_1..k_n) = prod_i c lambda chi_[sigma,kappa)(k_i) |k_i|^alpha_bar / |k_i|^{3/2}`.
pub fn gbound(params: &NelsonParams, c: f64, ks: &[[f64; 3]]) -> f64 {
    ks.iter()
        .map(|k| {
            let r = norm3(k);
            if r < params.sigma || r >= params.kappa {
                0.0
            } else {
                c * params.lambda * r.powf(params.alpha_bar) / r.powf(1.5)
            }
        })
        .product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub modes: Vec<usize>,
    pub value: f64,
}

/// Values of `f^n` on grid-mode tuples for one route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunctionTable {
    pub n: usize,
    pub method: Method,
    pub symmetrized: bool,
    pub entries: Vec<TableEntry>,
}

impl WaveFunctionTable {
    pub fn csv_header() -> &'static str {
        "method,n,modes,value"
    }

    /// One row per tuple, modes joined by `;`, values in round-trip exponent format.
    pub fn to_csv_rows(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let modes = e.modes.iter().map(|m| m.to_string()).join(";");
            writeln!(out, "{},{},{},{:e}", self.method.name(), self.n, modes, e.value).unwrap();
        }
        out
    }

    pub fn get(&self, modes: &[usize]) -> Option<f64> {
        let mut key = modes.to_vec();
        key.sort_unstable();
        self.entries.iter().find(|e| e.modes == key).map(|e| e.value)
    }
}

/// Model and ground state re-solved at a shifted total momentum.
pub fn solve_at(
    model: &NelsonModel,
    p: [f64; 3],
    grad: GradientOptions,
    eig: LanczosOptions,
) -> Result<(NelsonModel, GroundStateResult)> {
    if norm3(&p) >= MOMENTUM_BOUND {
        return Err(Error::StepOutsideDomain { step: norm3(&p) });
    }
    let m = model.with_params(NelsonParams { p, ..*model.params() })?;
    let gs = solve_ground_state(&m, grad, eig)?;
    Ok((m, gs))
}

/// Options for derivatives in `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions {
    pub h: f64,
    pub grad: GradientOptions,
    pub eig: LanczosOptions,
    pub route: RouteOptions,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self {
            h: 1e-3,
            grad: GradientOptions::default(),
            eig: LanczosOptions::default(),
            route: RouteOptions::default(),
        }
    }
}

fn shifted(p: [f64; 3], c: usize, s: f64) -> [f64; 3] {
    let mut q = p;
    q[c] += s;
    q
}

/// Central finite difference in `P^c` (order 1) or `P^c P^c` (order 2) of
/// `eval`, with every ground state re-solved and sign-fixed by `<Omega, psi> > 0`.
pub fn derivative_p(
    model: &NelsonModel,
    c: usize,
    order: usize,
    opts: DerivativeOptions,
    eval: impl Fn(&WaveFunctions) -> Result<f64>,
) -> Result<f64> {
    let p = model.params().p;
    let at = |s: f64| -> Result<f64> {
        let (m, gs) = solve_at(model, shifted(p, c, s), opts.grad, opts.eig)?;
        eval(&WaveFunctions::new(&m, &gs, opts.route))
    };
    let h = opts.h;
    match order {
        1 => Ok((at(h)? - at(-h)?) / (2.0 * h)),
        2 => Ok((at(h)? - 2.0 * at(0.0)? + at(-h)?) / (h * h)),
        _ => Err(Error::InvalidParameter {
            field: "order",
            reason: format!("{order} is not 1 or 2"),
        }),
    }
}

/// `d/dP^c f^1(k)` from analytically differentiated pieces:
/// `f^1 = -<Omega, R_k v psi>`, `dR_k = R_k (Lambda + k)^c R_k`, `dpsi = R Lambda^c psi`.
pub fn f1_derivative_analytic(wf: &WaveFunctions, k: [f64; 3], c: usize) -> Result<f64> {
    let model = wf.model;
    let gs = wf.gs;
    let v = model.params().form_factor(&k);
    if v == 0.0 {
        return Ok(0.0);
    }
    let t = MomentumTuple::new(vec![k])?;
    let mut e = [0.0; 3];
    e[c] = 1.0;
    let psi = gs.psi();
    let r_psi = wf.resolvent_step(&t, 1, &(psi * v))?;
    let lam_r_psi = lambda_dot(model, gs, e, k, &r_psi);
    let d_res = wf.resolvent_step(&t, 1, &lam_r_psi)?;
    let dpsi = crate::nelson::resolvent_solve(
        model,
        gs,
        crate::nelson::ResolventSpec::reduced(0.0),
        &lambda_dot(model, gs, e, [0.0; 3], psi),
        wf.opts.cg,
    )?;
    let d_state = wf.resolvent_step(&t, 1, &(dpsi * v))?;
    Ok(-(d_res[0] + d_state[0]))
}

/// Central finite difference of the resolvent-product route in the
/// component `c` of argument `l`, at arbitrary (off-grid) momenta.
pub fn froehlich_derivative_k(wf: &WaveFunctions, ks: &[[f64; 3]], l: usize, c: usize, h: f64) -> Result<f64> {
    let at = |s: f64| -> Result<f64> {
        let mut moved = ks.to_vec();
        moved[l][c] += s;
        wf.froehlich(&MomentumTuple::new(moved)?)
    };
    Ok((at(h)? - at(-h)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::MomentumGrid;

    fn solved(n_max: usize) -> (NelsonModel, GroundStateResult) {
        let full = MomentumGrid::shells(0.05, 1.0, 2).unwrap();
        let grid = MomentumGrid::new(vec![full.modes()[0].clone(), full.modes()[2].clone(), full.modes()[7].clone()]).unwrap();
        let m = NelsonModel::new(NelsonParams::default(), grid, n_max).unwrap();
        let gs = solve_ground_state(&m, GradientOptions::default(), LanczosOptions::default()).unwrap();
        (m, gs)
    }

    #[test]
    fn recurrences_hold_on_safe_sectors() {
        let (m, gs) = solved(5);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        for modes in [vec![0], vec![1, 2], vec![0, 0], vec![0, 1, 2], vec![2, 2, 2]] {
            let a = wf.froehlich_recurrence_residual(&modes).unwrap();
            let b = wf.dressed_recurrence_residual(&modes).unwrap();
            assert!(a.projected < 1e-8, "{modes:?} {a:?}");
            assert!(b.projected < 1e-8, "{modes:?} {b:?}");
            assert!(a.raw > a.projected);
        }
    }

    #[test]
    fn gbound_formula() {
        let p = NelsonParams::default();
        assert_eq!(gbound(&p, 1.0, &[[0.01, 0.0, 0.0]]), 0.0);
        let k = [0.0, 0.4, 0.0];
        assert!((gbound(&p, 1.0, &[k]) - 0.1 / 0.4f64.powf(1.5)).abs() < 1e-15);
        assert!((gbound(&p, 2.0, &[k, k]) - (0.2 / 0.4f64.powf(1.5)).powi(2)).abs() < 1e-13);
    }

    #[test]
    fn table_rows_and_lookup() {
        let (m, gs) = solved(3);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        let t = wf.table(Method::Direct, 2).unwrap();
        assert_eq!(t.entries.len(), 6);
        assert_eq!(t.get(&[2, 0]), Some(wf.direct(&[0, 2]).unwrap()));
        let csv = t.to_csv_rows();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("direct,2,0;0,"));
    }

    #[test]
    fn f1_derivative_pieces_match_finite_difference() {
        let (m, gs) = solved(4);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        let k = m.grid().k(0);
        let mode = [0usize];
        for c in [0, 1] {
            let analytic = f1_derivative_analytic(&wf, k, c).unwrap();
            let errs: Vec<f64> = [4e-3, 2e-3]
                .iter()
                .map(|&h| {
                    let fd = derivative_p(&m, c, 1, DerivativeOptions { h, ..Default::default() }, |w| w.froehlich(&MomentumTuple::from_modes(w.model.grid(), &mode)?)).unwrap();
                    (fd - analytic).abs()
                })
                .collect();
            let scale = analytic.abs().max(1e-3);
            assert!(errs[1] < 1e-5 * scale.max(1.0), "c={c} {errs:?} {analytic}");
            assert!(errs[1] < errs[0] / 2.5 || errs[1] < 1e-9, "c={c} {errs:?}");
        }
    }

    #[test]
    fn k_derivative_is_finite_off_grid() {
        let (m, gs) = solved(3);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        let ks = [[0.21, 0.05, -0.1]];
        let d1 = froehlich_derivative_k(&wf, &ks, 0, 0, 1e-3).unwrap();
        let d2 = froehlich_derivative_k(&wf, &ks, 0, 0, 5e-4).unwrap();
        assert!(d1.is_finite() && (d1 - d2).abs() < 1e-5 * d1.abs().max(1.0));
    }
}
