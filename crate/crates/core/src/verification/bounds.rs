//! Resolvent-norm bounds and the wave-function bound ratios.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::norm3;
use crate::nelson::{
    lambda_component, lanczos_lowest, resolvent_solve, CgOptions, GroundStateResult, LanczosOptions, NelsonModel,
    ResolventSpec,
};
use crate::wavefunctions::{gbound, MomentumTuple, WaveFunctions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventSample {
    pub modes: Vec<usize>,
    pub i: usize,
    /// `||R_{P; k_1..k_i}||`.
    pub norm: f64,
    /// `||R_i|| |k|_i`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventBoundReport {
    pub samples: Vec<ResolventSample>,
    pub min_scaled: f64,
    pub max_scaled: f64,
    /// `<psi, Lambda^c psi>`.
    pub lambda_expectation: [f64; 3],
    /// `||Q Lambda^c|| = ||Lambda^c psi||`, max over `c`.
    pub q_lambda: f64,
    /// `||R Lambda psi||` over all components.
    pub r_lambda_psi: f64,
}

/// Smallest eigenvalue of `H_{P - q} - E + offset` on the full truncated space.
pub fn lowest_shifted(model: &NelsonModel, gs: &GroundStateResult, q: [f64; 3], offset: f64) -> Result<f64> {
    let start = gs.psi().clone() + crate::nelson::generic_vector(model.dim()) * 1e-3;
    let opts = LanczosOptions { tol: 1e-9, ..Default::default() };
    Ok(lanczos_lowest(|x| model.apply(q, offset - gs.energy(), x), start, &[], opts)?.value)
}

pub fn check_resolvent_bounds(
    model: &NelsonModel,
    gs: &GroundStateResult,
    tuples: &[Vec<usize>],
    cg: CgOptions,
) -> Result<ResolventBoundReport> {
    let mut samples = Vec::new();
    for t in tuples {
        let tup = MomentumTuple::from_modes(model.grid(), t)?;
        for i in 1..=t.len() {
            let low = lowest_shifted(model, gs, tup.partial_sum(i), tup.partial_abs_sum(i))?;
            let norm = 1.0 / low;
            samples.push(ResolventSample {
                modes: t.clone(),
                i,
                norm,
                scaled: norm * tup.partial_abs_sum(i),
            });
        }
    }
    let psi = gs.psi();
    let mut lambda_expectation = [0.0; 3];
    let mut q_lambda: f64 = 0.0;
    let mut r2 = 0.0;
    for c in 0..3 {
        let lp = lambda_component(model, gs, c, [0.0; 3], psi);
        lambda_expectation[c] = psi.dot(&lp);
        q_lambda = q_lambda.max(lp.norm());
        r2 += resolvent_solve(model, gs, ResolventSpec::reduced(0.0), &lp, cg)?.norm_squared();
    }
    let scaled = samples.iter().map(|s| s.scaled);
    Ok(ResolventBoundReport {
        min_scaled: scaled.clone().fold(f64::INFINITY, f64::min),
        max_scaled: scaled.fold(0.0, f64::max),
        samples,
        lambda_expectation,
        q_lambda,
        r_lambda_psi: r2.sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub n: usize,
    pub beta: usize,
    pub modes: Vec<usize>,
    /// `|f^n|`, `|grad_{k_1} f^n|` or the Frobenius norm of the `k_1` Hessian.
    pub value: f64,
    /// `value sqrt(n!) |k_1|^beta / prod_i (lambda |k_i|^{alpha_bar - 3/2})`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioGroup {
    pub n: usize,
    pub beta: usize,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRatioReport {
    pub samples: Vec<RatioSample>,
    pub groups: Vec<RatioGroup>,
    /// Smallest `c` with `ratio <= c^n` on every sample.
    pub c_fit: f64,
}

fn value_with_derivatives(wf: &WaveFunctions, ks: &[[f64; 3]], beta: usize) -> Result<f64> {
    let eval = |moved: &[[f64; 3]]| wf.froehlich(&MomentumTuple::new(moved.to_vec())?);
    let h = 1e-3 * norm3(&ks[0]);
    let at = |d: [f64; 3]| -> Result<f64> {
        let mut m = ks.to_vec();
        for c in 0..3 {
            m[0][c] += d[c];
        }
        eval(&m)
    };
    let e = |c: usize, s: f64| {
        let mut d = [0.0; 3];
        d[c] = s;
        d
    };
    match beta {
        0 => Ok(eval(ks)?.abs()),
        1 => {
            let mut g2 = 0.0;
            for c in 0..3 {
                let g = (at(e(c, h))? - at(e(c, -h))?) / (2.0 * h);
                g2 += g * g;
            }
            Ok(g2.sqrt())
        }
        _ => {
            let f0 = eval(ks)?;
            let mut h2 = 0.0;
            for a in 0..3 {
                let d = (at(e(a, h))? - 2.0 * f0 + at(e(a, -h))?) / (h * h);
                h2 += d * d;
                for b in 0..a {
                    let pp = |sa: f64, sb: f64| {
                        let mut d = [0.0; 3];
                        d[a] = sa * h;
                        d[b] = sb * h;
                        at(d)
                    };
                    let m = (pp(1.0, 1.0)? - pp(1.0, -1.0)? - pp(-1.0, 1.0)? + pp(-1.0, -1.0)?) / (4.0 * h * h);
                    h2 += 2.0 * m * m;
                }
            }
            Ok(h2.sqrt())
        }
    }
}

/// Bound ratios for `|beta| <= max_beta` on the given grid-mode tuples,
/// derivatives in the first argument by central differences of the
/// resolvent-product route.
pub fn check_bound_ratios(wf: &WaveFunctions, tuples: &[Vec<usize>], max_beta: usize) -> Result<BoundRatioReport> {
    let params = wf.model.params();
    let grid = wf.model.grid();
    let mut samples = Vec::new();
    for t in tuples {
        let ks: Vec<[f64; 3]> = t.iter().map(|&j| grid.k(j)).collect();
        let n = ks.len();
        let g = gbound(params, 1.0, &ks);
        if g == 0.0 {
            continue;
        }
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        for beta in 0..=max_beta {
            let value = value_with_derivatives(wf, &ks, beta)?;
            let ratio = value * fact.sqrt() * norm3(&ks[0]).powi(beta as i32) / g;
            samples.push(RatioSample {
                n,
                beta,
                modes: t.clone(),
                value,
                ratio,
            });
        }
    }
    let mut groups = Vec::new();
    for ((n, beta), grp) in &samples.iter().sorted_by_key(|s| (s.n, s.beta)).chunk_by(|s| (s.n, s.beta)) {
        let rs: Vec<f64> = grp.map(|s| s.ratio).collect();
        let min = rs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = rs.iter().copied().fold(0.0, f64::max);
        groups.push(RatioGroup {
            n,
            beta,
            min,
            max,
            spread: max / min,
        });
    }
    let c_fit = samples.iter().map(|s| s.ratio.powf(1.0 / s.n as f64)).fold(0.0, f64::max);
    Ok(BoundRatioReport { samples, groups, c_fit })
}
