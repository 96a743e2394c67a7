//! Finite-difference checks of the ground-state derivatives in `P`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nelson::{
    ground_state, lambda_component, resolvent_solve, CgOptions, GroundStateResult, LanczosOptions, NelsonModel,
    NelsonParams, ResolventSpec,
};

/// `d psi / dP^j = R Lambda^j psi` with `R` the reduced resolvent at zero.
pub fn dpsi(model: &NelsonModel, gs: &GroundStateResult, j: usize, cg: CgOptions) -> Result<DVector<f64>> {
    let rhs = lambda_component(model, gs, j, [0.0; 3], gs.psi());
    resolvent_solve(model, gs, ResolventSpec::reduced(0.0), &rhs, cg)
}

/// `d^2 psi / dP^j dP^j' = Q^perp R Lambda^j' R Lambda^j psi + (j <-> j') - psi <psi, Lambda^j' R^2 Lambda^j psi>`.
pub fn d2psi(model: &NelsonModel, gs: &GroundStateResult, j: usize, jp: usize, cg: CgOptions) -> Result<DVector<f64>> {
    let psi = gs.psi();
    let rj = dpsi(model, gs, j, cg)?;
    let rjp = if j == jp { rj.clone() } else { dpsi(model, gs, jp, cg)? };
    let reduced = |x: &DVector<f64>| resolvent_solve(model, gs, ResolventSpec::reduced(0.0), x, cg);
    let a = reduced(&lambda_component(model, gs, jp, [0.0; 3], &rj))?;
    let b = reduced(&lambda_component(model, gs, j, [0.0; 3], &rjp))?;
    let mut out = a + b;
    let c = psi.dot(&out);
    out.axpy(-c, psi, 1.0);
    out.axpy(-rjp.dot(&rj), psi, 1.0);
    Ok(out)
}

fn psi_at(model: &NelsonModel, p: [f64; 3], reference: &DVector<f64>, eig: LanczosOptions) -> Result<DVector<f64>> {
    let m = model.with_params(NelsonParams { p, ..*model.params() })?;
    let mut psi = ground_state(&m, eig)?.psi;
    // phase alignment with the unshifted state
    if psi.dot(reference) < 0.0 {
        psi.neg_mut();
    }
    Ok(psi)
}

fn shifted(p: [f64; 3], c: usize, s: f64) -> [f64; 3] {
    let mut q = p;
    q[c] += s;
    q
}

/// Errors of central differences against the analytic derivatives at a list of steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub steps: Vec<f64>,
    /// `||FD_h(d psi) - R Lambda psi||` per step, max over components.
    pub first: Vec<f64>,
    /// Same for the second derivatives, max over component pairs.
    pub second: Vec<f64>,
    pub first_scale: f64,
    pub second_scale: f64,
}

impl DerivativeCheck {
    /// `log2(e(h) / e(h/2))` between successive steps.
    pub fn orders(errors: &[f64], steps: &[f64]) -> Vec<f64> {
        errors
            .windows(2)
            .zip(steps.windows(2))
            .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            .collect()
    }

    pub fn first_orders(&self) -> Vec<f64> {
        Self::orders(&self.first, &self.steps)
    }

    pub fn second_orders(&self) -> Vec<f64> {
        Self::orders(&self.second, &self.steps)
    }
}

/// Compares phase-aligned central differences of `psi_P` with the analytic
/// first and second derivatives, for the components in `comps`.
pub fn check_psi_derivatives(
    model: &NelsonModel,
    gs: &GroundStateResult,
    comps: &[usize],
    steps: &[f64],
    eig: LanczosOptions,
    cg: CgOptions,
) -> Result<DerivativeCheck> {
    let p = gs.p;
    let psi = gs.psi();
    let d1: Vec<DVector<f64>> = comps.iter().map(|&j| dpsi(model, gs, j, cg)).collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for (a, &j) in comps.iter().enumerate() {
        for &jp in &comps[a..] {
            pairs.push((j, jp, d2psi(model, gs, j, jp, cg)?));
        }
    }
    let first_scale = d1.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let second_scale = pairs.iter().map(|(_, _, v)| v.norm()).fold(0.0, f64::max);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &h in steps {
        let mut e1: f64 = 0.0;
        for (i, &j) in comps.iter().enumerate() {
            let fd = (psi_at(model, shifted(p, j, h), psi, eig)? - psi_at(model, shifted(p, j, -h), psi, eig)?) / (2.0 * h);
            e1 = e1.max((fd - &d1[i]).norm());
        }
        first.push(e1);
        let mut e2: f64 = 0.0;
        for (j, jp, an) in &pairs {
            let fd = if j == jp {
                (psi_at(model, shifted(p, *j, h), psi, eig)? - psi * 2.0 + psi_at(model, shifted(p, *j, -h), psi, eig)?) / (h * h)
            } else {
                let at = |sa: f64, sb: f64| psi_at(model, shifted(shifted(p, *j, sa * h), *jp, sb * h), psi, eig);
                (at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h)
            };
            e2 = e2.max((fd - an).norm());
        }
        second.push(e2);
    }
    Ok(DerivativeCheck {
        steps: steps.to_vec(),
        first,
        second,
        first_scale,
        second_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::MomentumGrid;
    use crate::nelson::{solve_ground_state, GradientOptions};

    #[test]
    fn finite_differences_converge_at_second_order() {
        let grid = MomentumGrid::shells(0.05, 1.0, 1).unwrap();
        let m = NelsonModel::new(NelsonParams::default().with_lambda(0.2), grid, 3).unwrap();
        let gs = solve_ground_state(&m, GradientOptions::default(), LanczosOptions::default()).unwrap();
        let c = check_psi_derivatives(&m, &gs, &[0, 2], &[1e-2, 5e-3, 2.5e-3], LanczosOptions::default(), CgOptions::default()).unwrap();
        for o in c.first_orders().iter().chain(c.second_orders().iter()) {
            assert!((o - 2.0).abs() < 0.1, "{c:?}");
        }
        assert!(c.first[2] < 1e-4 * c.first_scale.max(1.0));
    }

    #[test]
    fn normalization_constraints() {
        let grid = MomentumGrid::shells(0.05, 1.0, 1).unwrap();
        let m = NelsonModel::new(NelsonParams::default(), grid, 3).unwrap();
        let gs = solve_ground_state(&m, GradientOptions::default(), LanczosOptions::default()).unwrap();
        let cg = CgOptions::default();
        let d0 = dpsi(&m, &gs, 0, cg).unwrap();
        assert!(gs.psi().dot(&d0).abs() < 1e-12);
        let d00 = d2psi(&m, &gs, 0, 0, cg).unwrap();
        assert!((gs.psi().dot(&d00) + d0.norm_squared()).abs() < 1e-12);
    }
}
