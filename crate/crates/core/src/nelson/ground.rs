use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::eigen::{generic_vector, lanczos_lowest, LanczosOptions};
use super::model::NelsonModel;
use super::params::MOMENTUM_BOUND;
use crate::error::{Error, Result};
use crate::fock::norm3;

/// Lowest eigenpair of `H_P` with the sign fixed by `<Omega, psi> > 0`.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub psi: DVector<f64>,
    /// Distance to the second eigenvalue.
    pub gap: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Ground state together with the energy gradient (and optionally Hessian) in `P`.
#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub p: [f64; 3],
    pub state: GroundState,
    pub grad_e: [f64; 3],
    pub hess_e: Option<[[f64; 3]; 3]>,
}

impl GroundStateResult {
    pub fn energy(&self) -> f64 {
        self.state.energy
    }

    pub fn psi(&self) -> &DVector<f64> {
        &self.state.psi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientOptions {
    pub h: f64,
    /// Combine steps `h` and `h/2` to cancel the `h^2` error.
    pub richardson: bool,
    pub hessian: bool,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self {
            h: 1e-3,
            richardson: true,
            hessian: false,
        }
    }
}

fn fix_sign(psi: &mut DVector<f64>) {
    if psi[0] < 0.0 {
        psi.neg_mut();
    }
}

/// Iterative ground state of `H_P` for the model's own `P`.
pub fn ground_state(model: &NelsonModel, opts: LanczosOptions) -> Result<GroundState> {
    let d = model.dim();
    let diag = model.diagonal(model.params().p, 0.0, d);
    let apply = |x: &DVector<f64>| model.apply_with_diagonal(&diag, x);
    let mut start = model.basis().vacuum();
    start += generic_vector(d) * 1e-3;
    let mut pair = lanczos_lowest(apply, start, &[], opts)?;
    fix_sign(&mut pair.vector);
    let gap = if d > 1 {
        let second = lanczos_lowest(
            apply,
            generic_vector(d),
            std::slice::from_ref(&pair.vector),
            LanczosOptions {
                tol: opts.tol.max(1e-9),
                ..opts
            },
        )?;
        second.value - pair.value
    } else {
        f64::INFINITY
    };
    Ok(GroundState {
        energy: pair.value,
        psi: pair.vector,
        gap,
        residual: pair.residual,
        iterations: pair.iterations,
    })
}

/// Dense-diagonalization ground state; the reference for the iterative solver.
pub fn dense_ground_state(model: &NelsonModel) -> Result<GroundState> {
    let d = model.dim();
    if d > 4000 {
        return Err(Error::InvalidParameter {
            field: "n_max",
            reason: format!("dense diagonalization limited to dimension 4000, got {d}"),
        });
    }
    let h = model.dense([0.0; 3], 0.0, d);
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut psi = eig.eigenvectors.column(order[0]).into_owned();
    fix_sign(&mut psi);
    let energy = eig.eigenvalues[order[0]];
    let residual = (&h * &psi - &psi * energy).norm();
    Ok(GroundState {
        energy,
        gap: if d > 1 { eig.eigenvalues[order[1]] - energy } else { f64::INFINITY },
        psi,
        residual,
        iterations: 0,
    })
}

fn energy_at(model: &NelsonModel, p: [f64; 3], opts: LanczosOptions) -> Result<f64> {
    if norm3(&p) >= MOMENTUM_BOUND {
        return Err(Error::StepOutsideDomain {
            step: norm3(&p) - norm3(&model.params().p),
        });
    }
    let shifted = model.with_params(model.params().with_p(p))?;
    let d = shifted.dim();
    let diag = shifted.diagonal(p, 0.0, d);
    let mut start = shifted.basis().vacuum();
    start += generic_vector(d) * 1e-3;
    Ok(lanczos_lowest(|x| shifted.apply_with_diagonal(&diag, x), start, &[], opts)?.value)
}

fn offset(p: [f64; 3], c: usize, h: f64) -> [f64; 3] {
    let mut q = p;
    q[c] += h;
    q
}

/// Central-difference gradient of `E_P`, optionally Richardson-extrapolated.
pub fn grad_energy(model: &NelsonModel, opts: GradientOptions, eig: LanczosOptions) -> Result<[f64; 3]> {
    let p = model.params().p;
    let central = |h: f64| -> Result<[f64; 3]> {
        let mut g = [0.0; 3];
        for (c, gc) in g.iter_mut().enumerate() {
            let ep = energy_at(model, offset(p, c, h), eig)?;
            let em = energy_at(model, offset(p, c, -h), eig)?;
            *gc = (ep - em) / (2.0 * h);
        }
        Ok(g)
    };
    let g1 = central(opts.h)?;
    if !opts.richardson {
        return Ok(g1);
    }
    let g2 = central(opts.h / 2.0)?;
    Ok([0, 1, 2].map(|c| (4.0 * g2[c] - g1[c]) / 3.0))
}

/// Second derivatives of `E_P` by central differences with step `h`.
pub fn hessian_energy(model: &NelsonModel, h: f64, eig: LanczosOptions) -> Result<[[f64; 3]; 3]> {
    let p = model.params().p;
    let e0 = energy_at(model, p, eig)?;
    let mut hess = [[0.0; 3]; 3];
    for a in 0..3 {
        let ep = energy_at(model, offset(p, a, h), eig)?;
        let em = energy_at(model, offset(p, a, -h), eig)?;
        hess[a][a] = (ep - 2.0 * e0 + em) / (h * h);
        for b in 0..a {
            let e = |sa: f64, sb: f64| energy_at(model, offset(offset(p, a, sa * h), b, sb * h), eig);
            let v = (e(1.0, 1.0)? - e(1.0, -1.0)? - e(-1.0, 1.0)? + e(-1.0, -1.0)?) / (4.0 * h * h);
            hess[a][b] = v;
            hess[b][a] = v;
        }
    }
    Ok(hess)
}

/// Ground state plus gradient (and Hessian on request) at the model's `P`.
pub fn solve_ground_state(
    model: &NelsonModel,
    grad: GradientOptions,
    eig: LanczosOptions,
) -> Result<GroundStateResult> {
    let state = ground_state(model, eig)?;
    let grad_e = grad_energy(model, grad, eig)?;
    let hess_e = if grad.hessian {
        Some(hessian_energy(model, grad.h * 10.0, eig)?)
    } else {
        None
    };
    Ok(GroundStateResult {
        p: model.params().p,
        state,
        grad_e,
        hess_e,
    })
}
