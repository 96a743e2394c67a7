//! Shifted resolvents `(H_{P-q} - E + offset)^{-1}` and the operators `Lambda`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::ground::GroundStateResult;
use super::model::NelsonModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projector {
    None,
    /// Solve on the orthogonal complement of the ground state.
    QPerp,
}

/// `(H_{P - shift} - E + offset)^{-1}`, optionally restricted to `Q^perp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventSpec {
    pub shift: [f64; 3],
    pub offset: f64,
    pub projector: Projector,
}

impl ResolventSpec {
    /// `R_{P; k_1..k_i}`: shift by the partial momentum sum, offset by the partial energy sum.
    pub fn shifted(shift: [f64; 3], energy_sum: f64) -> Self {
        Self {
            shift,
            offset: energy_sum,
            projector: Projector::None,
        }
    }

    /// `R(Delta)` on `Q^perp`.
    pub fn reduced(delta: f64) -> Self {
        Self {
            shift: [0.0; 3],
            offset: delta,
            projector: Projector::QPerp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgOptions {
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest admissible lower bound on the operator.
    pub singular_threshold: f64,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_iter: 5000,
            singular_threshold: 1e-10,
        }
    }
}

fn deflate(x: &mut DVector<f64>, psi: Option<&DVector<f64>>) {
    if let Some(p) = psi {
        let c = p.dot(x);
        x.axpy(-c, p, 1.0);
    }
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite operator, optionally on the complement of a unit vector.
pub fn cg_solve(
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    diag: &[f64],
    rhs: &DVector<f64>,
    project: Option<&DVector<f64>>,
    opts: CgOptions,
) -> Result<DVector<f64>> {
    let mut b = rhs.clone();
    deflate(&mut b, project);
    let bnorm = b.norm();
    let mut x = DVector::zeros(b.len());
    if bnorm == 0.0 {
        return Ok(x);
    }
    let precond = |r: &DVector<f64>| {
        let mut z = DVector::from_fn(r.len(), |i, _| r[i] / diag[i]);
        deflate(&mut z, project);
        z
    };
    let op = |v: &DVector<f64>| {
        let mut y = apply(v);
        deflate(&mut y, project);
        y
    };
    let mut r = b;
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for it in 0..opts.max_iter {
        let ap = op(&p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(Error::NearSingular {
                shift: pap / p.norm_squared(),
                threshold: opts.singular_threshold,
            });
        }
        let a = rz / pap;
        x.axpy(a, &p, 1.0);
        r.axpy(-a, &ap, 1.0);
        if r.norm() <= opts.tol * bnorm {
            // one explicit residual check guards against drift of the recursion
            let mut true_r = rhs.clone();
            deflate(&mut true_r, project);
            true_r -= op(&x);
            if true_r.norm() <= 10.0 * opts.tol * bnorm || it + 1 == opts.max_iter {
                deflate(&mut x, project);
                return Ok(x);
            }
            r = true_r;
        }
        z = precond(&r);
        let rz_new = r.dot(&z);
        p = &z + &p * (rz_new / rz);
        rz = rz_new;
    }
    Err(Error::SolveNotConverged {
        iterations: opts.max_iter,
        residual: r.norm() / bnorm,
    })
}

/// Solves `(H_{P - q} - E + offset) x = rhs` on the basis prefix `rhs.len()`.
pub fn resolvent_solve(
    model: &NelsonModel,
    gs: &GroundStateResult,
    spec: ResolventSpec,
    rhs: &DVector<f64>,
    opts: CgOptions,
) -> Result<DVector<f64>> {
    model.check_dim(rhs.len())?;
    let d = rhs.len();
    let project = match spec.projector {
        Projector::None => {
            if spec.shift == [0.0; 3] && spec.offset <= opts.singular_threshold {
                return Err(Error::NearSingular {
                    shift: spec.offset,
                    threshold: opts.singular_threshold,
                });
            }
            None
        }
        Projector::QPerp => {
            if d != model.dim() {
                return Err(Error::DimensionMismatch {
                    level: model.n_max(),
                    expected: model.dim(),
                    got: d,
                });
            }
            if spec.offset + gs.state.gap <= opts.singular_threshold {
                return Err(Error::NearSingular {
                    shift: spec.offset + gs.state.gap,
                    threshold: opts.singular_threshold,
                });
            }
            Some(gs.psi())
        }
    };
    let diag = model.diagonal(model.shifted_p(spec.shift), spec.offset - gs.energy(), d);
    if let Some(&m) = diag.iter().min_by(|a, b| a.total_cmp(b)) {
        if m <= 0.0 && project.is_none() {
            return Err(Error::NearSingular {
                shift: m,
                threshold: opts.singular_threshold,
            });
        }
    }
    let pre: Vec<f64> = diag.iter().map(|&v| v.max(opts.singular_threshold.max(1e-3))).collect();
    cg_solve(|x| model.apply_with_diagonal(&diag, x), &pre, rhs, project, opts)
}

/// Component `c` of `Lambda + s = grad E - (P - P_f) + s` applied to `x`.
pub fn lambda_component(
    model: &NelsonModel,
    gs: &GroundStateResult,
    c: usize,
    s: [f64; 3],
    x: &DVector<f64>,
) -> DVector<f64> {
    let base = gs.grad_e[c] - gs.p[c] + s[c];
    let pf = model.pf();
    DVector::from_fn(x.len(), |i, _| (base + pf[i][c]) * x[i])
}

/// `(Lambda + s) x`, all three components.
pub fn lambda_apply(
    model: &NelsonModel,
    gs: &GroundStateResult,
    s: [f64; 3],
    x: &DVector<f64>,
) -> [DVector<f64>; 3] {
    [0, 1, 2].map(|c| lambda_component(model, gs, c, s, x))
}

/// `g . (Lambda + s) x` for a fixed 3-vector `g`.
pub fn lambda_dot(
    model: &NelsonModel,
    gs: &GroundStateResult,
    g: [f64; 3],
    s: [f64; 3],
    x: &DVector<f64>,
) -> DVector<f64> {
    let base: f64 = (0..3).map(|c| g[c] * (gs.grad_e[c] - gs.p[c] + s[c])).sum();
    let pf = model.pf();
    DVector::from_fn(x.len(), |i, _| {
        (base + g[0] * pf[i][0] + g[1] * pf[i][1] + g[2] * pf[i][2]) * x[i]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::MomentumGrid;
    use crate::nelson::{solve_ground_state, GradientOptions, LanczosOptions, NelsonParams};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (NelsonModel, GroundStateResult) {
        let grid = MomentumGrid::shells(0.05, 1.0, 1).unwrap();
        let m = NelsonModel::new(NelsonParams::default().with_lambda(0.3), grid, 3).unwrap();
        let gs = solve_ground_state(&m, GradientOptions::default(), LanczosOptions::default()).unwrap();
        (m, gs)
    }

    fn dense_inverse(m: &NelsonModel, gs: &GroundStateResult, q: [f64; 3], off: f64, d: usize) -> DMatrix<f64> {
        m.dense(q, off - gs.energy(), d).try_inverse().unwrap()
    }

    #[test]
    fn eigen_relation() {
        let (m, gs) = setup();
        let x = resolvent_solve(&m, &gs, ResolventSpec::shifted([0.0; 3], 1.0), gs.psi(), CgOptions::default()).unwrap();
        assert!((x - gs.psi()).norm() < 1e-12);
    }

    #[test]
    fn matches_dense_inverse_on_prefix() {
        let (m, gs) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = [0.2, 0.1, 0.0];
        for d in [m.dim(), m.basis().prefix_dim(2)] {
            let rhs = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let x = resolvent_solve(&m, &gs, ResolventSpec::shifted(q, 0.25), &rhs, CgOptions::default()).unwrap();
            let want = dense_inverse(&m, &gs, q, 0.25, d) * &rhs;
            assert!((x - &want).norm() < 1e-11 * want.norm());
        }
    }

    #[test]
    fn reduced_resolvent_at_zero() {
        let (m, gs) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rhs = DVector::from_fn(m.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let x = resolvent_solve(&m, &gs, ResolventSpec::reduced(0.0), &rhs, CgOptions::default()).unwrap();
        assert!(gs.psi().dot(&x).abs() < 1e-12);
        let mut proj = rhs.clone();
        proj.axpy(-gs.psi().dot(&rhs), gs.psi(), 1.0);
        let back = m.apply([0.0; 3], -gs.energy(), &x);
        assert!((back - proj).norm() < 1e-10);
        assert!(resolvent_solve(&m, &gs, ResolventSpec::shifted([0.0; 3], 0.0), &rhs, CgOptions::default()).is_err());
    }

    #[test]
    fn lambda_basics() {
        let (m, gs) = setup();
        let vac = m.basis().vacuum();
        let l = lambda_apply(&m, &gs, [0.0; 3], &vac);
        for c in 0..3 {
            assert!((l[c][0] - (gs.grad_e[c] - gs.p[c])).abs() < 1e-15);
            // <psi, Lambda psi> = 0
            let e = gs.psi().dot(&lambda_component(&m, &gs, c, [0.0; 3], gs.psi()));
            assert!(e.abs() < 1e-9, "c={c}: {e}");
        }
        let g = [0.3, -1.0, 2.0];
        let s = [0.1, 0.2, 0.3];
        let dot = lambda_dot(&m, &gs, g, s, gs.psi());
        let comps = lambda_apply(&m, &gs, s, gs.psi());
        let want = &comps[0] * g[0] + &comps[1] * g[1] + &comps[2] * g[2];
        assert!((dot - want).norm() < 1e-14);
    }
}
