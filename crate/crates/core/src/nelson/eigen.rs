//! Lowest eigenpairs of symmetric operators given as matrix-vector products.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Absolute residual target `||A x - theta x||`.
    pub tol: f64,
    /// Krylov dimension per cycle.
    pub krylov: usize,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            krylov: 60,
            max_restarts: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn orthogonalize(w: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(w);
            w.axpy(-c, q, 1.0);
        }
    }
}

/// Lowest eigenpair of the symmetric map `apply` by restarted Lanczos with
/// full reorthogonalization. `deflate` vectors (orthonormal) are projected
/// out of every Krylov vector.
pub fn lanczos_lowest(
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    start: DVector<f64>,
    deflate: &[DVector<f64>],
    opts: LanczosOptions,
) -> Result<Eigenpair> {
    let n = start.len();
    let mut x = start;
    orthogonalize(&mut x, deflate);
    let mut iterations = 0;
    let mut last_residual = f64::INFINITY;
    for _ in 0..=opts.max_restarts {
        let nx = x.norm();
        if nx == 0.0 {
            return Err(Error::EigenNotConverged {
                iterations,
                residual: f64::NAN,
            });
        }
        x /= nx;
        let k = opts.krylov.min(n.saturating_sub(deflate.len())).max(1);
        let mut qs: Vec<DVector<f64>> = Vec::with_capacity(k);
        let mut aqs: Vec<DVector<f64>> = Vec::with_capacity(k);
        qs.push(x.clone());
        for j in 0..k {
            let aq = apply(&qs[j]);
            iterations += 1;
            let mut w = aq.clone();
            aqs.push(aq);
            let before = w.norm();
            for _ in 0..2 {
                orthogonalize(&mut w, &qs);
                orthogonalize(&mut w, deflate);
            }
            let b = w.norm();
            if j + 1 == k || b <= 1e-14 * before {
                break;
            }
            qs.push(w / b);
        }
        // Rayleigh-Ritz on the full projection; after a near breakdown the
        // basis is no longer a three-term Krylov basis.
        let m = qs.len();
        let mut t = DMatrix::from_fn(m, m, |r, c| qs[r].dot(&aqs[c]));
        t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let imin = eig.eigenvalues.imin();
        let s = eig.eigenvectors.column(imin);
        let mut y = DVector::zeros(n);
        for (q, c) in qs.iter().zip(s.iter()) {
            y.axpy(*c, q, 1.0);
        }
        orthogonalize(&mut y, deflate);
        y /= y.norm();
        let ay = apply(&y);
        iterations += 1;
        let theta = y.dot(&ay);
        let mut r = ay - &y * theta;
        orthogonalize(&mut r, deflate);
        let residual = r.norm();
        if residual <= opts.tol {
            return Ok(Eigenpair {
                value: theta,
                vector: y,
                residual,
                iterations,
            });
        }
        last_residual = residual;
        x = y;
    }
    Err(Error::EigenNotConverged {
        iterations,
        residual: last_residual,
    })
}

/// Deterministic start vector with generic overlap on every basis state.
pub fn generic_vector(n: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| ((i as f64 + 1.0) * 0.618_033_988_749_895).fract() - 0.5)
}
