use serde::{Deserialize, Serialize};

use super::params::NelsonParams;
use crate::error::{Error, Result};
use crate::fock::{dot3, norm3, MomentumGrid};

/// `f(k) = v(k) / (|k| alpha(k))`, `g(k) = f(k) k`, `alpha(k) = 1 - k_hat . grad E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dressing {
    pub alpha: f64,
    pub f: f64,
    pub g: [f64; 3],
}

pub fn dressing_at(params: &NelsonParams, grad_e: [f64; 3], k: &[f64; 3], mode: usize) -> Result<Dressing> {
    let r = norm3(k);
    let alpha = 1.0 - dot3(k, &grad_e) / r;
    if !(alpha > 0.0) {
        return Err(Error::DressingUndefined { mode, alpha });
    }
    let f = params.form_factor(k) / (r * alpha);
    Ok(Dressing {
        alpha,
        f,
        g: [f * k[0], f * k[1], f * k[2]],
    })
}

/// Dressing functions at every grid mode.
pub fn dressing_functions(params: &NelsonParams, grad_e: [f64; 3], grid: &MomentumGrid) -> Result<Vec<Dressing>> {
    grid.modes()
        .iter()
        .enumerate()
        .map(|(j, m)| dressing_at(params, grad_e, &m.k, j))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_identity() {
        let p = NelsonParams::default().with_lambda(0.2);
        let grid = MomentumGrid::shells(0.05, 1.0, 3).unwrap();
        let grad = [0.09, 0.01, -0.02];
        let d = dressing_functions(&p, grad, &grid).unwrap();
        for (m, dj) in grid.modes().iter().zip(&d) {
            let lhs = (m.norm() - dot3(&grad, &m.k)) * dj.f;
            assert!((lhs - p.form_factor(&m.k)).abs() < 1e-14);
        }
    }

    #[test]
    fn support_and_free_limit() {
        let p = NelsonParams::default();
        let below = dressing_at(&p, [0.1, 0.0, 0.0], &[0.01, 0.0, 0.0], 0).unwrap();
        assert_eq!(below.f, 0.0);
        let free = dressing_at(&p.with_lambda(0.0), [0.1, 0.0, 0.0], &[0.3, 0.0, 0.0], 0).unwrap();
        assert_eq!(free.f, 0.0);
        assert!(dressing_at(&p, [1.5, 0.0, 0.0], &[0.3, 0.0, 0.0], 4).is_err());
    }
}
