//! Finite momentum grids with quadrature weights.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One grid point: momentum `k` and weight `w`, so that
/// `int d^3k F(k) ~ sum_j w_j F(k_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: [f64; 3],
    pub w: f64,
}

impl Mode {
    pub fn norm(&self) -> f64 {
        norm3(&self.k)
    }
}

pub fn norm3(k: &[f64; 3]) -> f64 {
    dot3(k, k).sqrt()
}

pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Octahedron vertices, the default direction design.
pub const OCTAHEDRON: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    modes: Vec<Mode>,
}

impl MomentumGrid {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        for (j, m) in modes.iter().enumerate() {
            if !(m.norm() > 0.0) || !m.k.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidParameter {
                    field: "grid",
                    reason: format!("mode {j} has |k| = {}", m.norm()),
                });
            }
            if !(m.w > 0.0) || !m.w.is_finite() {
                return Err(Error::InvalidParameter {
                    field: "grid",
                    reason: format!("mode {j} has weight {}", m.w),
                });
            }
            if modes[..j].iter().any(|o| o.k == m.k) {
                return Err(Error::InvalidParameter {
                    field: "grid",
                    reason: format!("mode {j} duplicates an earlier mode"),
                });
            }
        }
        Ok(Self { modes })
    }

    /// Spherical shells between `sigma` and `kappa` with geometric radial
    /// edges and octahedral directions. Each shell's volume is split evenly
    /// among its six modes. The mode radius `r` satisfies
    /// `r^3 = (hi^3 - lo^3) / (3 ln(hi / lo))`, which makes the quadrature of
    /// `1 / |k|^3` exact on every shell.
    pub fn shells(sigma: f64, kappa: f64, n_shells: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma < kappa) {
            return Err(Error::InvalidParameter {
                field: "grid",
                reason: format!("need 0 < sigma < kappa, got sigma={sigma}, kappa={kappa}"),
            });
        }
        if n_shells == 0 {
            return Err(Error::InvalidParameter {
                field: "grid",
                reason: "at least one shell".into(),
            });
        }
        let ratio = (kappa / sigma).powf(1.0 / n_shells as f64);
        let mut modes = Vec::with_capacity(6 * n_shells);
        for s in 0..n_shells {
            let lo = sigma * ratio.powi(s as i32);
            let hi = if s + 1 == n_shells { kappa } else { lo * ratio };
            let r = ((hi.powi(3) - lo.powi(3)) / (3.0 * (hi / lo).ln())).cbrt();
            let w = 4.0 * std::f64::consts::PI * (hi.powi(3) - lo.powi(3)) / 3.0 / 6.0;
            for d in OCTAHEDRON {
                modes.push(Mode {
                    k: [r * d[0], r * d[1], r * d[2]],
                    w,
                });
            }
        }
        Self::new(modes)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, j: usize) -> Result<&Mode> {
        self.modes.get(j).ok_or(Error::ModeOutOfRange {
            mode: j,
            modes: self.modes.len(),
        })
    }

    pub fn k(&self, j: usize) -> [f64; 3] {
        self.modes[j].k
    }

    pub fn w(&self, j: usize) -> f64 {
        self.modes[j].w
    }

    pub fn norm(&self, j: usize) -> f64 {
        self.modes[j].norm()
    }

    /// One mode per line, `kx ky kz w`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for m in &self.modes {
            let _ = writeln!(s, "{:e} {:e} {:e} {:e}", m.k[0], m.k[1], m.k[2], m.w);
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut modes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("grid line {}: {e}", lineno + 1)))?;
            if vals.len() != 4 {
                return Err(Error::Parse(format!(
                    "grid line {}: expected 4 numbers, got {}",
                    lineno + 1,
                    vals.len()
                )));
            }
            modes.push(Mode {
                k: [vals[0], vals[1], vals[2]],
                w: vals[3],
            });
        }
        Self::new(modes)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_grid_shape() {
        let g = MomentumGrid::shells(0.05, 1.0, 2).unwrap();
        assert_eq!(g.len(), 12);
        let total: f64 = g.modes().iter().map(|m| m.w).sum();
        let ball = 4.0 * PI / 3.0 * (1.0 - 0.05f64.powi(3));
        assert!((total - ball).abs() < 1e-14);
        assert!(g.modes().iter().all(|m| m.norm() > 0.05 && m.norm() < 1.0));
    }

    #[test]
    fn inverse_cube_quadrature_exact() {
        let (s, k) = (0.01, 1.0);
        let g = MomentumGrid::shells(s, k, 5).unwrap();
        let q: f64 = g.modes().iter().map(|m| m.w / m.norm().powi(3)).sum();
        let exact = 4.0 * PI * (k / s).ln();
        assert!((q - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn text_round_trip() {
        let g = MomentumGrid::shells(0.05, 1.0, 3).unwrap();
        assert_eq!(MomentumGrid::parse_text(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn rejects_bad_modes() {
        assert!(MomentumGrid::parse_text("0 0 0 1").is_err());
        assert!(MomentumGrid::parse_text("1 0 0 -1").is_err());
        assert!(MomentumGrid::parse_text("1 0 0 1\n1 0 0 2").is_err());
        assert!(MomentumGrid::parse_text("1 0 0").is_err());
        assert!(MomentumGrid::shells(1.0, 1.0, 2).is_err());
    }
}
