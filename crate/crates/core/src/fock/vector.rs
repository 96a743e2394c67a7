use std::sync::Arc;

use nalgebra::DVector;

use super::basis::FockBasis;
use super::grid::MomentumGrid;
use crate::error::{Error, Result};

/// Amplitudes on a shared basis. Amplitudes are real: every operator built
/// in this crate is real symmetric in the occupation basis.
#[derive(Debug, Clone)]
pub struct FockVector {
    basis: Arc<FockBasis>,
    coeffs: DVector<f64>,
}

impl FockVector {
    pub fn new(basis: Arc<FockBasis>, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                level: basis.n_max(),
                expected: basis.dim(),
                got: coeffs.len(),
            });
        }
        if !coeffs.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "coeffs",
                reason: "non-finite amplitude".into(),
            });
        }
        Ok(Self { basis, coeffs })
    }

    pub fn vacuum(basis: Arc<FockBasis>) -> Self {
        let coeffs = basis.vacuum();
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<f64> {
        self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn inner(&self, other: &FockVector) -> f64 {
        self.coeffs.dot(&other.coeffs)
    }

    /// Amplitude of the given occupation vector (zero if outside the basis).
    pub fn amplitude(&self, occ: &[u8]) -> f64 {
        self.basis.index_of(occ).map_or(0.0, |i| self.coeffs[i])
    }

    fn with(&self, coeffs: DVector<f64>) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            coeffs,
        }
    }

    pub fn annihilate(&self, j: usize) -> Result<Self> {
        Ok(self.with(self.basis.annihilate(j, &self.coeffs)?))
    }

    pub fn create(&self, j: usize) -> Result<Self> {
        Ok(self.with(self.basis.create(j, &self.coeffs)?))
    }

    /// `(H_f v, [P_f^1 v, P_f^2 v, P_f^3 v])`.
    pub fn field_ops(&self, grid: &MomentumGrid) -> Result<(Self, [Self; 3])> {
        let hf = self.basis.hf_diag(grid)?;
        let pf = self.basis.pf_diag(grid)?;
        let h = self.with(DVector::from_fn(hf.len(), |i, _| hf[i] * self.coeffs[i]));
        let p = [0, 1, 2].map(|c| self.with(DVector::from_fn(pf.len(), |i, _| pf[i][c] * self.coeffs[i])));
        Ok((h, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expected_energy_matches_occupation_sum() {
        let grid = MomentumGrid::shells(0.1, 1.0, 1).unwrap();
        let basis = Arc::new(FockBasis::new(6, 3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = FockVector::new(
            Arc::clone(&basis),
            DVector::from_fn(basis.dim(), |_, _| rng.gen_range(-1.0..1.0)),
        )
        .unwrap();
        let (h, p) = v.field_ops(&grid).unwrap();
        let mut e = 0.0;
        let mut mom = [0.0; 3];
        for i in 0..basis.dim() {
            for (j, &n) in basis.state(i).iter().enumerate() {
                let a2 = v.coeffs()[i].powi(2) * n as f64;
                e += a2 * grid.norm(j);
                for c in 0..3 {
                    mom[c] += a2 * grid.k(j)[c];
                }
            }
        }
        assert!((v.inner(&h) - e).abs() < 1e-12 * e);
        for c in 0..3 {
            assert!((v.inner(&p[c]) - mom[c]).abs() < 1e-12);
        }
        let vac = FockVector::vacuum(basis);
        assert_eq!(vac.field_ops(&grid).unwrap().0.norm(), 0.0);
        assert_eq!(vac.annihilate(0).unwrap().norm(), 0.0);
    }
}
