//! Fixtures shared by the benches.

use nelson_core::fock::MomentumGrid;
use nelson_core::nalgebra::{DMatrix, DVector};
use nelson_core::nelson::{solve_ground_state, GradientOptions, GroundStateResult, LanczosOptions, NelsonModel, NelsonParams};
use nelson_core::recurrence::{RecurrenceProblem, UniformOps};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random `dim x dim` pair with entries in `[-1, 1)`.
pub fn random_problem(dim: usize, seed: u64) -> RecurrenceProblem<f64, UniformOps<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = || DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let ops = UniformOps::new(m(), m()).expect("square");
    RecurrenceProblem::new(ops, DVector::from_element(dim, 1.0)).expect("matching dims")
}

/// Default parameters on `shells` octahedral shells.
pub fn desk_model(shells: usize, n_max: usize) -> NelsonModel {
    let p = NelsonParams::default();
    let grid = MomentumGrid::shells(p.sigma, p.kappa, shells).expect("valid shells");
    NelsonModel::new(p, grid, n_max).expect("valid model")
}

pub fn solved(model: &NelsonModel) -> GroundStateResult {
    solve_ground_state(model, GradientOptions::default(), LanczosOptions::default()).expect("ground state")
}
