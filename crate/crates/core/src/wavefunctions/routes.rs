//! The three routes to the n-photon wave functions: direct contraction of
//! the ground state, the resolvent-product formula, and the
//! contraction-pattern formula for the dressed vectors.

use itertools::Itertools;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::tuple::MomentumTuple;
use crate::error::{Error, Result};
use crate::fock::dot3;
use crate::nelson::{
    dressing_at, lambda_dot, resolvent_solve, CgOptions, Dressing, GroundStateResult, NelsonModel,
    ResolventSpec,
};
use crate::recurrence::{enumerate_patterns, ContractionPattern, Convention};

/// Basis on which the resolvent at step `i` is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Truncation {
    /// Every resolvent acts on the full truncated space.
    Uniform,
    /// Step `i` acts on the sectors with at most `N_max - i` photons, matching
    /// the photon count that `i` annihilations leave behind.
    Graded,
}

/// Sign flips of individual prefactors, for mutation testing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutations {
    /// `(-1)^l` in the pattern sum.
    pub flip_ell_sign: bool,
    /// `1 / 2^l` in the pattern sum.
    pub flip_half_power: bool,
    /// `(-1)^n` in the resolvent-product formula.
    pub flip_froehlich_sign: bool,
    /// The leading minus of `F(k~, k) = -g(k~) . (...)`.
    pub flip_f_sign: bool,
}

impl Mutations {
    pub fn any(&self) -> bool {
        self.flip_ell_sign || self.flip_half_power || self.flip_froehlich_sign || self.flip_f_sign
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteOptions {
    pub truncation: Truncation,
    pub cg: CgOptions,
    pub mutations: Mutations,
}

impl Default for RouteOptions {
    fn default() -> Self {
        Self {
            truncation: Truncation::Uniform,
            cg: CgOptions::default(),
            mutations: Mutations::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Direct,
    Froehlich,
    Novel,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Froehlich => "froehlich",
            Method::Novel => "novel",
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// A solved model together with the options used to evaluate wave functions.
#[derive(Debug, Clone, Copy)]
pub struct WaveFunctions<'a> {
    pub model: &'a NelsonModel,
    pub gs: &'a GroundStateResult,
    pub opts: RouteOptions,
}

impl<'a> WaveFunctions<'a> {
    pub fn new(model: &'a NelsonModel, gs: &'a GroundStateResult, opts: RouteOptions) -> Self {
        Self { model, gs, opts }
    }

    pub fn psi(&self) -> &DVector<f64> {
        self.gs.psi()
    }

    pub fn dressing(&self, k: &[f64; 3]) -> Result<Dressing> {
        dressing_at(self.model.params(), self.gs.grad_e, k, usize::MAX)
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n > self.model.n_max() {
            return Err(Error::InvalidParameter {
                field: "n",
                reason: format!("{n} photons exceed the truncation N_max = {}", self.model.n_max()),
            });
        }
        Ok(())
    }

    /// Length of the working vector after `i` annihilations.
    fn step_dim(&self, i: usize) -> usize {
        match self.opts.truncation {
            Truncation::Uniform => self.model.dim(),
            Truncation::Graded => self.model.basis().prefix_dim(self.model.n_max().saturating_sub(i)),
        }
    }

    fn restrict(&self, x: &DVector<f64>, i: usize) -> DVector<f64> {
        let d = self.step_dim(i).min(x.len());
        x.rows(0, d).into_owned()
    }

    /// `R_{P; k_1..k_i} x`, with `x` first restricted to the step-`i` space.
    pub fn resolvent_step(&self, t: &MomentumTuple, i: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        let rhs = self.restrict(x, i);
        resolvent_solve(
            self.model,
            self.gs,
            ResolventSpec::shifted(t.partial_sum(i), t.partial_abs_sum(i)),
            &rhs,
            self.opts.cg,
        )
    }

    /// `f^n(k_{j_1}, ..., k_{j_n}) = <Omega, b(k_{j_1}) ... b(k_{j_n}) psi> / sqrt(n!)`
    /// on grid modes, with `b(k_j) = b_j / sqrt(w_j)`.
    pub fn direct(&self, modes: &[usize]) -> Result<f64> {
        let basis = self.model.basis();
        let grid = self.model.grid();
        let n = modes.len();
        if n > self.model.n_max() {
            return Ok(0.0);
        }
        let mut occ = vec![0u8; basis.modes()];
        for &j in modes {
            grid.mode(j)?;
            occ[j] += 1;
        }
        // supported only where every form-factor value is nonzero
        if modes.iter().any(|&j| self.model.form_factor()[j] == 0.0) {
            return Ok(0.0);
        }
        let idx = basis.index_of(&occ).expect("within truncation");
        let occ_fact: f64 = occ.iter().map(|&o| factorial(o as usize)).product();
        let w: f64 = modes.iter().map(|&j| grid.w(j)).product();
        Ok(self.psi()[idx] * occ_fact.sqrt() / w.sqrt() / factorial(n).sqrt())
    }

    /// `b_W(k_{j_1}) ... b_W(k_{j_n}) psi` with `b_W(k) = b(k) + f(k)`, on grid modes.
    pub fn direct_dressed(&self, modes: &[usize]) -> Result<DVector<f64>> {
        let basis = self.model.basis();
        let grid = self.model.grid();
        let mut x = self.psi().clone();
        for &j in modes.iter().rev() {
            grid.mode(j)?;
            let f = self.dressing(&grid.k(j))?.f;
            x = basis.annihilate(j, &x)? / grid.w(j).sqrt() + &x * f;
        }
        Ok(x)
    }

    /// `b(k_{j_1}) ... b(k_{j_n}) psi` on grid modes.
    pub fn direct_vector(&self, modes: &[usize]) -> Result<DVector<f64>> {
        let basis = self.model.basis();
        let grid = self.model.grid();
        let mut x = self.psi().clone();
        for &j in modes.iter().rev() {
            x = basis.annihilate(j, &x)? / grid.w(j).sqrt();
        }
        Ok(x)
    }

    /// `sum_pi prod_{i=n..1} R_{pi,i} v(k_{pi(i)}) psi`, the vector whose vacuum
    /// component gives the resolvent-product formula. Equals
    /// `(-1)^n b(k_1) ... b(k_n) psi` summed over orderings.
    pub fn froehlich_vector(&self, t: &MomentumTuple) -> Result<DVector<f64>> {
        let n = t.len();
        self.check_n(n)?;
        let params = self.model.params();
        let v: Vec<f64> = t.momenta().iter().map(|k| params.form_factor(k)).collect();
        let mut total = DVector::zeros(self.step_dim(n));
        if v.iter().any(|&x| x == 0.0) {
            return Ok(total);
        }
        for perm in (0..n).permutations(n) {
            let tp = t.permuted(&perm);
            let mut x = self.psi().clone();
            for i in 1..=n {
                x *= v[perm[i - 1]];
                x = self.resolvent_step(&tp, i, &x)?;
            }
            total += x;
        }
        Ok(total)
    }

    /// `f^n(k_1..k_n) = (1/sqrt(n!)) sum_pi (-1)^n <Omega, prod_{i=n..1} R_{pi,i} v(k_{pi(i)}) psi>`.
    pub fn froehlich(&self, t: &MomentumTuple) -> Result<f64> {
        let n = t.len();
        if n == 0 {
            return Ok(self.psi()[0]);
        }
        let x = self.froehlich_vector(t)?;
        let mut sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        if self.opts.mutations.flip_froehlich_sign {
            sign = -sign;
        }
        Ok(sign * x[0] / factorial(n).sqrt())
    }

    fn g_of(&self, t: &MomentumTuple, i: usize) -> Result<[f64; 3]> {
        Ok(self.dressing(&t.k(i))?.g)
    }

    /// Factor of an uncontracted position `i` (1-based): `R_i (g(k_i) . Lambda_i) x`,
    /// `Lambda_i = Lambda + k_1 + ... + k_{i-1} + k_i / 2`.
    fn uncontracted_step(&self, t: &MomentumTuple, i: usize, g: [f64; 3], x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut shift = t.partial_sum(i - 1);
        let ki = t.k(i - 1);
        for c in 0..3 {
            shift[c] += 0.5 * ki[c];
        }
        let x = self.restrict(x, i);
        let mut y = lambda_dot(self.model, self.gs, g, shift, &x);
        if self.opts.mutations.flip_f_sign {
            y.neg_mut();
        }
        self.resolvent_step(t, i, &y)
    }

    /// `I_C = delta_C alpha(n, ..., 1) psi` with the vector indices of `g`
    /// already contracted: uncontracted position `i` contributes
    /// `R_i g(k_i) . Lambda_i`, a contracted pair `(i-1, i)` contributes
    /// `g(k_{i-1}) . g(k_i) R_i`. The `g` weights are included.
    pub fn compute_i_pattern(&self, pattern: &ContractionPattern, t: &MomentumTuple) -> Result<DVector<f64>> {
        let n = t.len();
        if pattern.n() != n {
            return Err(Error::InvalidPattern {
                n,
                indices: pattern.indices().to_vec(),
                reason: "pattern length differs from tuple length",
            });
        }
        let shifted = pattern.with_convention(Convention::Shifted);
        let tops: Vec<usize> = shifted.indices().to_vec();
        let mut x = self.psi().clone();
        let mut i = 1;
        while i <= n {
            if tops.contains(&(i + 1)) {
                let gg = dot3(&self.g_of(t, i - 1)?, &self.g_of(t, i)?);
                x = self.resolvent_step(t, i + 1, &(x * gg))?;
                i += 2;
            } else {
                x = self.uncontracted_step(t, i, self.g_of(t, i - 1)?, &x)?;
                i += 1;
            }
        }
        Ok(x)
    }

    /// Same as [`compute_i_pattern`](Self::compute_i_pattern) with every free
    /// vector index expanded into its `3^(n - 2l)` explicit component
    /// assignments.
    pub fn compute_i_pattern_explicit(&self, pattern: &ContractionPattern, t: &MomentumTuple) -> Result<DVector<f64>> {
        let n = t.len();
        let shifted = pattern.with_convention(Convention::Shifted);
        let contracted: Vec<usize> = shifted.doubled();
        let free: Vec<usize> = (1..=n).filter(|p| !contracted.contains(p)).collect();
        let mut total: Option<DVector<f64>> = None;
        for comps in (0..free.len()).map(|_| 0..3usize).multi_cartesian_product() {
            let mut x = self.psi().clone();
            let mut i = 1;
            while i <= n {
                if shifted.indices().contains(&(i + 1)) {
                    let gg = dot3(&self.g_of(t, i - 1)?, &self.g_of(t, i)?);
                    x = self.resolvent_step(t, i + 1, &(x * gg))?;
                    i += 2;
                } else {
                    let slot = free.iter().position(|&p| p == i).expect("free position");
                    let c = comps[slot];
                    let mut unit = [0.0; 3];
                    unit[c] = self.g_of(t, i - 1)?[c];
                    x = self.uncontracted_step(t, i, unit, &x)?;
                    i += 1;
                }
            }
            total = Some(match total {
                Some(acc) => acc + x,
                None => x,
            });
        }
        Ok(total.unwrap_or_else(|| self.psi().clone()))
    }

    fn pattern_prefactor(&self, l: usize) -> f64 {
        let m = &self.opts.mutations;
        let mut sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        if m.flip_ell_sign {
            sign = -sign;
        }
        let mut half = 0.5f64.powi(l as i32);
        if m.flip_half_power {
            half = -half;
        }
        sign * half
    }

    /// `hat f^n = sum_pi sum_l (-1)^l / 2^l sum_{C_l} g_{C_l} I_{C_l}` at the
    /// permuted arguments.
    pub fn novel_hat(&self, t: &MomentumTuple) -> Result<DVector<f64>> {
        let n = t.len();
        self.check_n(n)?;
        if n == 0 {
            return Ok(self.psi().clone());
        }
        let mut total = DVector::zeros(self.step_dim(n));
        for perm in (0..n).permutations(n) {
            let tp = t.permuted(&perm);
            for l in 0..=n / 2 {
                let pre = self.pattern_prefactor(l);
                for pat in enumerate_patterns(n, l, Convention::Shifted) {
                    total += self.compute_i_pattern(&pat, &tp)? * pre;
                }
            }
        }
        Ok(total)
    }

    /// `hat f^n` from the recurrence
    /// `hat f^n = -R_n (sum_i F(k_i, sum of others) hat f^{n-1} + sum_{i<i'} g.g hat f^{n-2})`.
    pub fn novel_hat_recursive(&self, t: &MomentumTuple) -> Result<DVector<f64>> {
        let n = t.len();
        self.check_n(n)?;
        if n == 0 {
            return Ok(self.psi().clone());
        }
        let total_k = t.partial_sum(n);
        let mut acc = DVector::zeros(self.step_dim(n - 1));
        for i in 0..n {
            let others: Vec<usize> = (0..n).filter(|&x| x != i).collect();
            let sub = self.novel_hat_recursive(&t.select(&others))?;
            let ki = t.k(i);
            let mut shift = [0.0; 3];
            for c in 0..3 {
                shift[c] = total_k[c] - ki[c] + 0.5 * ki[c];
            }
            let g = self.g_of(t, i)?;
            // -F(k_i, k) x = g(k_i) . (Lambda + k + k_i / 2) x
            let sub = self.restrict(&sub, n - 1);
            let mut term = lambda_dot(self.model, self.gs, g, shift, &sub);
            if self.opts.mutations.flip_f_sign {
                term.neg_mut();
            }
            acc += self.restrict(&term, n - 1);
        }
        for (i, j) in (0..n).tuple_combinations() {
            let others: Vec<usize> = (0..n).filter(|&x| x != i && x != j).collect();
            let sub = self.novel_hat_recursive(&t.select(&others))?;
            let gg = dot3(&self.g_of(t, i)?, &self.g_of(t, j)?);
            acc -= self.restrict(&sub, n - 1) * gg;
        }
        self.resolvent_step(t, n, &acc)
    }

    /// `f^n = (1/sqrt(n!)) sum_S (-1)^{n-|S|} <Omega, hat f^{|S|}(k_S)> prod_{i not in S} f(k_i)`.
    pub fn novel(&self, t: &MomentumTuple) -> Result<f64> {
        let n = t.len();
        self.check_n(n)?;
        let params = self.model.params();
        if t.momenta().iter().any(|k| params.form_factor(k) == 0.0) {
            return Ok(0.0);
        }
        let f: Vec<f64> = t
            .momenta()
            .iter()
            .map(|k| self.dressing(k).map(|d| d.f))
            .collect::<Result<_>>()?;
        let mut sum = 0.0;
        for size in 0..=n {
            for s in (0..n).combinations(size) {
                let hat = self.novel_hat(&t.select(&s))?;
                let rest: f64 = (0..n).filter(|i| !s.contains(i)).map(|i| f[i]).product();
                let sign = if (n - size) % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * hat[0] * rest;
            }
        }
        Ok(sum / factorial(n).sqrt())
    }

    /// Evaluates one route on a tuple of grid modes.
    pub fn evaluate(&self, method: Method, modes: &[usize]) -> Result<f64> {
        match method {
            Method::Direct => self.direct(modes),
            Method::Froehlich => self.froehlich(&MomentumTuple::from_modes(self.model.grid(), modes)?),
            Method::Novel => self.novel(&MomentumTuple::from_modes(self.model.grid(), modes)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::MomentumGrid;
    use crate::nelson::{solve_ground_state, GradientOptions, LanczosOptions, NelsonParams};
    use proptest::prelude::*;

    fn small_grid() -> MomentumGrid {
        let full = MomentumGrid::shells(0.05, 1.0, 2).unwrap();
        MomentumGrid::new(vec![full.modes()[0].clone(), full.modes()[2].clone(), full.modes()[7].clone()]).unwrap()
    }

    fn solved(lambda: f64, n_max: usize) -> (NelsonModel, GroundStateResult) {
        let m = NelsonModel::new(NelsonParams::default().with_lambda(lambda), small_grid(), n_max).unwrap();
        let gs = solve_ground_state(&m, GradientOptions::default(), LanczosOptions::default()).unwrap();
        (m, gs)
    }

    fn tuples() -> Vec<Vec<usize>> {
        vec![vec![0], vec![2], vec![0, 1], vec![1, 1], vec![0, 1, 2], vec![0, 0, 2], vec![2, 2, 2]]
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn graded_froehlich_matches_direct() {
        let (m, gs) = solved(0.1, 4);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions { truncation: Truncation::Graded, ..Default::default() });
        for t in tuples() {
            let d = wf.direct(&t).unwrap();
            let f = wf.evaluate(Method::Froehlich, &t).unwrap();
            assert!(rel(f, d) < 1e-10, "{t:?}: {f} vs {d}");
        }
    }

    #[test]
    fn novel_matches_froehlich_in_same_truncation() {
        let (m, gs) = solved(0.1, 4);
        for truncation in [Truncation::Uniform] {
            let wf = WaveFunctions::new(&m, &gs, RouteOptions { truncation, ..Default::default() });
            for t in tuples() {
                let f = wf.evaluate(Method::Froehlich, &t).unwrap();
                let n = wf.evaluate(Method::Novel, &t).unwrap();
                assert!(rel(n, f) < 1e-10, "{t:?}: {n} vs {f}");
            }
        }
    }

    #[test]
    fn novel_matches_direct_when_truncation_is_converged() {
        let (m, gs) = solved(0.1, 8);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        for t in tuples() {
            let d = wf.direct(&t).unwrap();
            assert!(rel(wf.evaluate(Method::Novel, &t).unwrap(), d) < 1e-6, "{t:?}");
            assert!(rel(wf.evaluate(Method::Froehlich, &t).unwrap(), d) < 1e-6, "{t:?}");
        }
    }

    #[test]
    fn pattern_sum_matches_recurrence() {
        let (m, gs) = solved(0.1, 4);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        for t in tuples() {
            let tup = MomentumTuple::from_modes(m.grid(), &t).unwrap();
            let a = wf.novel_hat(&tup).unwrap();
            let b = wf.novel_hat_recursive(&tup).unwrap();
            assert!((&a - &b).norm() <= 1e-10 * b.norm(), "{t:?}");
        }
    }

    #[test]
    fn explicit_vector_slots_match_contracted_form() {
        let (m, gs) = solved(0.1, 4);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        let tup = MomentumTuple::new(vec![[0.3, 0.1, -0.2], [-0.1, 0.4, 0.05], [0.2, -0.2, 0.3], [0.1, 0.1, 0.5]]).unwrap();
        for l in 0..=2 {
            for pat in enumerate_patterns(4, l, Convention::Shifted) {
                let a = wf.compute_i_pattern(&pat, &tup).unwrap();
                let b = wf.compute_i_pattern_explicit(&pat, &tup).unwrap();
                assert!((&a - &b).norm() <= 1e-12 * a.norm().max(1e-300), "{pat:?}");
            }
        }
    }

    #[test]
    fn pattern_examples() {
        let (m, gs) = solved(0.1, 4);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        let ks = vec![[0.3, 0.1, -0.2], [-0.1, 0.4, 0.05], [0.2, -0.2, 0.3]];
        let g: Vec<[f64; 3]> = ks.iter().map(|k| wf.dressing(k).unwrap().g).collect();
        let t = MomentumTuple::new(ks.clone()).unwrap();
        let psi = wf.psi().clone();

        let t1 = t.select(&[0]);
        let p1 = ContractionPattern::new(1, vec![], Convention::Shifted).unwrap();
        let half = [0, 1, 2].map(|c| 0.5 * ks[0][c]);
        let want = wf.resolvent_step(&t1, 1, &lambda_dot(&m, &gs, g[0], half, &psi)).unwrap();
        assert!((wf.compute_i_pattern(&p1, &t1).unwrap() - &want).norm() < 1e-14);
        assert!((wf.novel_hat(&t1).unwrap() - &want).norm() < 1e-14);

        let t2 = t.select(&[0, 1]);
        let p2 = ContractionPattern::new(2, vec![2], Convention::Shifted).unwrap();
        let want = wf.resolvent_step(&t2, 2, &(&psi * dot3(&g[0], &g[1]))).unwrap();
        assert!((wf.compute_i_pattern(&p2, &t2).unwrap() - &want).norm() < 1e-14);

        // l = 0, n = 3 as an explicit composition of three solves
        let p0 = ContractionPattern::new(3, vec![], Convention::Shifted).unwrap();
        let mut x = psi.clone();
        for i in 1..=3 {
            let mut s = t.partial_sum(i - 1);
            for c in 0..3 {
                s[c] += 0.5 * ks[i - 1][c];
            }
            x = lambda_dot(&m, &gs, g[i - 1], s, &x);
            x = resolvent_solve(&m, &gs, ResolventSpec::shifted(t.partial_sum(i), t.partial_abs_sum(i)), &x, CgOptions::default()).unwrap();
        }
        let got = wf.compute_i_pattern(&p0, &t).unwrap();
        assert!((&got - &x).norm() <= 1e-10 * x.norm());
    }

    #[test]
    fn free_model_has_no_photons() {
        let (m, gs) = solved(0.0, 3);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        assert!((wf.direct(&[]).unwrap() - 1.0).abs() < 1e-14);
        for t in tuples() {
            for method in [Method::Direct, Method::Froehlich, Method::Novel] {
                assert_eq!(wf.evaluate(method, &t).unwrap(), 0.0, "{method:?} {t:?}");
            }
        }
    }

    #[test]
    fn support_below_sigma_is_exact_zero() {
        let (m, gs) = solved(0.1, 3);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        let t = MomentumTuple::new(vec![[0.3, 0.0, 0.0], [0.0, 0.01, 0.0]]).unwrap();
        assert_eq!(wf.froehlich(&t).unwrap(), 0.0);
        assert_eq!(wf.novel(&t).unwrap(), 0.0);
        let above = MomentumTuple::new(vec![[1.2, 0.0, 0.0]]).unwrap();
        assert_eq!(wf.froehlich(&above).unwrap(), 0.0);
        assert_eq!(wf.novel(&above).unwrap(), 0.0);
    }

    #[test]
    fn n_beyond_truncation_is_rejected_or_zero() {
        let (m, gs) = solved(0.1, 2);
        let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
        assert_eq!(wf.direct(&[0, 0, 0]).unwrap(), 0.0);
        assert!(wf.evaluate(Method::Froehlich, &[0, 0, 0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn routes_are_symmetric(ks in proptest::collection::vec(
            (0.06f64..0.7, 0.0f64..std::f64::consts::PI, 0.0f64..std::f64::consts::TAU), 2..=3)
        ) {
            let (m, gs) = solved(0.1, 3);
            let wf = WaveFunctions::new(&m, &gs, RouteOptions::default());
            let ks: Vec<[f64; 3]> = ks.iter().map(|&(r, th, ph)| [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]).collect();
            let t = MomentumTuple::new(ks).unwrap();
            let n = t.len();
            let f0 = wf.froehlich(&t).unwrap();
            let n0 = wf.novel(&t).unwrap();
            for perm in (0..n).permutations(n) {
                let tp = t.permuted(&perm);
                prop_assert!((wf.froehlich(&tp).unwrap() - f0).abs() <= 1e-12 * f0.abs());
                prop_assert!((wf.novel(&tp).unwrap() - n0).abs() <= 1e-12 * n0.abs());
            }
        }
    }
}
