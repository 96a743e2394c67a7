//! Vector-valued functions of `m` mode arguments, symmetrization, and
//! order-`r` operators acting between them.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `x(k_{j_1}, ..., k_{j_m})` for every tuple of grid indices, each value a
/// vector in an auxiliary space of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    modes: usize,
    arity: usize,
    dim: usize,
    data: Vec<f64>,
}

impl ModeTable {
    pub fn zeros(modes: usize, arity: usize, dim: usize) -> Self {
        Self {
            modes,
            arity,
            dim,
            data: vec![0.0; modes.pow(arity as u32) * dim],
        }
    }

    pub fn from_fn(modes: usize, arity: usize, dim: usize, mut f: impl FnMut(&[usize]) -> DVector<f64>) -> Self {
        let mut t = Self::zeros(modes, arity, dim);
        for tuple in t.tuples() {
            let v = f(&tuple);
            t.get_mut(&tuple).copy_from_slice(v.as_slice());
        }
        t
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn offset(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.arity);
        tuple.iter().fold(0, |acc, &j| acc * self.modes + j) * self.dim
    }

    pub fn get(&self, tuple: &[usize]) -> &[f64] {
        let o = self.offset(tuple);
        &self.data[o..o + self.dim]
    }

    pub fn get_mut(&mut self, tuple: &[usize]) -> &mut [f64] {
        let o = self.offset(tuple);
        &mut self.data[o..o + self.dim]
    }

    /// All argument tuples in row-major order.
    pub fn tuples(&self) -> Vec<Vec<usize>> {
        (0..self.arity)
            .map(|_| 0..self.modes)
            .multi_cartesian_product()
            .collect::<Vec<_>>()
            .into_iter()
            .chain((self.arity == 0).then(Vec::new))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &ModeTable) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Average over all permutations of the arguments in `range`.
    pub fn symmetrize_range(&self, range: std::ops::Range<usize>) -> Self {
        let mut out = Self::zeros(self.modes, self.arity, self.dim);
        let len = range.len();
        let perms: Vec<Vec<usize>> = (0..len).permutations(len).collect();
        let scale = 1.0 / perms.len() as f64;
        for tuple in self.tuples() {
            let mut permuted = tuple.clone();
            let acc = out.get_mut(&tuple);
            for p in &perms {
                for (slot, &src) in p.iter().enumerate() {
                    permuted[range.start + slot] = tuple[range.start + src];
                }
                for (a, v) in acc.iter_mut().zip(self.get(&permuted)) {
                    *a += scale * v;
                }
            }
        }
        out
    }

    /// Full symmetrization over all arguments.
    pub fn symmetrize(&self) -> Self {
        self.symmetrize_range(0..self.arity)
    }
}

/// Kernel `K(k_1, ..., k_{m-r}; k_{m-r+1}, ..., k_m)` of an order-`r`
/// operator, taking values in matrices on the auxiliary space.
pub struct OrderROperator<'a> {
    pub r: usize,
    pub kernel: Box<dyn Fn(&[usize], &[usize]) -> DMatrix<f64> + 'a>,
}

impl<'a> OrderROperator<'a> {
    pub fn new(r: usize, kernel: impl Fn(&[usize], &[usize]) -> DMatrix<f64> + 'a) -> Self {
        Self {
            r,
            kernel: Box::new(kernel),
        }
    }

    /// Unsymmetrized action: `(a x)(k_1..k_m) = K(k_1..k_{m-r}; k_{m-r+1}..k_m) x(k_1..k_{m-r})`.
    pub fn apply_ns(&self, x: &ModeTable) -> ModeTable {
        let m = x.arity() + self.r;
        ModeTable::from_fn(x.modes(), m, x.dim(), |t| {
            let (rest, picked) = t.split_at(m - self.r);
            (self.kernel)(rest, picked) * DVector::from_column_slice(x.get(rest))
        })
    }
}

/// Symmetrized action on a symmetric table via the choose-`r` sum
/// `(m-r)! r! / m! sum_{i_1 < ... < i_r} K(rest; picked) x(rest)`.
pub fn apply_order_r(op: &OrderROperator, x: &ModeTable, m: usize) -> Result<ModeTable> {
    if x.arity() + op.r != m {
        return Err(Error::DimensionMismatch {
            level: m,
            expected: m - op.r.min(m),
            got: x.arity(),
        });
    }
    let r = op.r;
    let prefactor = 1.0 / crate::fock::binomial(m, r) as f64;
    let chosen: Vec<Vec<usize>> = (0..m).combinations(r).collect();
    Ok(ModeTable::from_fn(x.modes(), m, x.dim(), |t| {
        let mut acc = DVector::zeros(x.dim());
        for c in &chosen {
            let picked: Vec<usize> = c.iter().map(|&i| t[i]).collect();
            let rest: Vec<usize> = (0..m).filter(|i| !c.contains(i)).map(|i| t[i]).collect();
            acc += (op.kernel)(&rest, &picked) * DVector::from_column_slice(x.get(&rest));
        }
        acc * prefactor
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(rng: &mut ChaCha8Rng, modes: usize, arity: usize, dim: usize) -> ModeTable {
        ModeTable::from_fn(modes, arity, dim, |_| DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn symmetrize_linear_argument() {
        let ks = [0.3, -0.7, 1.1];
        let e = DVector::from_vec(vec![1.0, 2.0]);
        let t = ModeTable::from_fn(3, 2, 2, |t| &e * ks[t[0]]);
        let s = t.symmetrize();
        for tuple in s.tuples() {
            let want = &e * ((ks[tuple[0]] + ks[tuple[1]]) / 2.0);
            assert!((DVector::from_column_slice(s.get(&tuple)) - want).norm() < 1e-15);
        }
    }

    #[test]
    fn symmetrize_is_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=4 {
            let t = random_table(&mut rng, 3, n, 2);
            let s = t.symmetrize();
            assert!(s.symmetrize().max_abs_diff(&s) <= 1e-14);
        }
    }

    #[test]
    fn partial_then_full_equals_full() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_table(&mut rng, 4, 3, 1);
        let full = t.symmetrize();
        // explicit double permutation sum
        let perms: Vec<Vec<usize>> = (0..3).permutations(3).collect();
        let oracle = ModeTable::from_fn(4, 3, 1, |tuple| {
            let mut acc = 0.0;
            for p in &perms {
                for q in [[0, 1, 2], [1, 0, 2]] {
                    let inner: Vec<usize> = (0..3).map(|i| tuple[p[i]]).collect();
                    let arg: Vec<usize> = (0..3).map(|i| inner[q[i]]).collect();
                    acc += t.get(&arg)[0];
                }
            }
            DVector::from_element(1, acc / 12.0)
        });
        assert!(oracle.max_abs_diff(&full) < 1e-14);
        for range in [0..2, 1..3] {
            assert!(t.symmetrize_range(range).symmetrize().max_abs_diff(&full) < 1e-14);
        }
    }

    #[test]
    fn constant_kernel_examples() {
        let vac = ModeTable::from_fn(3, 1, 1, |_| DVector::from_element(1, 1.0));
        let one = OrderROperator::new(1, |_, _| DMatrix::from_element(1, 1, 1.0));
        let out = apply_order_r(&one, &vac, 2).unwrap();
        assert!(out.tuples().iter().all(|t| out.get(t)[0] == 1.0));

        let g = [0.5, 2.0, -1.0];
        let x0 = ModeTable::from_fn(3, 0, 1, |_| DVector::from_element(1, 1.0));
        let pair = OrderROperator::new(2, |_, p: &[usize]| DMatrix::from_element(1, 1, g[p[0]] * g[p[1]]));
        let out = apply_order_r(&pair, &x0, 2).unwrap();
        for t in out.tuples() {
            assert_eq!(out.get(&t)[0], g[t[0]] * g[t[1]]);
        }
        assert!(apply_order_r(&pair, &x0, 3).is_err());
    }

    #[test]
    fn sum_representation_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let modes = 3;
        let dim = 2;
        for r in 1..=2 {
            for m in r..=4 {
                // kernel symmetric in each group: depends on sorted groups
                let seeds: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let kernel = move |rest: &[usize], picked: &[usize]| {
                    let s1: f64 = rest.iter().map(|&j| seeds[j]).sum::<f64>();
                    let s2: f64 = picked.iter().map(|&j| seeds[8 + j]).product::<f64>();
                    DMatrix::from_fn(dim, dim, |a, b| {
                        seeds[16 + a * dim + b] * s1.cos() + seeds[32 + a * dim + b] * s2
                    })
                };
                let op = OrderROperator::new(r, kernel);
                let x = random_table(&mut rng, modes, m - r, dim).symmetrize();
                let sum_rep = apply_order_r(&op, &x, m).unwrap();
                let brute = op.apply_ns(&x).symmetrize();
                assert!(sum_rep.max_abs_diff(&brute) <= 1e-12, "r={r} m={m}");
            }
        }
    }
}
