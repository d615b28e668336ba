use alloc::vec::Vec;

use super::{ProblemConstants, StochasticProblem};
use crate::{DenseVector, Error, RandomSource, Result};

/// `F(w) = (1/N) Σₙ fₙ(w)` with analytic component gradients.
pub trait FiniteSum {
    fn num_components(&self) -> usize;
    fn dim(&self) -> usize;
    fn component_loss(&self, n: usize, w: &DenseVector) -> f64;
    /// `out += scale · ∇fₙ(w)`.
    fn add_component_gradient(&self, n: usize, w: &DenseVector, scale: f64, out: &mut [f64]);
    fn constants(&self) -> ProblemConstants;

    /// `F^B(w) = (1/|B|) Σ_{n∈B} fₙ(w)`.
    fn batch_loss(&self, batch: &[usize], w: &DenseVector) -> f64 {
        let sum: f64 = batch.iter().map(|&n| self.component_loss(n, w)).sum();
        sum / batch.len() as f64
    }

    fn batch_gradient_into(&self, batch: &[usize], w: &DenseVector, out: &mut DenseVector) {
        out.set_zero();
        let scale = 1.0 / batch.len() as f64;
        for &n in batch {
            self.add_component_gradient(n, w, scale, out.as_mut_slice());
        }
    }

    fn full_loss(&self, w: &DenseVector) -> f64 {
        let n = self.num_components();
        (0..n).map(|i| self.component_loss(i, w)).sum::<f64>() / n as f64
    }

    fn full_gradient_sum_into(&self, w: &DenseVector, out: &mut DenseVector) {
        out.set_zero();
        let scale = 1.0 / self.num_components() as f64;
        for n in 0..self.num_components() {
            self.add_component_gradient(n, w, scale, out.as_mut_slice());
        }
    }

    fn component_gradient(&self, n: usize, w: &DenseVector) -> DenseVector {
        let mut out = DenseVector::zeros(self.dim());
        self.add_component_gradient(n, w, 1.0, out.as_mut_slice());
        out
    }

    fn batch_gradient(&self, batch: &[usize], w: &DenseVector) -> DenseVector {
        let mut out = DenseVector::zeros(self.dim());
        self.batch_gradient_into(batch, w, &mut out);
        out
    }
}

impl<T: FiniteSum + ?Sized> FiniteSum for &T {
    fn num_components(&self) -> usize {
        (**self).num_components()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn component_loss(&self, n: usize, w: &DenseVector) -> f64 {
        (**self).component_loss(n, w)
    }
    fn add_component_gradient(&self, n: usize, w: &DenseVector, scale: f64, out: &mut [f64]) {
        (**self).add_component_gradient(n, w, scale, out)
    }
    fn constants(&self) -> ProblemConstants {
        (**self).constants()
    }
    fn batch_loss(&self, batch: &[usize], w: &DenseVector) -> f64 {
        (**self).batch_loss(batch, w)
    }
    fn batch_gradient_into(&self, batch: &[usize], w: &DenseVector, out: &mut DenseVector) {
        (**self).batch_gradient_into(batch, w, out)
    }
    fn full_loss(&self, w: &DenseVector) -> f64 {
        (**self).full_loss(w)
    }
    fn full_gradient_sum_into(&self, w: &DenseVector, out: &mut DenseVector) {
        (**self).full_gradient_sum_into(w, out)
    }
}

/// Draws batches of size `b` uniformly without replacement.
///
/// Runs `b` steps of a Fisher–Yates shuffle on a persistent permutation. A
/// partial shuffle of any arrangement yields a uniform ordered `b`-prefix, so
/// the permutation never needs resetting and each draw costs `O(b)`.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    perm: Vec<usize>,
    batch_size: usize,
}

impl BatchSampler {
    pub fn new(population: usize, batch_size: usize) -> Result<Self> {
        if batch_size == 0 || batch_size > population {
            return Err(Error::argument("batch size must lie in 1..=N"));
        }
        Ok(BatchSampler { perm: (0..population).collect(), batch_size })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn draw(&mut self, rng: &mut RandomSource, out: &mut Vec<usize>) {
        let n = self.perm.len();
        for i in 0..self.batch_size {
            let j = i + rng.index(n - i);
            self.perm.swap(i, j);
        }
        out.clear();
        out.extend_from_slice(&self.perm[..self.batch_size]);
    }
}

/// A finite sum sampled in minibatches of a fixed size.
#[derive(Debug, Clone)]
pub struct Minibatch<P> {
    problem: P,
    batch_size: usize,
}

impl<P: FiniteSum> Minibatch<P> {
    pub fn new(problem: P, batch_size: usize) -> Result<Self> {
        if batch_size == 0 || batch_size > problem.num_components() {
            return Err(Error::argument("batch size must lie in 1..=N"));
        }
        Ok(Minibatch { problem, batch_size })
    }

    pub fn inner(&self) -> &P {
        &self.problem
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }
}

impl<P: FiniteSum> StochasticProblem for Minibatch<P> {
    type Seed = Vec<usize>;
    type Sampler = BatchSampler;

    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn loss(&self, w: &DenseVector) -> f64 {
        self.problem.full_loss(w)
    }

    fn full_gradient_into(&self, w: &DenseVector, out: &mut DenseVector) {
        self.problem.full_gradient_sum_into(w, out)
    }

    fn sampler(&self) -> BatchSampler {
        BatchSampler::new(self.problem.num_components(), self.batch_size).expect("validated in Minibatch::new")
    }

    fn sample(&self, sampler: &mut BatchSampler, rng: &mut RandomSource, seed: &mut Vec<usize>) {
        sampler.draw(rng, seed)
    }

    fn estimate_into(&self, w: &DenseVector, seed: &Vec<usize>, out: &mut DenseVector) {
        self.problem.batch_gradient_into(seed, w, out)
    }

    fn constants(&self) -> ProblemConstants {
        self.problem.constants()
    }

    fn full_gradient_cost(&self) -> f64 {
        self.problem.num_components() as f64 / self.batch_size as f64
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Visits every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_batch<F: FnMut(&[usize])>(n: usize, k: usize, mut visit: F) {
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
