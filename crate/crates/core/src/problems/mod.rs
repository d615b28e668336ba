//! Stochastic optimization problems behind one gradient-estimator interface.
//!
//! [`StochasticProblem`] is the general form: a loss `F`, its gradient, a seed
//! distribution and an unbiased estimator `G(w; ξ)`. [`FiniteSum`] problems
//! (`F = (1/N) Σ f_n`) become stochastic problems through [`Minibatch`], whose
//! seed is a batch drawn uniformly without replacement.

mod dataset;
mod divergence;
mod finite_sum;
mod logistic;
mod mlp;
mod op_delta;
mod quadratic;

pub use dataset::Dataset;
pub use divergence::{
    make_thm2_problem, make_thm3_problem, ratio_of_delta, solve_delta_for_ratio, ConstructionKind,
    DivergenceConstruction, ScalarQuadraticSum,
};
pub use finite_sum::{binomial, for_each_batch, BatchSampler, FiniteSum, Minibatch};
pub use logistic::{make_logistic, LogisticRegression};
pub use mlp::{make_mlp, Mlp, MlpShape};
pub use op_delta::{make_op_delta, OpBranch, OpDeltaProblem};
pub use quadratic::{make_quadratic, ClippedQuadratic, QuadraticSpec};

use crate::{DenseVector, RandomSource};

/// Analytic constants a problem may declare.
///
/// Optimizer-side checks (state bounds, rate exponents, assumption clauses)
/// only run when the constant they need is declared.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemConstants {
    /// Lipschitz constant of every estimator `G(·; ξ)` and of `∇F`.
    pub lipschitz: Option<f64>,
    /// Bound on `‖G(w; ξ)‖₂` over reachable `w` and all `ξ`.
    pub gradient_bound: Option<f64>,
    /// Strong-convexity modulus of `F`.
    pub strong_convexity: Option<f64>,
    /// `F*`.
    pub optimal_value: Option<f64>,
    /// `w*`.
    pub optimizer: Option<DenseVector>,
}

/// An objective with an unbiased stochastic gradient estimator.
pub trait StochasticProblem {
    /// One draw of `ξ`.
    type Seed: Clone + Default + core::fmt::Debug;
    /// Per-run scratch state for drawing seeds.
    type Sampler;

    fn dim(&self) -> usize;
    fn loss(&self, w: &DenseVector) -> f64;
    fn full_gradient_into(&self, w: &DenseVector, out: &mut DenseVector);
    fn sampler(&self) -> Self::Sampler;
    fn sample(&self, sampler: &mut Self::Sampler, rng: &mut RandomSource, seed: &mut Self::Seed);
    /// `G(w; ξ)`, written into `out`.
    fn estimate_into(&self, w: &DenseVector, seed: &Self::Seed, out: &mut DenseVector);
    fn constants(&self) -> ProblemConstants;

    /// Cost of one full gradient in units of one estimator evaluation.
    fn full_gradient_cost(&self) -> f64 {
        1.0
    }

    fn full_gradient(&self, w: &DenseVector) -> DenseVector {
        let mut out = DenseVector::zeros(self.dim());
        self.full_gradient_into(w, &mut out);
        out
    }

    fn estimate(&self, w: &DenseVector, seed: &Self::Seed) -> DenseVector {
        let mut out = DenseVector::zeros(self.dim());
        self.estimate_into(w, seed, &mut out);
        out
    }
}

impl<P: StochasticProblem + ?Sized> StochasticProblem for &P {
    type Seed = P::Seed;
    type Sampler = P::Sampler;

    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn loss(&self, w: &DenseVector) -> f64 {
        (**self).loss(w)
    }
    fn full_gradient_into(&self, w: &DenseVector, out: &mut DenseVector) {
        (**self).full_gradient_into(w, out)
    }
    fn sampler(&self) -> Self::Sampler {
        (**self).sampler()
    }
    fn sample(&self, sampler: &mut Self::Sampler, rng: &mut RandomSource, seed: &mut Self::Seed) {
        (**self).sample(sampler, rng, seed)
    }
    fn estimate_into(&self, w: &DenseVector, seed: &Self::Seed, out: &mut DenseVector) {
        (**self).estimate_into(w, seed, out)
    }
    fn constants(&self) -> ProblemConstants {
        (**self).constants()
    }
    fn full_gradient_cost(&self) -> f64 {
        (**self).full_gradient_cost()
    }
}
