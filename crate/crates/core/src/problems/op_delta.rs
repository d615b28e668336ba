use super::{ProblemConstants, StochasticProblem};
use crate::{DenseVector, Error, RandomSource, Result};

/// Which of the two loss branches a draw selected.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OpBranch {
    /// Probability `p = (1+δ)/(1+δ⁴)`: `f(w) = w²/(2δ) + δ⁴ w`.
    Rare,
    /// Probability `1 - p`: `f(w) = w²/(2δ) - w`.
    #[default]
    Common,
}

/// The one-dimensional two-branch problem on which ADAM drifts away from
/// `w* = -δ²` from every starting point.
///
/// Population loss `F(w) = w²/(2δ) + δw`, strongly convex with modulus `1/δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpDeltaProblem {
    delta: f64,
    rare_probability: f64,
    reachable_radius: Option<f64>,
}

pub fn make_op_delta(delta: f64) -> Result<OpDeltaProblem> {
    if !(delta > 1.0 && delta.is_finite()) {
        return Err(Error::argument("delta must be a finite real > 1"));
    }
    Ok(OpDeltaProblem { delta, rare_probability: super::ratio_of_delta(delta), reachable_radius: None })
}

impl OpDeltaProblem {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `p = P(ξ = rare)`.
    pub fn rare_probability(&self) -> f64 {
        self.rare_probability
    }

    pub fn optimum(&self) -> f64 {
        -self.delta * self.delta
    }

    pub fn optimal_value(&self) -> f64 {
        -self.delta * self.delta * self.delta / 2.0
    }

    /// Declares that iterates stay within `|w| ≤ radius`, which makes the
    /// branch gradients bounded by `radius/δ + δ⁴`.
    pub fn with_reachable_radius(mut self, radius: f64) -> Self {
        self.reachable_radius = Some(radius);
        self
    }

    pub fn reachable_radius(&self) -> Option<f64> {
        self.reachable_radius
    }

    pub fn branch_gradient(&self, w: f64, branch: OpBranch) -> f64 {
        match branch {
            OpBranch::Rare => w / self.delta + libm::pow(self.delta, 4.0),
            OpBranch::Common => w / self.delta - 1.0,
        }
    }

    pub fn branch_loss(&self, w: f64, branch: OpBranch) -> f64 {
        let quad = w * w / (2.0 * self.delta);
        match branch {
            OpBranch::Rare => quad + libm::pow(self.delta, 4.0) * w,
            OpBranch::Common => quad - w,
        }
    }

    pub fn scalar_loss(&self, w: f64) -> f64 {
        w * w / (2.0 * self.delta) + self.delta * w
    }

    pub fn scalar_gradient(&self, w: f64) -> f64 {
        w / self.delta + self.delta
    }
}

impl StochasticProblem for OpDeltaProblem {
    type Seed = OpBranch;
    type Sampler = ();

    fn dim(&self) -> usize {
        1
    }

    fn loss(&self, w: &DenseVector) -> f64 {
        self.scalar_loss(w[0])
    }

    fn full_gradient_into(&self, w: &DenseVector, out: &mut DenseVector) {
        out.as_mut_slice()[0] = self.scalar_gradient(w[0]);
    }

    fn sampler(&self) {}

    fn sample(&self, _: &mut (), rng: &mut RandomSource, seed: &mut OpBranch) {
        *seed = if rng.bernoulli(self.rare_probability) { OpBranch::Rare } else { OpBranch::Common };
    }

    fn estimate_into(&self, w: &DenseVector, seed: &OpBranch, out: &mut DenseVector) {
        out.as_mut_slice()[0] = self.branch_gradient(w[0], *seed);
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            lipschitz: Some(1.0 / self.delta),
            gradient_bound: self.reachable_radius.map(|r| r / self.delta + libm::pow(self.delta, 4.0)),
            strong_convexity: Some(1.0 / self.delta),
            optimal_value: Some(self.optimal_value()),
            optimizer: Some(DenseVector::scalar(self.optimum())),
        }
    }
}
