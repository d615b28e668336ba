//! Finite-sum recasts of the two-branch problem for a fixed batch size.
//!
//! Both constructions pick `δ` so that the probability of drawing the rare
//! batch equals `π(δ) = (1+δ)/(1+δ⁴)`; every minibatch loss then reduces to
//! one of the two branches of the two-branch problem at that `δ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{make_op_delta, FiniteSum, Minibatch, OpDeltaProblem, ProblemConstants};
use crate::numerics::{bisect_root, NeumaierSum};
use crate::{DenseVector, Error, Result};

/// `π(δ) = (1+δ)/(1+δ⁴)`.
pub fn ratio_of_delta(delta: f64) -> f64 {
    (1.0 + delta) / (1.0 + libm::pow(delta, 4.0))
}

/// Solves `π(δ) = p` for `δ > lo` on the decreasing branch of `π`.
///
/// `π` is strictly decreasing on `[1, ∞)` (its derivative has numerator
/// `1 - 4δ³ - 3δ⁴`), so any `lo ≥ 1` with `π(lo) > p` brackets a unique root.
pub fn solve_delta_for_ratio(p: f64, lo: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::argument(format!("ratio {p} outside (0, 1)")));
    }
    if !(lo >= 1.0 && lo.is_finite()) {
        return Err(Error::argument("lower search limit must be >= 1"));
    }
    if ratio_of_delta(lo) <= p {
        return Err(Error::Construction(format!(
            "pi({lo}) = {} does not exceed the target ratio {p}",
            ratio_of_delta(lo)
        )));
    }
    let mut hi = lo + 1.0;
    while ratio_of_delta(hi) > p {
        hi = lo + 2.0 * (hi - lo);
        if !hi.is_finite() {
            return Err(Error::Construction(format!("no bracket found for ratio {p}")));
        }
    }
    let delta = bisect_root(|d| ratio_of_delta(d) - p, lo, hi, 1e-13 * hi.max(1.0))?;
    if delta <= lo {
        return Err(Error::Construction(format!("root {delta} not above {lo}")));
    }
    Ok(delta)
}

/// `fₙ(w) = aₙ w²/2 + bₙ w` on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarQuadraticSum {
    curvature: Vec<f64>,
    linear: Vec<f64>,
}

impl ScalarQuadraticSum {
    pub fn new(curvature: Vec<f64>, linear: Vec<f64>) -> Result<Self> {
        if curvature.is_empty() || curvature.len() != linear.len() {
            return Err(Error::argument("need equally many curvature and linear coefficients, at least one"));
        }
        if curvature.iter().chain(&linear).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("scalar quadratic coefficients"));
        }
        Ok(ScalarQuadraticSum { curvature, linear })
    }

    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Replaces one linear coefficient (used to build negative controls).
    pub fn with_linear_coefficient(mut self, n: usize, value: f64) -> Self {
        self.linear[n] = value;
        self
    }

    /// `(ā_B, b̄_B)` such that `F^B(w) = ā_B w²/2 + b̄_B w`.
    pub fn reduced_coefficients(&self, batch: &[usize]) -> (f64, f64) {
        let (mut a, mut b) = (NeumaierSum::default(), NeumaierSum::default());
        for &n in batch {
            a.add(self.curvature[n]);
            b.add(self.linear[n]);
        }
        let k = batch.len() as f64;
        (a.value() / k, b.value() / k)
    }

    fn mean_coefficients(&self) -> (f64, f64) {
        let all: Vec<usize> = (0..self.curvature.len()).collect();
        self.reduced_coefficients(&all)
    }
}

impl FiniteSum for ScalarQuadraticSum {
    fn num_components(&self) -> usize {
        self.curvature.len()
    }

    fn dim(&self) -> usize {
        1
    }

    fn component_loss(&self, n: usize, w: &DenseVector) -> f64 {
        let x = w[0];
        0.5 * self.curvature[n] * x * x + self.linear[n] * x
    }

    fn add_component_gradient(&self, n: usize, w: &DenseVector, scale: f64, out: &mut [f64]) {
        out[0] += scale * (self.curvature[n] * w[0] + self.linear[n]);
    }

    fn constants(&self) -> ProblemConstants {
        let (a, b) = self.mean_coefficients();
        let max_a = self.curvature.iter().fold(f64::MIN, |m, &x| m.max(x));
        let convex = a > 0.0;
        ProblemConstants {
            lipschitz: Some(max_a.abs().max(a.abs())),
            gradient_bound: None,
            strong_convexity: convex.then_some(a),
            optimal_value: convex.then(|| -b * b / (2.0 * a)),
            optimizer: convex.then(|| DenseVector::scalar(-b / a)),
        }
    }
}

/// Which existence result a construction instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionKind {
    /// Fixed batch size `b`, sample size `N`, `b/N = π(δ)`.
    FixedBatch,
    /// Batch size `N - 1`, `1/N = π(δ)`.
    LeaveOneOut,
}

/// A finite sum whose minibatch losses are exactly the two branches of the
/// two-branch problem at `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceConstruction {
    pub sum: ScalarQuadraticSum,
    pub delta: f64,
    pub batch_size: usize,
    pub kind: ConstructionKind,
}

impl DivergenceConstruction {
    pub fn num_components(&self) -> usize {
        self.sum.num_components()
    }

    pub fn minibatch(&self) -> Minibatch<&ScalarQuadraticSum> {
        Minibatch::new(&self.sum, self.batch_size).expect("construction keeps 1 <= b < N")
    }

    /// The two-branch problem the minibatch losses reduce to.
    pub fn op_problem(&self) -> OpDeltaProblem {
        make_op_delta(self.delta).expect("construction keeps delta > 1")
    }

    /// Probability of drawing the batch that reduces to the rare branch.
    pub fn rare_batch_probability(&self) -> f64 {
        let (n, b) = (self.num_components() as f64, self.batch_size as f64);
        match self.kind {
            ConstructionKind::FixedBatch => b / n,
            ConstructionKind::LeaveOneOut => 1.0 / n,
        }
    }
}

/// Sample size `n`, batch size `b`: `fₙ = w²/(2δ) - w` for the first `n-1`
/// components and `w²/(2δ) + (bδ⁴ + b - 1) w` for the last.
pub fn make_thm2_problem(n: usize, b: usize) -> Result<DivergenceConstruction> {
    if !(b >= 1 && b < n) {
        return Err(Error::argument(format!("need 1 <= b < N, got b={b}, N={n}")));
    }
    let delta = solve_delta_for_ratio(b as f64 / n as f64, 1.0)?;
    let d4 = libm::pow(delta, 4.0);
    let mut linear = vec![-1.0; n];
    linear[n - 1] = b as f64 * d4 + b as f64 - 1.0;
    let sum = ScalarQuadraticSum::new(vec![1.0 / delta; n], linear)?;
    Ok(DivergenceConstruction { sum, delta, batch_size: b, kind: ConstructionKind::FixedBatch })
}

/// Sample size `n`, batch size `n - 1`: `fₙ = w²/(2δ) + δ⁴ w` for the first
/// `n-1` components and `w²/(2δ) - ((n-1) + (n-2)δ⁴) w` for the last.
pub fn make_thm3_problem(n: usize) -> Result<DivergenceConstruction> {
    if n < 2 {
        return Err(Error::argument("leave-one-out construction needs N >= 2"));
    }
    let delta = solve_delta_for_ratio(1.0 / n as f64, 1.0)?;
    let d4 = libm::pow(delta, 4.0);
    let mut linear = vec![d4; n];
    linear[n - 1] = -((n - 1) as f64 + (n - 2) as f64 * d4);
    let sum = ScalarQuadraticSum::new(vec![1.0 / delta; n], linear)?;
    Ok(DivergenceConstruction { sum, delta, batch_size: n - 1, kind: ConstructionKind::LeaveOneOut })
}
