use vradam_core::optimizers::{run_vradam_finite_sum, AdamHyper, LearningRate, ResetOption, RunOptions, VradamConfig};
use vradam_core::problems::{FiniteSum, ScalarQuadraticSum};
use vradam_core::{DenseVector, RandomSource};

use crate::{Error, Result};

/// A one-dimensional finite sum of quadratics and the VRADAM settings used to
/// compare the first update of the second outer iteration under both options.
#[derive(Debug, Clone, PartialEq)]
pub struct ResetSpec {
    pub curvature: Vec<f64>,
    pub linear: Vec<f64>,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub inner_length: usize,
    /// `G`, the bound every direction of the run must respect.
    pub g_bound: f64,
    pub eps: f64,
    /// Constant step size, so `α₂ = α`.
    pub alpha: f64,
    pub w1: f64,
}

impl ResetSpec {
    /// Eight components with curvatures spread over `[0.6, 1.4]` and centred
    /// random linear terms, so `F(w) = w²/2 + const·w` with `w* = 0`:
    /// `c = L = 1`, `G = 1`, `ε = 0.6`, `α = 2√(G²+ε)/L`, `β₁ = 0.9`, `m = 5`.
    pub fn satisfiable() -> Self {
        let n = 8;
        let curvature: Vec<f64> = (0..n).map(|i| 0.6 + 0.8 * i as f64 / (n - 1) as f64).collect();
        let mut rng = RandomSource::new(7, 0);
        let mut linear: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mean = linear.iter().sum::<f64>() / n as f64;
        linear.iter_mut().for_each(|b| *b -= mean);
        let (g, eps) = (1.0, 0.6);
        let l = curvature.iter().sum::<f64>() / n as f64;
        ResetSpec {
            curvature,
            linear,
            batch_size: 2,
            beta1: 0.9,
            beta2: 0.999,
            inner_length: 5,
            g_bound: g,
            eps,
            alpha: 2.0 * (g * g + eps).sqrt() / l,
            w1: SATISFIABLE_START,
        }
    }

    pub fn problem(&self) -> Result<ScalarQuadraticSum> {
        Ok(ScalarQuadraticSum::new(self.curvature.clone(), self.linear.clone())?)
    }

    /// `(c, L)` of `F`; both equal `F''` for a one-dimensional quadratic.
    pub fn moduli(&self) -> (f64, f64) {
        let a = self.curvature.iter().sum::<f64>() / self.curvature.len() as f64;
        (a, a)
    }
}

/// Start used by [`ResetSpec::satisfiable`]; calibrated so a good share of
/// seeds meet every clause on the realised run.
pub const SATISFIABLE_START: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetOutcome {
    pub seed: u64,
    pub f_a: f64,
    pub f_b: f64,
    /// Direction bound, progress in the first outer loop, hyper-parameters.
    pub clauses: [bool; 3],
    pub asserted: bool,
}

/// The two hyper-parameter inequalities:
/// `Lα ≥ 2√(G²+ε)` and `L/c ≤ (2β₁-1)/(1-β₁^{m+1})·√(ε/(G²+ε))`.
pub fn hyper_clause(spec: &ResetSpec) -> bool {
    let (c, l) = spec.moduli();
    let g2e = spec.g_bound * spec.g_bound + spec.eps;
    let step = l * spec.alpha >= 2.0 * g2e.sqrt();
    let ratio = (2.0 * spec.beta1 - 1.0) / (1.0 - spec.beta1.powi(spec.inner_length as i32 + 1))
        * (spec.eps / g2e).sqrt();
    step && l / c <= ratio
}

/// Runs both options from the same seed through the first outer iteration
/// plus one inner step and compares `F` at the result.
pub fn reset_comparison(spec: &ResetSpec, seed: u64) -> Result<ResetOutcome> {
    let problem = spec.problem()?;
    let n = problem.num_components();
    if spec.batch_size == 0 || spec.batch_size > n {
        return Err(Error::config("batch size must lie in 1..=N"));
    }
    let lr = LearningRate::constant(spec.alpha)?;
    let hyper = AdamHyper::new(lr, spec.beta1, spec.beta2, spec.eps)?;
    let m = spec.inner_length;
    // Two full gradients plus m + 1 inner steps.
    let budget = 2.0 * n as f64 / spec.batch_size as f64 + 2.0 * (m + 1) as f64;
    let opts = RunOptions { cost_budget: Some(budget), ..Default::default() };
    let w1 = DenseVector::scalar(spec.w1);

    let run = |option| {
        let cfg = VradamConfig::new(hyper, m, spec.batch_size, option)?;
        run_vradam_finite_sum(&problem, &cfg, &w1, 2, &mut RandomSource::new(seed, 0), &opts)
    };
    let (a, b) = (run(ResetOption::A)?, run(ResetOption::B)?);
    if a.steps != m + 1 || b.steps != m + 1 || a.w_first[..m] != b.w_first[..m] {
        return Err(Error::Internal("options diverged before the second outer iteration".into()));
    }

    // In one dimension ‖g‖₂ = |g| and ‖m‖₂ = |m|.
    let directions_bounded = a.direction_norm.iter().all(|&g| g <= spec.g_bound);
    let snapshot = &a.snapshots[1];
    let mut full = DenseVector::zeros(1);
    problem.full_gradient_sum_into(snapshot, &mut full);
    let progress = a.m_norm[m - 1] >= full[0].abs();
    let clauses = [directions_bounded, progress, hyper_clause(spec)];
    Ok(ResetOutcome {
        seed,
        f_a: problem.full_loss(&a.final_iterate),
        f_b: problem.full_loss(&b.final_iterate),
        clauses,
        asserted: clauses.iter().all(|&c| c),
    })
}
