use alloc::format;

use super::record::{Recorder, RunOptions, RunRecord};
use super::{LearningRate, ROUNDING_SLACK};
use crate::error::StepLocation;
use crate::problems::StochasticProblem;
use crate::{DenseVector, Error, RandomSource, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub lr: LearningRate,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Divide `m`, `v` by `1-βᵗ` before the update. Off in the plain
    /// algorithm; VRADAM always corrects and ignores this flag.
    pub bias_correction: bool,
}

impl AdamHyper {
    pub fn new(lr: LearningRate, beta1: f64, beta2: f64, eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
            return Err(Error::argument(format!("betas must lie in [0, 1), got {beta1}, {beta2}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::argument(format!("eps must be positive, got {eps}")));
        }
        Ok(AdamHyper { lr, beta1, beta2, eps, bias_correction: false })
    }

    /// `β₁ = 0`, `β₂ = 0.999`, `ε = 1e-12`, constant `α`.
    pub fn proof_regime(alpha: f64) -> Result<Self> {
        Self::new(LearningRate::constant(alpha)?, 0.0, 0.999, 1e-12)
    }

    /// `β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e-8`.
    pub fn practical(lr: LearningRate) -> Result<Self> {
        Self::new(lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_bias_correction(mut self, on: bool) -> Self {
        self.bias_correction = on;
        self
    }

    /// Per-coordinate update bound `α/√(1-β₂)`, valid when `β₁ = 0`.
    pub fn step_bound(&self, alpha: f64) -> f64 {
        alpha / libm::sqrt(1.0 - self.beta2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: DenseVector,
    pub v: DenseVector,
    /// Global step count.
    pub t: usize,
    /// Inner step within the current outer loop (VRADAM).
    pub k: usize,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState { m: DenseVector::zeros(dim), v: DenseVector::zeros(dim), t: 0, k: 0 }
    }

    pub fn reset(&mut self) {
        self.m.set_zero();
        self.v.set_zero();
        self.k = 0;
    }
}

/// `1 - βⁿ`, in log space once `n` exceeds 10⁶.
pub fn one_minus_pow(beta: f64, n: u64) -> f64 {
    if n <= 1_000_000 {
        1.0 - libm::pow(beta, n as f64)
    } else if beta == 0.0 {
        1.0
    } else {
        -libm::expm1(n as f64 * libm::log(beta))
    }
}

fn accumulate(state: &mut AdamState, g: &DenseVector, beta1: f64, beta2: f64) -> Result<()> {
    g.check_len(state.m.len())?;
    g.check_finite("gradient estimate")?;
    for ((m, v), &gi) in state.m.as_mut_slice().iter_mut().zip(state.v.as_mut_slice()).zip(g.as_slice()) {
        *m = beta1 * *m + (1.0 - beta1) * gi;
        *v = beta2 * *v + (1.0 - beta2) * gi * gi;
    }
    Ok(())
}

/// `update = -α·(m/cₘ)/√(v/cᵥ + ε)`.
fn write_update(state: &AdamState, alpha: f64, eps: f64, cm: f64, cv: f64, update: &mut DenseVector) -> Result<()> {
    for ((u, &m), &v) in update.as_mut_slice().iter_mut().zip(state.m.as_slice()).zip(state.v.as_slice()) {
        *u = -alpha * (m / cm) / libm::sqrt(v / cv + eps);
    }
    update.check_finite("update")
}

/// One step of the plain algorithm at step `t ≥ 1`: updates `(m, v)` in place
/// and writes `-α_t·m/√(v+ε)` into `update`.
pub fn adam_step(state: &mut AdamState, g: &DenseVector, hyper: &AdamHyper, t: usize, update: &mut DenseVector) -> Result<()> {
    if t == 0 {
        return Err(Error::argument("steps are numbered from 1"));
    }
    accumulate(state, g, hyper.beta1, hyper.beta2)?;
    state.t = t;
    let (cm, cv) = if hyper.bias_correction {
        (one_minus_pow(hyper.beta1, t as u64), one_minus_pow(hyper.beta2, t as u64))
    } else {
        (1.0, 1.0)
    };
    write_update(state, hyper.lr.at(t), hyper.eps, cm, cv, update)
}

/// The VRADAM inner update at exponent `n`: accumulate, correct by `1-βⁿ`.
pub(crate) fn corrected_step(
    state: &mut AdamState,
    g: &DenseVector,
    hyper: &AdamHyper,
    alpha: f64,
    n: u64,
    update: &mut DenseVector,
) -> Result<()> {
    accumulate(state, g, hyper.beta1, hyper.beta2)?;
    write_update(state, alpha, hyper.eps, one_minus_pow(hyper.beta1, n), one_minus_pow(hyper.beta2, n), update)
}

/// Bias-corrected moments at inner step `k` of outer iteration `t`.
///
/// The exponent is `k` when `(m, v)` are reset every outer loop and
/// `k + (t-1)·inner_m` when they are carried.
#[allow(clippy::too_many_arguments)]
pub fn bias_correct(
    m: &DenseVector,
    v: &DenseVector,
    k: usize,
    t: usize,
    inner_m: usize,
    option: super::ResetOption,
    beta1: f64,
    beta2: f64,
) -> Result<(DenseVector, DenseVector)> {
    if k == 0 || k > inner_m || t == 0 {
        return Err(Error::argument(format!("need 1 <= k <= m and t >= 1, got k={k}, m={inner_m}, t={t}")));
    }
    let n = option.exponent(k, t, inner_m);
    Ok((m.scaled(1.0 / one_minus_pow(beta1, n)), v.scaled(1.0 / one_minus_pow(beta2, n))))
}

pub(crate) fn check_step_bound(update: &DenseVector, bound: f64) -> Result<()> {
    let observed = update.norm_inf();
    if observed > bound * ROUNDING_SLACK {
        return Err(Error::BoundViolation { bound: "step length", observed, limit: bound });
    }
    Ok(())
}

pub(crate) fn check_state_bounds(state: &AdamState, g_bound: f64) -> Result<()> {
    let (m, v) = (state.m.norm2(), state.v.norm2());
    if m > 3.0 * g_bound * ROUNDING_SLACK {
        return Err(Error::BoundViolation { bound: "first moment", observed: m, limit: 3.0 * g_bound });
    }
    if v > 9.0 * g_bound * g_bound * ROUNDING_SLACK {
        return Err(Error::BoundViolation { bound: "second moment", observed: v, limit: 9.0 * g_bound * g_bound });
    }
    Ok(())
}

pub(crate) fn check_gradient_bound(g: &DenseVector, g_bound: f64) -> Result<()> {
    let observed = g.norm2();
    if observed > g_bound * ROUNDING_SLACK {
        return Err(Error::BoundViolation { bound: "gradient", observed, limit: g_bound });
    }
    Ok(())
}

/// The plain algorithm for `steps` iterations from `w1`.
pub fn run_general_adam<P: StochasticProblem>(
    problem: &P,
    hyper: &AdamHyper,
    w1: &DenseVector,
    steps: usize,
    rng: &mut RandomSource,
    options: &RunOptions,
) -> Result<RunRecord> {
    if steps == 0 {
        return Err(Error::argument("need at least one step"));
    }
    w1.check_len(problem.dim())?;
    w1.check_finite("starting point")?;
    let d = problem.dim();
    let mut w = w1.clone();
    let mut state = AdamState::new(d);
    let mut g = DenseVector::zeros(d);
    let mut update = DenseVector::zeros(d);
    let mut sampler = problem.sampler();
    let mut seed = P::Seed::default();
    let mut rec = Recorder::new(options, &w);
    rec.evaluate(problem, &w, 0, 0.0);

    for t in 1..=steps {
        let spent = rec.cost();
        if !rec.affordable(spent, 1.0) {
            break;
        }
        let at = StepLocation { step: t, outer: t, inner: 0 };
        problem.sample(&mut sampler, rng, &mut seed);
        problem.estimate_into(&w, &seed, &mut g);
        if rec.wants_point(t) {
            rec.record.points.push(super::RecordedPoint { step: t, outer: t, inner: 0, w: w.clone(), snapshot: None });
        }
        adam_step(&mut state, &g, hyper, t, &mut update).map_err(|e| e.at(at))?;
        let alpha = hyper.lr.at(t);
        if options.check_step_bound {
            check_step_bound(&update, hyper.step_bound(alpha)).map_err(|e| e.at(at))?;
        }
        if let Some(gb) = options.state_bound {
            check_gradient_bound(&g, gb).and_then(|_| check_state_bounds(&state, gb)).map_err(|e| e.at(at))?;
        }
        w.add_scaled(1.0, &update);
        w.check_finite("iterate").map_err(|e| e.at(at))?;
        rec.push_step(alpha, &g, &update, &w, &state.m, &state.v, spent + 1.0);
        if rec.wants_eval(t) {
            rec.evaluate(problem, &w, t, spent + 1.0);
        }
    }
    let (steps_done, cost) = (rec.record.steps, rec.cost());
    rec.evaluate(problem, &w, steps_done, cost);
    Ok(rec.finish(&w))
}
