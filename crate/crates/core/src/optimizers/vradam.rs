use alloc::format;

use super::adam::{check_gradient_bound, check_state_bounds, corrected_step};
use super::record::{Recorder, RunOptions, RunRecord};
use super::{AdamHyper, AdamState, RecordedPoint};
use crate::error::StepLocation;
use crate::problems::{FiniteSum, Minibatch, StochasticProblem};
use crate::{DenseVector, Error, RandomSource, Result};

/// What happens to `(m, v)` at the start of each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResetOption {
    /// Zero both moments; bias-correction exponent `k`.
    A,
    /// Carry both moments; bias-correction exponent `k + (t-1)m`.
    B,
}

impl ResetOption {
    pub fn exponent(self, k: usize, t: usize, inner_m: usize) -> u64 {
        match self {
            ResetOption::A => k as u64,
            ResetOption::B => (k + (t - 1) * inner_m) as u64,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ResetOption::A => "reset",
            ResetOption::B => "no-reset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VradamConfig {
    pub hyper: AdamHyper,
    /// Inner steps per outer iteration.
    pub inner_length: usize,
    /// Only read by [`run_vradam_finite_sum`]; a general problem carries its
    /// own seed distribution.
    pub batch_size: usize,
    pub option: ResetOption,
}

impl VradamConfig {
    pub fn new(hyper: AdamHyper, inner_length: usize, batch_size: usize, option: ResetOption) -> Result<Self> {
        if inner_length == 0 || batch_size == 0 {
            return Err(Error::argument(format!("need m, b >= 1, got m={inner_length}, b={batch_size}")));
        }
        Ok(VradamConfig { hyper, inner_length, batch_size, option })
    }
}

/// `G(w_k; ξ) - G(w̃; ξ) + ∇F(w̃)` into `out`; `scratch` receives `G(w̃; ξ)`.
pub fn vradam_inner_direction<P: StochasticProblem>(
    problem: &P,
    w_k: &DenseVector,
    snapshot: &DenseVector,
    seed: &P::Seed,
    full_grad: &DenseVector,
    scratch: &mut DenseVector,
    out: &mut DenseVector,
) -> Result<()> {
    for x in [w_k, snapshot, full_grad, &*scratch, &*out] {
        x.check_len(problem.dim())?;
    }
    problem.estimate_into(w_k, seed, out);
    problem.estimate_into(snapshot, seed, scratch);
    for ((o, s), f) in out.as_mut_slice().iter_mut().zip(scratch.as_slice()).zip(full_grad.as_slice()) {
        *o = (*o - s) + f;
    }
    Ok(())
}

/// `T_outer` outer iterations from `w̃₁`.
///
/// Cost model: the full gradient costs `problem.full_gradient_cost()` units
/// and each inner step two estimator evaluations. `α_t` is read once per outer
/// iteration.
pub fn run_vradam<P: StochasticProblem>(
    problem: &P,
    cfg: &VradamConfig,
    w1: &DenseVector,
    outer_iterations: usize,
    rng: &mut RandomSource,
    options: &RunOptions,
) -> Result<RunRecord> {
    if outer_iterations == 0 {
        return Err(Error::argument("need at least one outer iteration"));
    }
    w1.check_len(problem.dim())?;
    w1.check_finite("starting point")?;
    let d = problem.dim();
    let m_len = cfg.inner_length;
    let full_cost = problem.full_gradient_cost();

    let mut snapshot = w1.clone();
    let mut w = w1.clone();
    let mut state = AdamState::new(d);
    let mut full = DenseVector::zeros(d);
    let mut g = DenseVector::zeros(d);
    let mut scratch = DenseVector::zeros(d);
    let mut update = DenseVector::zeros(d);
    let mut sampler = problem.sampler();
    let mut seed = P::Seed::default();
    let mut rec = Recorder::new(options, &w);
    rec.evaluate(problem, &w, 0, 0.0);
    rec.record.snapshots.push(snapshot.clone());

    'outer: for t in 1..=outer_iterations {
        let mut spent = rec.cost();
        if !rec.affordable(spent, full_cost) {
            break;
        }
        let alpha = cfg.hyper.lr.at(t);
        problem.full_gradient_into(&snapshot, &mut full);
        let at_outer = StepLocation { step: rec.record.steps, outer: t, inner: 0 };
        full.check_finite("full gradient").map_err(|e| e.at(at_outer))?;
        rec.record.full_gradient_evals += 1;
        spent += full_cost;
        if cfg.option == ResetOption::A {
            state.reset();
        }
        rec.record.outer_start_m_norm.push(state.m.norm2());
        rec.record.outer_start_v_norm.push(state.v.norm2());
        w.copy_from(&snapshot);

        for k in 1..=m_len {
            if !rec.affordable(spent, 2.0) {
                // The full gradient was paid for; charge it even if no inner
                // step follows.
                if let Some(c) = rec.record.cost.last_mut() {
                    *c = spent;
                }
                break 'outer;
            }
            let step = rec.record.steps + 1;
            let at = StepLocation { step, outer: t, inner: k };
            problem.sample(&mut sampler, rng, &mut seed);
            vradam_inner_direction(problem, &w, &snapshot, &seed, &full, &mut scratch, &mut g)
                .map_err(|e| e.at(at))?;
            if rec.wants_point(step) {
                rec.record.points.push(RecordedPoint {
                    step,
                    outer: t,
                    inner: k,
                    w: w.clone(),
                    snapshot: Some(snapshot.clone()),
                });
            }
            let n = cfg.option.exponent(k, t, m_len);
            state.k = k;
            state.t = step;
            if let Some(gb) = options.state_bound {
                // The declared bound is on the raw estimates at both points.
                problem.estimate_into(&w, &seed, &mut update);
                check_gradient_bound(&scratch, gb)
                    .and_then(|_| check_gradient_bound(&update, gb))
                    .map_err(|e| e.at(at))?;
            }
            corrected_step(&mut state, &g, &cfg.hyper, alpha, n, &mut update).map_err(|e| e.at(at))?;
            if let Some(gb) = options.state_bound {
                check_state_bounds(&state, gb).map_err(|e| e.at(at))?;
            }
            w.add_scaled(1.0, &update);
            w.check_finite("iterate").map_err(|e| e.at(at))?;
            spent += 2.0;
            rec.push_step(alpha, &g, &update, &w, &state.m, &state.v, spent);
            if rec.wants_eval(step) {
                rec.evaluate(problem, &w, step, spent);
            }
        }
        snapshot.copy_from(&w);
        rec.record.snapshots.push(snapshot.clone());
    }
    let (steps_done, cost) = (rec.record.steps, rec.cost());
    rec.evaluate(problem, &w, steps_done, cost);
    Ok(rec.finish(&w))
}

/// [`run_vradam`] on a finite sum sampled in batches of `cfg.batch_size`.
pub fn run_vradam_finite_sum<F: FiniteSum>(
    problem: &F,
    cfg: &VradamConfig,
    w1: &DenseVector,
    outer_iterations: usize,
    rng: &mut RandomSource,
    options: &RunOptions,
) -> Result<RunRecord> {
    let mb = Minibatch::new(problem, cfg.batch_size)?;
    run_vradam(&mb, cfg, w1, outer_iterations, rng, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::{adam_step, bias_correct, LearningRate};
    use crate::problems::{make_op_delta, make_quadratic, QuadraticSpec};

    fn hyper(alpha: f64) -> AdamHyper {
        AdamHyper::practical(LearningRate::constant(alpha).unwrap()).unwrap()
    }

    #[test]
    fn first_inner_direction_is_the_full_gradient() {
        let p = make_op_delta(10.0).unwrap();
        let w = DenseVector::scalar(-37.0);
        let full = p.full_gradient(&w);
        let (mut s, mut out) = (DenseVector::zeros(1), DenseVector::zeros(1));
        for seed in [crate::problems::OpBranch::Rare, crate::problems::OpBranch::Common] {
            vradam_inner_direction(&p, &w, &w, &seed, &full, &mut s, &mut out).unwrap();
            assert_eq!(out, full);
        }
    }

    #[test]
    fn direction_rejects_dimension_mismatch() {
        let p = make_op_delta(10.0).unwrap();
        let (w, two) = (DenseVector::scalar(0.0), DenseVector::zeros(2));
        let (mut s, mut out) = (DenseVector::zeros(1), DenseVector::zeros(1));
        let r = vradam_inner_direction(&p, &two, &w, &Default::default(), &w, &mut s, &mut out);
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }

    #[test]
    fn bias_correction_exponents() {
        let m = DenseVector::scalar(0.1);
        let v = DenseVector::scalar(0.001);
        let (ma, va) = bias_correct(&m, &v, 1, 3, 5, ResetOption::A, 0.9, 0.999).unwrap();
        assert!((ma[0] - 1.0).abs() < 1e-14 && (va[0] - 1.0).abs() < 1e-12);
        let (mb, _) = bias_correct(&m, &v, 1, 2, 5, ResetOption::B, 0.9, 0.999).unwrap();
        assert!((mb[0] - 0.1 / (1.0 - libm::pow(0.9, 6.0))).abs() < 1e-15);
        let (m0, _) = bias_correct(&m, &v, 4, 7, 5, ResetOption::B, 0.0, 0.999).unwrap();
        assert_eq!(m0, m);
        assert!(bias_correct(&m, &v, 0, 1, 5, ResetOption::A, 0.9, 0.999).is_err());
        assert!(bias_correct(&m, &v, 6, 1, 5, ResetOption::A, 0.9, 0.999).is_err());
    }

    #[test]
    fn zero_variance_outer_loop_is_corrected_adam() {
        let q = make_quadratic(QuadraticSpec::new(0.5, 1.0, 3, 0.0, 10.0)).unwrap();
        let w1 = DenseVector::new(alloc::vec![2.0, -1.0, 4.0]).unwrap();
        let cfg = VradamConfig::new(hyper(0.1), 20, 2, ResetOption::A).unwrap();
        let rec = run_vradam_finite_sum(&q, &cfg, &w1, 1, &mut RandomSource::new(1, 0), &RunOptions::default()).unwrap();

        let h = hyper(0.1).with_bias_correction(true);
        let mut s = AdamState::new(3);
        let (mut w, mut u, mut g) = (w1.clone(), DenseVector::zeros(3), DenseVector::zeros(3));
        for t in 1..=20 {
            q.full_gradient_sum_into(&w, &mut g);
            adam_step(&mut s, &g, &h, t, &mut u).unwrap();
            w.add_scaled(1.0, &u);
            assert!((w[0] - rec.w_first[t - 1]).abs() < 1e-12);
        }
        assert!(w.distance(&rec.final_iterate) < 1e-12);
    }

    #[test]
    fn options_agree_through_the_first_outer_loop() {
        let p = make_op_delta(10.0).unwrap();
        let w1 = DenseVector::scalar(-80.0);
        let run = |option| {
            let cfg = VradamConfig::new(hyper(0.01), 8, 1, option).unwrap();
            run_vradam(&p, &cfg, &w1, 3, &mut RandomSource::new(4, 2), &RunOptions::default()).unwrap()
        };
        let (a, b) = (run(ResetOption::A), run(ResetOption::B));
        assert_eq!(a.w_first[..8], b.w_first[..8]);
        assert_eq!(a.snapshots[1], b.snapshots[1]);
        assert_ne!(a.w_first[8..], b.w_first[8..]);
    }

    #[test]
    fn reset_and_economy() {
        let p = make_op_delta(10.0).unwrap();
        let cfg = VradamConfig::new(hyper(0.01), 8, 1, ResetOption::A).unwrap();
        let r = run_vradam(&p, &cfg, &DenseVector::scalar(-80.0), 6, &mut RandomSource::new(1, 0), &RunOptions::default())
            .unwrap();
        assert_eq!(r.full_gradient_evals, 6);
        assert_eq!(r.steps, 48);
        assert_eq!(r.snapshots.len(), 7);
        assert!(r.outer_start_m_norm.iter().chain(&r.outer_start_v_norm).all(|&x| x == 0.0));
        assert_eq!(r.total_cost(), 6.0 + 96.0);
    }

    #[test]
    fn budget_charges_full_gradient_when_no_inner_step_fits() {
        let q = make_quadratic(QuadraticSpec::new(0.5, 1.0, 2, 0.0, 10.0)).unwrap();
        let cfg = VradamConfig::new(hyper(0.1), 4, 2, ResetOption::A).unwrap();
        // Full gradient costs N/b = 4; an outer loop costs 4 + 8 = 12.
        let opts = RunOptions { cost_budget: Some(17.0), ..Default::default() };
        let r = run_vradam_finite_sum(&q, &cfg, &DenseVector::filled(2, 1.0), 10, &mut RandomSource::new(1, 0), &opts)
            .unwrap();
        assert_eq!(r.full_gradient_evals, 2);
        assert_eq!(r.steps, 4);
        assert_eq!(r.total_cost(), 16.0);
    }
}
