use super::record::{Recorder, RunOptions, RunRecord};
use super::{LearningRate, RecordedPoint};
use crate::error::StepLocation;
use crate::problems::StochasticProblem;
use crate::{DenseVector, Error, RandomSource, Result};

/// `w ← w - α_t·G(w; ξ_t)` for `steps` iterations. The moment series of the
/// record stay zero.
pub fn run_sgd<P: StochasticProblem>(
    problem: &P,
    lr: &LearningRate,
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
    let zero = DenseVector::zeros(d);
    let mut w = w1.clone();
    let mut g = DenseVector::zeros(d);
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
        g.check_finite("gradient estimate").map_err(|e| e.at(at))?;
        if rec.wants_point(t) {
            rec.record.points.push(RecordedPoint { step: t, outer: t, inner: 0, w: w.clone(), snapshot: None });
        }
        let alpha = lr.at(t);
        let update = g.scaled(-alpha);
        w.add_scaled(1.0, &update);
        w.check_finite("iterate").map_err(|e| e.at(at))?;
        rec.push_step(alpha, &g, &update, &w, &zero, &zero, spent + 1.0);
        if rec.wants_eval(t) {
            rec.evaluate(problem, &w, t, spent + 1.0);
        }
    }
    let (steps_done, cost) = (rec.record.steps, rec.cost());
    rec.evaluate(problem, &w, steps_done, cost);
    Ok(rec.finish(&w))
}
