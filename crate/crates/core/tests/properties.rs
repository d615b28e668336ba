//! Randomised invariants of the optimizers.

use proptest::prelude::*;
use vradam_core::optimizers::{
    adam_step, bias_correct, one_minus_pow, run_vradam_finite_sum, AdamHyper, AdamState, LearningRate, ResetOption,
    RunOptions, Schedule, VradamConfig,
};
use vradam_core::problems::{make_quadratic, FiniteSum, QuadraticSpec};
use vradam_core::{DenseVector, RandomSource};

fn gradients(d: usize, g: f64) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 1..60).prop_map(move |rows| {
        rows.into_iter()
            .map(|r| {
                // Scale onto the ball of radius g (zero stays zero).
                let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 1.0 {
                    r.iter().map(|x| x * g / n).collect()
                } else {
                    r.iter().map(|x| x * g).collect()
                }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn moments_of_bounded_gradients_stay_bounded(
        gs in gradients(3, 2.5),
        beta1 in 0.0f64..0.99,
        beta2 in 0.0f64..0.9999,
    ) {
        let hyper = AdamHyper::new(LearningRate::constant(0.1).unwrap(), beta1, beta2, 1e-8).unwrap();
        let mut s = AdamState::new(3);
        let mut u = DenseVector::zeros(3);
        for (t, g) in gs.iter().enumerate() {
            adam_step(&mut s, &DenseVector::new(g.clone()).unwrap(), &hyper, t + 1, &mut u).unwrap();
            // Convex combinations of points in the ball (and their squares).
            prop_assert!(s.m.norm2() <= 2.5 * (1.0 + 1e-12));
            prop_assert!(s.v.norm2() <= 6.25 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn momentum_free_steps_respect_the_step_bound(
        gs in gradients(2, 100.0),
        beta2 in 0.5f64..0.9999,
        alpha in 1e-4f64..1.0,
    ) {
        let hyper = AdamHyper::new(LearningRate::constant(alpha).unwrap(), 0.0, beta2, 1e-12).unwrap();
        let bound = hyper.step_bound(alpha);
        let mut s = AdamState::new(2);
        let mut u = DenseVector::zeros(2);
        for (t, g) in gs.iter().enumerate() {
            adam_step(&mut s, &DenseVector::new(g.clone()).unwrap(), &hyper, t + 1, &mut u).unwrap();
            prop_assert!(u.norm_inf() <= bound * (1.0 + 1e-12), "{} > {bound}", u.norm_inf());
        }
    }

    #[test]
    fn bias_correction_exponents(k in 1usize..20, t in 1usize..6, m in 20usize..40, b1 in 0.1f64..0.99, b2 in 0.5f64..0.999) {
        let (mv, vv) = (DenseVector::scalar(0.7), DenseVector::scalar(0.3));
        let (ma, va) = bias_correct(&mv, &vv, k, t, m, ResetOption::A, b1, b2).unwrap();
        let (mb, vb) = bias_correct(&mv, &vv, k, t, m, ResetOption::B, b1, b2).unwrap();
        let n = (k + (t - 1) * m) as i32;
        prop_assert!((ma[0] - 0.7 / (1.0 - b1.powi(k as i32))).abs() <= 1e-12 * ma[0].abs());
        prop_assert!((va[0] - 0.3 / (1.0 - b2.powi(k as i32))).abs() <= 1e-12 * va[0].abs());
        prop_assert!((mb[0] - 0.7 / (1.0 - b1.powi(n))).abs() <= 1e-12 * mb[0].abs());
        prop_assert!((vb[0] - 0.3 / (1.0 - b2.powi(n))).abs() <= 1e-12 * vb[0].abs());
        if t == 1 {
            prop_assert_eq!(ma, mb);
            prop_assert_eq!(va, vb);
        }
    }

    #[test]
    fn schedules_follow_their_formulas(base in 1e-4f64..1.0, gamma in 0.05f64..0.99, period in 1usize..40, t in 1usize..500) {
        let tick = t.div_ceil(period) as f64;
        let c = LearningRate::constant(base).unwrap().with_period(period).unwrap();
        let inv = LearningRate::new(base, Schedule::InverseTime).unwrap().with_period(period).unwrap();
        let exp = LearningRate::new(base, Schedule::Exponential { gamma }).unwrap().with_period(period).unwrap();
        prop_assert_eq!(c.at(t), base);
        prop_assert!((inv.at(t) - base / tick).abs() <= 1e-15 * base);
        prop_assert!((exp.at(t) - base * gamma.powf(tick)).abs() <= 1e-12 * base);
    }

    #[test]
    fn vradam_runs_are_bounded_and_reproducible(
        seed in 0u64..1000,
        noise in 0.0f64..1.0,
        option_b in any::<bool>(),
        m in 1usize..12,
    ) {
        let q = make_quadratic(QuadraticSpec { seed, ..QuadraticSpec::new(0.5, 1.5, 3, noise, 4.0) }).unwrap();
        let g = q.constants().gradient_bound.unwrap();
        let option = if option_b { ResetOption::B } else { ResetOption::A };
        let cfg = VradamConfig::new(AdamHyper::practical(LearningRate::constant(0.3).unwrap()).unwrap(), m, 2, option).unwrap();
        let opts = RunOptions { state_bound: Some(g), ..Default::default() };
        let run = || run_vradam_finite_sum(&q, &cfg, &DenseVector::filled(3, 2.0), 8, &mut RandomSource::new(seed, 9), &opts);
        let a = run().unwrap();
        prop_assert!(a.max_m_norm() <= 3.0 * g && a.max_v_norm() <= 9.0 * g * g);
        prop_assert_eq!(a.full_gradient_evals, 8);
        prop_assert_eq!(a.steps, 8 * m);
        prop_assert_eq!(&a, &run().unwrap());
    }
}

#[test]
fn one_minus_pow_is_continuous_at_the_log_switch() {
    for beta in [0.9, 0.999, 0.999_999_9] {
        let below = one_minus_pow(beta, 1_000_000);
        let above = one_minus_pow(beta, 1_000_001);
        let direct = 1.0 - beta.powf(1_000_001.0);
        assert!(above >= below);
        assert!((above - direct).abs() <= 1e-12, "{beta}: {above} vs {direct}");
    }
}
