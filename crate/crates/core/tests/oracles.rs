//! Sampling and gradient oracles computed independently of the library's
//! own enumeration helpers.

use vradam_core::problems::{
    make_logistic, make_mlp, make_quadratic, BatchSampler, Dataset, FiniteSum, Minibatch, QuadraticSpec,
    ScalarQuadraticSum, StochasticProblem,
};
use vradam_core::verify::{audit_gradients, enumerate_batches_expectation};
use vradam_core::{DenseVector, RandomSource};

fn subsets(n: usize, b: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == b).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}

fn small_dataset(n: usize, d: usize, k: usize, seed: u64) -> Dataset {
    let mut rng = RandomSource::new(seed, 0);
    let x = (0..n * d).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let y = (0..n).map(|i| i % k).collect();
    Dataset::new(x, y, d, k).unwrap()
}

#[test]
fn sampler_draws_every_subset_uniformly() {
    let (n, b, draws) = (6usize, 3usize, 200_000usize);
    let all = subsets(n, b);
    let mut counts = vec![0usize; all.len()];
    let mut sampler = BatchSampler::new(n, b).unwrap();
    let mut rng = RandomSource::new(5, 0);
    let mut batch = Vec::new();
    for _ in 0..draws {
        sampler.draw(&mut rng, &mut batch);
        batch.sort_unstable();
        let mut uniq = batch.clone();
        uniq.dedup();
        assert_eq!(uniq.len(), b, "sampling is without replacement");
        counts[all.iter().position(|s| *s == batch).unwrap()] += 1;
    }
    // Pearson statistic on 19 degrees of freedom; 43.8 is its 0.999 quantile.
    let e = draws as f64 / all.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    assert!(chi2 < 43.8, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn enumerated_mean_matches_hand_enumeration() {
    let s = ScalarQuadraticSum::new(vec![0.5, 1.0, 1.5, 2.0, 3.0], vec![1.0, -2.0, 0.0, 4.0, -1.0]).unwrap();
    for b in 1..=5 {
        for w in [-2.0, 0.0, 1.25] {
            let all = subsets(5, b);
            let by_hand: f64 = all
                .iter()
                .map(|batch| batch.iter().map(|&i| s.curvature()[i] * w + s.linear()[i]).sum::<f64>() / b as f64)
                .sum::<f64>()
                / all.len() as f64;
            let full: f64 = (0..5).map(|i| s.curvature()[i] * w + s.linear()[i]).sum::<f64>() / 5.0;
            let lib = enumerate_batches_expectation(&s, &DenseVector::scalar(w), b).unwrap();
            assert!((lib[0] - by_hand).abs() < 1e-13 && (by_hand - full).abs() < 1e-13);
        }
    }
}

#[test]
fn minibatch_estimates_average_to_the_full_gradient() {
    let p = make_logistic(small_dataset(9, 3, 3, 2), 0.0).unwrap();
    let mb = Minibatch::new(&p, 4).unwrap();
    let w = DenseVector::new((0..p.dim()).map(|i| 0.1 * i as f64 - 0.5).collect()).unwrap();
    let full = mb.full_gradient(&w);
    let mut rng = RandomSource::new(1, 0);
    let mut sampler = mb.sampler();
    let mut acc = vec![0.0; p.dim()];
    let mut seed = Vec::new();
    let draws = 100_000;
    for _ in 0..draws {
        mb.sample(&mut sampler, &mut rng, &mut seed);
        let g = mb.estimate(&w, &seed);
        acc.iter_mut().zip(g.as_slice()).for_each(|(a, x)| *a += x);
    }
    for (a, f) in acc.iter().zip(full.as_slice()) {
        assert!((a / draws as f64 - f).abs() < 5e-3, "{} vs {f}", a / draws as f64);
    }
}

#[test]
fn binary_logistic_gradient_by_hand() {
    // One sample x = (2, -1), label 1, two classes: ∂/∂z_k = softmax_k - [k = y].
    let d = Dataset::new(vec![2.0, -1.0], vec![1], 2, 2).unwrap();
    let p = make_logistic(d, 0.0).unwrap();
    let w = DenseVector::new(vec![0.3, -0.2, 0.1, -0.4, 0.5, 0.2]).unwrap();
    let z0: f64 = 0.3 * 2.0 + -0.2 * -1.0 + 0.1;
    let z1: f64 = -0.4 * 2.0 + -0.5 + 0.2;
    let s1 = 1.0 / (1.0 + (z0 - z1).exp());
    let s0 = 1.0 - s1;
    let expected = [s0 * 2.0, -s0, s0, (s1 - 1.0) * 2.0, -(s1 - 1.0), s1 - 1.0];
    let g = p.component_gradient(0, &w);
    for (a, b) in g.as_slice().iter().zip(expected) {
        assert!((a - b).abs() < 1e-15, "{a} vs {b}");
    }
    let loss = (z0.exp() + z1.exp()).ln() - z1;
    assert!((p.component_loss(0, &w) - loss).abs() < 1e-15);
}

/// Central differences written out here rather than borrowed from the crate.
fn central_difference(f: impl Fn(&DenseVector) -> f64, w: &DenseVector, h: f64) -> Vec<f64> {
    (0..w.len())
        .map(|i| {
            let (mut a, mut b) = (w.clone(), w.clone());
            a.as_mut_slice()[i] += h;
            b.as_mut_slice()[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn analytic_gradients_match_central_differences() {
    let data = small_dataset(7, 4, 3, 3);
    let mut rng = RandomSource::new(4, 0);
    let logistic = make_logistic(data.clone(), 0.2).unwrap();
    let mlp = make_mlp(data, 5).unwrap();
    let quad = make_quadratic(QuadraticSpec::new(0.5, 2.0, 3, 0.3, 5.0)).unwrap();
    let w_log = DenseVector::new((0..logistic.dim()).map(|_| rng.normal()).collect()).unwrap();
    let w_mlp = mlp.init_params(&mut rng);
    let w_quad = DenseVector::new(vec![0.05, -0.02, 0.01]).unwrap();
    for (p, w) in [(&logistic as &dyn FiniteSum, &w_log), (&mlp, &w_mlp), (&quad, &w_quad)] {
        let mut g = DenseVector::zeros(w.len());
        p.full_gradient_sum_into(w, &mut g);
        let fd = central_difference(|x| p.full_loss(x), w, 1e-6);
        for (a, b) in g.as_slice().iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn audit_passes_the_analytic_logistic_gradient() {
    let p = make_logistic(small_dataset(6, 2, 2, 6), 0.0).unwrap();
    let mb = Minibatch::new(&p, 2).unwrap();
    let mut rng = RandomSource::new(0, 0);
    let ok = audit_gradients(&mb, &DenseVector::zeros(p.dim()), 1.0, 4, 1e-5, &mut rng, 1e-6).unwrap();
    assert!(ok.passed, "{ok}");
}
