//! Multinomial logistic regression, one component per sample.

use alloc::vec;
use alloc::vec::Vec;

use super::{Dataset, FiniteSum, ProblemConstants};
use crate::{DenseVector, Error, Result};

/// Cross-entropy of a linear softmax model with a bias per class, plus
/// `(l2/2)‖w‖²` on every parameter.
///
/// Parameters are laid out class by class: `w[k(d+1) .. k(d+1)+d]` are the
/// weights of class `k` and `w[k(d+1)+d]` its bias.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    data: Dataset,
    l2: f64,
    max_row_norm2: f64,
}

pub fn make_logistic(data: Dataset, l2: f64) -> Result<LogisticRegression> {
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(Error::argument("l2 must be finite and >= 0"));
    }
    if data.num_samples() == 0 {
        return Err(Error::argument("empty dataset"));
    }
    // Squared norm of the bias-augmented row (x, 1).
    let max_row_norm2 = (0..data.num_samples())
        .map(|n| data.row(n).iter().map(|x| x * x).sum::<f64>() + 1.0)
        .fold(0.0, f64::max);
    Ok(LogisticRegression { data, l2, max_row_norm2 })
}

impl LogisticRegression {
    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn num_params(&self) -> usize {
        self.data.num_classes() * (self.data.dim() + 1)
    }

    fn logits(&self, n: usize, w: &[f64], out: &mut [f64]) {
        let d = self.data.dim();
        let x = self.data.row(n);
        for (k, z) in out.iter_mut().enumerate() {
            let wk = &w[k * (d + 1)..(k + 1) * (d + 1)];
            *z = wk[d] + wk[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// Turns logits into probabilities in place and returns `log Σ exp z`.
    fn softmax_in_place(z: &mut [f64]) -> f64 {
        let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in z.iter_mut() {
            *v = libm::exp(*v - zmax);
            total += *v;
        }
        for v in z.iter_mut() {
            *v /= total;
        }
        zmax + libm::log(total)
    }

    fn penalty(&self, w: &DenseVector) -> f64 {
        if self.l2 == 0.0 {
            0.0
        } else {
            0.5 * self.l2 * w.dot(w)
        }
    }

    /// Fraction of samples whose argmax class equals the label.
    pub fn accuracy(&self, w: &DenseVector) -> f64 {
        let mut z = vec![0.0; self.data.num_classes()];
        let mut correct = 0usize;
        for n in 0..self.data.num_samples() {
            self.logits(n, w.as_slice(), &mut z);
            let best = (0..z.len()).fold(0, |b, k| if z[k] > z[b] { k } else { b });
            correct += (best == self.data.label(n)) as usize;
        }
        correct as f64 / self.data.num_samples() as f64
    }
}

impl FiniteSum for LogisticRegression {
    fn num_components(&self) -> usize {
        self.data.num_samples()
    }

    fn dim(&self) -> usize {
        self.num_params()
    }

    fn component_loss(&self, n: usize, w: &DenseVector) -> f64 {
        let mut z = vec![0.0; self.data.num_classes()];
        self.logits(n, w.as_slice(), &mut z);
        let zy = z[self.data.label(n)];
        let lse = Self::softmax_in_place(&mut z);
        lse - zy + self.penalty(w)
    }

    fn add_component_gradient(&self, n: usize, w: &DenseVector, scale: f64, out: &mut [f64]) {
        let (d, k_classes) = (self.data.dim(), self.data.num_classes());
        let mut p: Vec<f64> = vec![0.0; k_classes];
        self.logits(n, w.as_slice(), &mut p);
        Self::softmax_in_place(&mut p);
        p[self.data.label(n)] -= 1.0;
        let x = self.data.row(n);
        for (k, &r) in p.iter().enumerate() {
            let (o, s) = (&mut out[k * (d + 1)..(k + 1) * (d + 1)], scale * r);
            for (oi, xi) in o[..d].iter_mut().zip(x) {
                *oi += s * xi;
            }
            o[d] += s;
        }
        if self.l2 != 0.0 {
            for (oi, wi) in out.iter_mut().zip(w.as_slice()) {
                *oi += scale * self.l2 * wi;
            }
        }
    }

    fn constants(&self) -> ProblemConstants {
        // The softmax Hessian diag(p) - ppᵀ has spectral norm at most 1/2, and
        // ‖p - e_y‖₂ ≤ √2.
        let strongly_convex = self.l2 > 0.0;
        ProblemConstants {
            lipschitz: Some(0.5 * self.max_row_norm2 + self.l2),
            gradient_bound: (!strongly_convex).then(|| libm::sqrt(2.0 * self.max_row_norm2)),
            strong_convexity: strongly_convex.then_some(self.l2),
            optimal_value: None,
            optimizer: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::finite_difference_gradient;
    use crate::RandomSource;

    fn random_data(n: usize, d: usize, k: usize, seed: u64) -> Dataset {
        let mut rng = RandomSource::new(seed, 0);
        let features = (0..n * d).map(|_| rng.next_f64()).collect();
        let labels = (0..n).map(|i| if i < k { i } else { rng.index(k) }).collect();
        Dataset::new(features, labels, d, k).unwrap()
    }

    #[test]
    fn uniform_softmax_loss_is_ln2() {
        let p = make_logistic(random_data(10, 3, 2, 1), 0.0).unwrap();
        let w = DenseVector::zeros(p.dim());
        for n in 0..10 {
            assert!((p.component_loss(n, &w) - core::f64::consts::LN_2).abs() < 1e-15);
        }
    }

    #[test]
    fn component_gradients_match_finite_differences() {
        let p = make_logistic(random_data(30, 4, 3, 2), 0.01).unwrap();
        let mut rng = RandomSource::new(3, 0);
        for _ in 0..100 {
            let n = rng.index(30);
            let w = DenseVector::new((0..p.dim()).map(|_| rng.uniform(-2.0, 2.0)).collect()).unwrap();
            let fd = finite_difference_gradient(|x| p.component_loss(n, x), &w, 1e-6).unwrap();
            let g = p.component_gradient(n, &w);
            let rel = g.distance(&fd) / g.norm2().max(1.0);
            assert!(rel <= 1e-5, "rel={rel}");
        }
    }

    #[test]
    fn balanced_zero_features_optimum_is_zero() {
        let data = Dataset::new(vec![0.0; 8], vec![0, 1, 0, 1], 2, 2).unwrap();
        let p = make_logistic(data, 0.1).unwrap();
        let w = DenseVector::zeros(p.dim());
        let mut g = DenseVector::zeros(p.dim());
        p.full_gradient_sum_into(&w, &mut g);
        assert_eq!(g.norm_inf(), 0.0);
        assert_eq!(p.constants().strong_convexity, Some(0.1));
    }

    #[test]
    fn declared_gradient_bound_holds() {
        let p = make_logistic(random_data(40, 5, 4, 4), 0.0).unwrap();
        let bound = p.constants().gradient_bound.unwrap();
        let mut rng = RandomSource::new(5, 0);
        for _ in 0..2000 {
            let n = rng.index(40);
            let w = DenseVector::new((0..p.dim()).map(|_| rng.uniform(-50.0, 50.0)).collect()).unwrap();
            assert!(p.component_gradient(n, &w).norm2() <= bound);
        }
    }

    #[test]
    fn rejects_negative_penalty() {
        assert!(make_logistic(random_data(4, 2, 2, 6), -1.0).is_err());
    }
}
