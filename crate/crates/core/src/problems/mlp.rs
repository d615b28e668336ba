//! A two-layer tanh network with a softmax cross-entropy head.

use alloc::vec;

use super::{Dataset, FiniteSum, ProblemConstants};
use crate::{DenseVector, Error, RandomSource, Result};

/// Layer widths `input → hidden → classes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpShape {
    pub input: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl MlpShape {
    /// Parameters in the order `W1 (h×d), b1 (h), W2 (K×h), b2 (K)`.
    pub fn num_params(&self) -> usize {
        self.hidden * (self.input + 1) + self.classes * (self.hidden + 1)
    }
}

#[derive(Debug, Clone)]
pub struct Mlp {
    data: Dataset,
    shape: MlpShape,
}

pub fn make_mlp(data: Dataset, hidden: usize) -> Result<Mlp> {
    if hidden == 0 {
        return Err(Error::argument("hidden width must be >= 1"));
    }
    let shape = MlpShape { input: data.dim(), hidden, classes: data.num_classes() };
    Ok(Mlp { data, shape })
}

struct Split<'a> {
    w1: &'a [f64],
    b1: &'a [f64],
    w2: &'a [f64],
    b2: &'a [f64],
}

impl Mlp {
    pub fn shape(&self) -> MlpShape {
        self.shape
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    /// Uniform Glorot initialisation, zero biases.
    pub fn init_params(&self, rng: &mut RandomSource) -> DenseVector {
        let MlpShape { input: d, hidden: h, classes: k } = self.shape;
        let mut w = vec![0.0; self.shape.num_params()];
        let r1 = libm::sqrt(6.0 / (d + h) as f64);
        let r2 = libm::sqrt(6.0 / (h + k) as f64);
        w[..h * d].iter_mut().for_each(|x| *x = rng.uniform(-r1, r1));
        let o = h * (d + 1);
        w[o..o + k * h].iter_mut().for_each(|x| *x = rng.uniform(-r2, r2));
        DenseVector::new(w).expect("finite initialisation")
    }

    fn split<'a>(&self, w: &'a [f64]) -> Split<'a> {
        let MlpShape { input: d, hidden: h, classes: k } = self.shape;
        let (w1, rest) = w.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(k * h);
        Split { w1, b1, w2, b2 }
    }

    /// Hidden activations into `a`, class probabilities into `p`, returns
    /// the sample's cross-entropy.
    fn forward(&self, n: usize, w: &[f64], a: &mut [f64], p: &mut [f64]) -> f64 {
        let MlpShape { input: d, hidden: h, .. } = self.shape;
        let s = self.split(w);
        let x = self.data.row(n);
        for (j, aj) in a.iter_mut().enumerate().take(h) {
            let z = s.b1[j] + s.w1[j * d..(j + 1) * d].iter().zip(x).map(|(u, v)| u * v).sum::<f64>();
            *aj = libm::tanh(z);
        }
        for (c, pc) in p.iter_mut().enumerate() {
            *pc = s.b2[c] + s.w2[c * h..(c + 1) * h].iter().zip(a.iter()).map(|(u, v)| u * v).sum::<f64>();
        }
        let zy = p[self.data.label(n)];
        let zmax = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in p.iter_mut() {
            *v = libm::exp(*v - zmax);
            total += *v;
        }
        p.iter_mut().for_each(|v| *v /= total);
        zmax + libm::log(total) - zy
    }
}

impl FiniteSum for Mlp {
    fn num_components(&self) -> usize {
        self.data.num_samples()
    }

    fn dim(&self) -> usize {
        self.shape.num_params()
    }

    fn component_loss(&self, n: usize, w: &DenseVector) -> f64 {
        let mut a = vec![0.0; self.shape.hidden];
        let mut p = vec![0.0; self.shape.classes];
        self.forward(n, w.as_slice(), &mut a, &mut p)
    }

    fn add_component_gradient(&self, n: usize, w: &DenseVector, scale: f64, out: &mut [f64]) {
        let MlpShape { input: d, hidden: h, classes: k } = self.shape;
        let mut a = vec![0.0; h];
        let mut p = vec![0.0; k];
        self.forward(n, w.as_slice(), &mut a, &mut p);
        p[self.data.label(n)] -= 1.0;
        let s = self.split(w.as_slice());
        let x = self.data.row(n);

        // Back through the output layer: δ₁ = (W2ᵀ δ₂) ⊙ (1 - a²).
        let mut delta1 = vec![0.0; h];
        for (c, &pc) in p.iter().enumerate().take(k) {
            for (dj, w) in delta1.iter_mut().zip(&s.w2[c * h..(c + 1) * h]) {
                *dj += w * pc;
            }
        }
        for (dj, aj) in delta1.iter_mut().zip(a.iter()) {
            *dj *= 1.0 - aj * aj;
        }

        let (gw1, rest) = out.split_at_mut(h * d);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(k * h);
        for j in 0..h {
            let sd = scale * delta1[j];
            for (g, xi) in gw1[j * d..(j + 1) * d].iter_mut().zip(x) {
                *g += sd * xi;
            }
            gb1[j] += sd;
        }
        for c in 0..k {
            let sp = scale * p[c];
            for (g, aj) in gw2[c * h..(c + 1) * h].iter_mut().zip(&a) {
                *g += sp * aj;
            }
            gb2[c] += sp;
        }
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants::default()
    }
}
