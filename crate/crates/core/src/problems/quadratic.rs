//! Strongly convex quadratics with a hard gradient bound.
//!
//! Each component is a per-coordinate Huber function
//! `fₙ(w) = Σᵢ aᵢ·h_{rᵢ}(wᵢ - μₙᵢ)` with `h_r(x) = x²/2` for `|x| ≤ r` and
//! `r|x| - r²/2` beyond. Its gradient is `aᵢ·clamp(wᵢ - μₙᵢ, ±rᵢ)`, and with
//! `rᵢ = clip/(aᵢ√d)` every component gradient satisfies `‖∇fₙ‖₂ ≤ clip`.
//! The curvatures `aᵢ` are spread evenly over `[c, L]`; inside the quadratic
//! zone the Hessian is `diag(a)`.

use alloc::format;
use alloc::vec::Vec;

use super::{FiniteSum, ProblemConstants};
use crate::{DenseVector, Error, RandomSource, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpec {
    pub c: f64,
    pub l: f64,
    pub d: usize,
    /// Half-width of the uniform offsets `μₙᵢ` (before centring).
    pub noise: f64,
    /// Bound on every component gradient norm.
    pub clip: f64,
    pub components: usize,
    pub seed: u64,
}

impl QuadraticSpec {
    pub fn new(c: f64, l: f64, d: usize, noise: f64, clip: f64) -> Self {
        QuadraticSpec { c, l, d, noise, clip, components: 8, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct ClippedQuadratic {
    curvature: Vec<f64>,
    radius: Vec<f64>,
    /// `μ`, row-major `N × d`; columns sum to zero so `w* = 0`.
    offsets: Vec<f64>,
    spec: QuadraticSpec,
    optimal_value: f64,
}

pub fn make_quadratic(spec: QuadraticSpec) -> Result<ClippedQuadratic> {
    let QuadraticSpec { c, l, d, noise, clip, components, seed } = spec;
    if !(c > 0.0 && c <= l && l.is_finite()) {
        return Err(Error::argument(format!("need 0 < c <= L, got c={c}, L={l}")));
    }
    if d == 0 || components == 0 {
        return Err(Error::argument("need d >= 1 and at least one component"));
    }
    if !(noise >= 0.0 && noise.is_finite()) || !(clip > 0.0 && clip.is_finite()) {
        return Err(Error::argument("need noise >= 0 and clip > 0"));
    }
    let curvature: Vec<f64> = (0..d)
        .map(|i| if d == 1 { c } else { c + (l - c) * i as f64 / (d - 1) as f64 })
        .collect();
    let sqrt_d = libm::sqrt(d as f64);
    let radius: Vec<f64> = curvature.iter().map(|a| clip / (a * sqrt_d)).collect();

    let mut rng = RandomSource::new(seed, 0);
    let mut offsets: Vec<f64> = (0..components * d).map(|_| rng.uniform(-noise, noise)).collect();
    for i in 0..d {
        let mean = (0..components).map(|n| offsets[n * d + i]).sum::<f64>() / components as f64;
        (0..components).for_each(|n| offsets[n * d + i] -= mean);
    }
    // With every offset inside the quadratic zone, F is exactly quadratic
    // around 0 and its gradient there is a ⊙ (w - mean μ) = a ⊙ w.
    let r_min = radius.iter().copied().fold(f64::INFINITY, f64::min);
    if offsets.iter().any(|m| m.abs() > r_min) {
        return Err(Error::argument(format!("noise {noise} reaches past the quadratic zone (radius {r_min})")));
    }

    let mut p = ClippedQuadratic { curvature, radius, offsets, spec, optimal_value: 0.0 };
    p.optimal_value = p.full_loss(&DenseVector::zeros(d));
    Ok(p)
}

impl ClippedQuadratic {
    pub fn spec(&self) -> &QuadraticSpec {
        &self.spec
    }

    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    /// Per-coordinate half-width of the quadratic zone.
    pub fn radius(&self) -> &[f64] {
        &self.radius
    }

    pub fn optimal_value(&self) -> f64 {
        self.optimal_value
    }

    fn offset(&self, n: usize, i: usize) -> f64 {
        self.offsets[n * self.spec.d + i]
    }
}

fn huber(x: f64, r: f64) -> f64 {
    let ax = x.abs();
    if ax <= r {
        0.5 * x * x
    } else {
        r * ax - 0.5 * r * r
    }
}

impl FiniteSum for ClippedQuadratic {
    fn num_components(&self) -> usize {
        self.spec.components
    }

    fn dim(&self) -> usize {
        self.spec.d
    }

    fn component_loss(&self, n: usize, w: &DenseVector) -> f64 {
        (0..self.spec.d).map(|i| self.curvature[i] * huber(w[i] - self.offset(n, i), self.radius[i])).sum()
    }

    fn add_component_gradient(&self, n: usize, w: &DenseVector, scale: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let r = self.radius[i];
            *o += scale * self.curvature[i] * (w[i] - self.offset(n, i)).clamp(-r, r);
        }
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            lipschitz: Some(self.spec.l),
            gradient_bound: Some(self.spec.clip),
            strong_convexity: Some(self.spec.c),
            optimal_value: Some(self.optimal_value),
            optimizer: Some(DenseVector::zeros(self.spec.d)),
        }
    }
}
