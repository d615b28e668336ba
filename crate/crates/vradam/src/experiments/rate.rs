use vradam_core::optimizers::{
    run_vradam_finite_sum, AdamHyper, LearningRate, ResetOption, RunOptions, Schedule, VradamConfig,
};
use vradam_core::problems::{make_quadratic, FiniteSum, QuadraticSpec};
use vradam_core::{DenseVector, RandomSource};

use crate::{Error, Result};

/// VRADAM with `α_t = α/t` on a clipped quadratic, measured against the
/// `T^{-C₂mα}` decay of the objective gap at the snapshots.
#[derive(Debug, Clone)]
pub struct RateSpec {
    pub problem: QuadraticSpec,
    pub cfg: VradamConfig,
    pub outer_iterations: usize,
    pub w1: DenseVector,
    pub seed: u64,
    /// Snapshots `T` used to calibrate the constant, inclusive.
    pub calibration: (usize, usize),
}

impl RateSpec {
    /// `c = 0.5`, `L = 1`, `d = 5`, `G = 10`, noise-free; `β₁ = 0.9`,
    /// `m = 50`, `α = 3`, so `C₂mα = 0.5`; 200 outer iterations from `3·1`,
    /// calibrated on `T = 2..=10`.
    pub fn desk_default() -> Self {
        let lr = LearningRate::new(3.0, Schedule::InverseTime).expect("valid schedule");
        let hyper = AdamHyper::new(lr, 0.9, 0.999, 1e-8).expect("valid constants");
        RateSpec {
            problem: QuadraticSpec::new(0.5, 1.0, 5, 0.0, 10.0),
            cfg: VradamConfig::new(hyper, 50, 1, ResetOption::A).expect("valid config"),
            outer_iterations: 200,
            w1: DenseVector::filled(5, 3.0),
            seed: 0,
            calibration: (2, 10),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCheck {
    /// `C₂ = 2c(1-β₁)/√(9G²+ε)`.
    pub c2: f64,
    /// `C₂·m·α`.
    pub exponent: f64,
    /// `C = max_{T in calibration} gap_T·T^{exponent}`.
    pub calibration_constant: f64,
    /// Least-squares slope of `ln gap` against `ln T` over the checked range.
    pub fitted_slope: f64,
    /// `F(w̃_T) - F*` at index `T-1`, `T = 1..=outer_iterations+1`.
    pub gaps: Vec<f64>,
    /// Largest `gap_T / (C·T^{-exponent})` over the checked range.
    pub worst_ratio: f64,
    pub holds: bool,
    pub max_m_norm: f64,
    pub max_v_norm: f64,
    pub gradient_bound: f64,
}

impl RateCheck {
    pub fn gap(&self, t: usize) -> f64 {
        self.gaps[t - 1]
    }
}

pub fn rate_check(spec: &RateSpec) -> Result<RateCheck> {
    let hyper = &spec.cfg.hyper;
    if hyper.lr.schedule != Schedule::InverseTime || hyper.lr.period != 1 {
        return Err(Error::config("the rate check needs the schedule alpha_t = alpha/t"));
    }
    let (c_lo, c_hi) = spec.calibration;
    if !(c_lo >= 1 && c_lo <= c_hi && c_hi < spec.outer_iterations) {
        return Err(Error::config("calibration window must lie inside the run"));
    }
    let problem = make_quadratic(spec.problem.clone())?;
    let k = problem.constants();
    let (c, g) = match (k.strong_convexity, k.gradient_bound) {
        (Some(c), Some(g)) => (c, g),
        _ => return Err(Error::config("the rate check needs declared c and G")),
    };
    let c2 = 2.0 * c * (1.0 - hyper.beta1) / (9.0 * g * g + hyper.eps).sqrt();
    let exponent = c2 * spec.cfg.inner_length as f64 * hyper.lr.base;
    if exponent >= 1.0 {
        return Err(Error::config(format!(
            "rate hypothesis C2*m*alpha < 1 violated: C2={c2:.6e}, m={}, alpha={}, C2*m*alpha={exponent:.4}",
            spec.cfg.inner_length, hyper.lr.base
        )));
    }

    let opts = RunOptions { state_bound: Some(g), ..Default::default() };
    let record = run_vradam_finite_sum(
        &problem,
        &spec.cfg,
        &spec.w1,
        spec.outer_iterations,
        &mut RandomSource::new(spec.seed, 0),
        &opts,
    )?;
    let f_star = problem.optimal_value();
    let gaps: Vec<f64> = record.snapshots.iter().map(|w| problem.full_loss(w) - f_star).collect();

    let tf = |t: usize| t as f64;
    let calibration_constant =
        (c_lo..=c_hi).map(|t| gaps[t - 1] * tf(t).powf(exponent)).fold(f64::NEG_INFINITY, f64::max);
    let checked = c_hi + 1..=spec.outer_iterations;
    let worst_ratio = checked
        .clone()
        .map(|t| gaps[t - 1] / (calibration_constant * tf(t).powf(-exponent)))
        .fold(f64::NEG_INFINITY, f64::max);
    let holds = checked.clone().all(|t| gaps[t - 1] <= calibration_constant * tf(t).powf(-exponent));

    let pts: Vec<(f64, f64)> =
        checked.filter(|&t| gaps[t - 1] > 0.0).map(|t| (tf(t).ln(), gaps[t - 1].ln())).collect();
    let fitted_slope = least_squares_slope(&pts);

    Ok(RateCheck {
        c2,
        exponent,
        calibration_constant,
        fitted_slope,
        gaps,
        worst_ratio,
        holds,
        max_m_norm: record.max_m_norm(),
        max_v_norm: record.max_v_norm(),
        gradient_bound: g,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alpha: f64, m: usize, beta1: f64) -> RateSpec {
        let lr = LearningRate::new(alpha, Schedule::InverseTime).unwrap();
        let hyper = AdamHyper::new(lr, beta1, 0.999, 1e-8).unwrap();
        let mut problem = QuadraticSpec::new(0.5, 1.0, 5, 0.0, 10.0);
        problem.components = 4;
        RateSpec {
            problem,
            cfg: VradamConfig::new(hyper, m, 1, ResetOption::A).unwrap(),
            outer_iterations: 60,
            w1: DenseVector::filled(5, 3.0),
            seed: 1,
            calibration: (2, 10),
        }
    }

    #[test]
    fn slope_of_a_line() {
        assert!((least_squares_slope(&[(0.0, 1.0), (1.0, -1.0), (2.0, -3.0)]) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_quadratic_gap_decreases() {
        let r = rate_check(&spec(3.0, 50, 0.9)).unwrap();
        assert!((r.exponent - 0.5).abs() < 1e-6);
        assert!(r.holds, "worst ratio {}", r.worst_ratio);
        assert!(r.gap(60) < r.gap(20));
    }

    #[test]
    fn violated_hypothesis_is_a_configuration_error() {
        match rate_check(&spec(30.0, 50, 0.9)) {
            Err(Error::Config(msg)) => assert!(msg.contains("C2*m*alpha")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn heavy_momentum_makes_the_exponent_vanish() {
        let r = rate_check(&spec(3.0, 50, 0.999_999)).unwrap();
        assert!(r.exponent < 1e-5);
        assert!(r.holds, "worst ratio {}", r.worst_ratio);
    }

    #[test]
    fn rejects_other_schedules() {
        let mut s = spec(3.0, 50, 0.9);
        s.cfg.hyper.lr = LearningRate::constant(3.0).unwrap();
        assert!(matches!(rate_check(&s), Err(Error::Config(_))));
    }
}
