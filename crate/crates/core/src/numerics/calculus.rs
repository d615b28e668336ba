use alloc::vec::Vec;

use crate::{DenseVector, Error, Result};

/// Central-difference gradient `(f(w + h eᵢ) - f(w - h eᵢ)) / 2h`.
pub fn finite_difference_gradient<F>(f: F, w: &DenseVector, h: f64) -> Result<DenseVector>
where
    F: Fn(&DenseVector) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::argument("finite-difference step must be positive"));
    }
    let mut probe = w.clone();
    let mut out = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        let x = w[i];
        probe.as_mut_slice()[i] = x + h;
        let up = f(&probe);
        probe.as_mut_slice()[i] = x - h;
        let down = f(&probe);
        probe.as_mut_slice()[i] = x;
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::NonFinite("finite-difference evaluation"));
        }
        out.push((up - down) / (2.0 * h));
    }
    DenseVector::new(out)
}

/// Bisection on a sign-changing bracket.
///
/// Halves `[lo, hi]` until its width is at most `tol` and returns the
/// midpoint. An endpoint where `g` is exactly zero is returned as is.
pub fn bisect_root<G>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::argument("bisection tolerance must be positive"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::argument("bisection needs finite lo < hi"));
    }
    let (mut lo, mut hi) = (lo, hi);
    let (g_lo, g_hi) = (g(lo), g(hi));
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if !(g_lo.is_finite() && g_hi.is_finite()) || g_lo.signum() == g_hi.signum() {
        return Err(Error::Bracket { lo, hi, g_lo, g_hi });
    }
    let lo_negative = g_lo < 0.0;
    // 2000 halvings exhaust any f64 bracket; the loop normally exits on width.
    for _ in 0..2000 {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if (g_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(delta: f64) -> f64 {
        (1.0 + delta) / (1.0 + libm::pow(delta, 4.0))
    }

    #[test]
    fn fd_of_square() {
        let g = finite_difference_gradient(|w| w[0] * w[0], &DenseVector::scalar(3.0), 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn fd_of_constant_is_zero() {
        let w = DenseVector::new(alloc::vec![1.0, -2.0, 5.0]).unwrap();
        let g = finite_difference_gradient(|_| 4.25, &w, 1e-3).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn fd_vanishes_at_the_divergence_problem_optimum() {
        let delta = 10.0;
        let f = |w: &DenseVector| w[0] * w[0] / (2.0 * delta) + delta * w[0];
        let g = finite_difference_gradient(f, &DenseVector::scalar(-100.0), 1e-5).unwrap();
        assert!(g[0].abs() < 1e-6, "{}", g[0]);
    }

    #[test]
    fn fd_reports_non_finite_evaluations() {
        let err = finite_difference_gradient(|w| libm::log(w[0]), &DenseVector::scalar(0.0), 1e-3);
        assert_eq!(err.unwrap_err(), Error::NonFinite("finite-difference evaluation"));
    }

    #[test]
    fn bisect_linear() {
        let x = bisect_root(|x| x - 2.0, 0.0, 10.0, 1e-10).unwrap();
        assert!((x - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn bisect_ratio_is_one_at_one() {
        let x = bisect_root(|d| ratio(d) - 1.0, 0.5, 2.0, 1e-12).unwrap();
        assert!((x - 1.0).abs() < 1e-11);
    }

    #[test]
    fn bisect_ratio_tenth_matches_scan_oracle() {
        // Oracle: first sign change of d^4 - 10 d - 9 scanning up from 2.
        let mut d = 2.0f64;
        let step = 1e-6;
        while libm::pow(d, 4.0) - 10.0 * d - 9.0 < 0.0 {
            d += step;
        }
        let x = bisect_root(|d| ratio(d) - 0.1, 2.0, 5.0, 1e-12).unwrap();
        assert!((x - d).abs() <= step, "bisect {x} vs scan {d}");
        assert!((x - 2.3961).abs() < 1e-4);
    }

    #[test]
    fn bisect_stable_under_tolerance_refinement() {
        let g = |d: f64| ratio(d) - 0.1;
        let coarse = bisect_root(g, 2.0, 5.0, 1e-8).unwrap();
        let fine = bisect_root(g, 2.0, 5.0, 1e-14).unwrap();
        assert!((coarse - fine).abs() <= 1e-8);
    }

    #[test]
    fn bisect_errors() {
        assert!(matches!(bisect_root(|x| x * x + 1.0, -1.0, 1.0, 1e-6), Err(Error::Bracket { .. })));
        assert!(matches!(bisect_root(|x| x, -1.0, 1.0, 0.0), Err(Error::Argument(_))));
    }
}
