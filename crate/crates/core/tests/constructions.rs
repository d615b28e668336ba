//! The finite-sum constructions against coefficients derived by hand: with
//! `δ` from an independent Newton solve, every batch must reduce to one of
//! the two OP(δ) branches with the predicted frequency.

use vradam_core::problems::{
    make_op_delta, make_thm2_problem, make_thm3_problem, FiniteSum, OpBranch, StochasticProblem,
};
use vradam_core::DenseVector;

/// Root of `r(1+δ⁴) = 1+δ` on `δ ≥ 1` by Newton's method from a point
/// right of the root (`g` is convex and increasing there).
fn newton_delta(r: f64) -> f64 {
    let g = |d: f64| r * (1.0 + d.powi(4)) - (1.0 + d);
    let dg = |d: f64| 4.0 * r * d.powi(3) - 1.0;
    let mut d = (1.0 / r).cbrt() + 1.0;
    for _ in 0..200 {
        let next = d - g(d) / dg(d);
        if (next - d).abs() <= 1e-15 * d {
            return next;
        }
        d = next;
    }
    d
}

/// All `b`-subsets of `0..n`, lexicographic, by binary counting.
fn subsets(n: usize, b: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == b).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn thm2_coefficients_match_the_hand_derivation() {
    for n in 2..=12usize {
        for b in 1..n {
            let c = make_thm2_problem(n, b).unwrap();
            let d = newton_delta(b as f64 / n as f64);
            assert!(close(c.delta, d, 1e-11), "N={n} b={b}: {} vs {d}", c.delta);
            let d = c.delta;
            for i in 0..n {
                assert!(close(c.sum.curvature()[i], 1.0 / d, 1e-15));
                let expected = if i + 1 < n { -1.0 } else { b as f64 * d.powi(4) + b as f64 - 1.0 };
                assert!(close(c.sum.linear()[i], expected, 1e-14), "N={n} b={b} i={i}");
            }
        }
    }
}

#[test]
fn thm2_batches_reduce_to_the_two_branches() {
    for (n, b) in [(5, 2), (7, 3), (10, 1), (12, 5)] {
        let c = make_thm2_problem(n, b).unwrap();
        let op = c.op_problem();
        let batches = subsets(n, b);
        let mut rare = 0;
        for batch in &batches {
            let has_last = batch.contains(&(n - 1));
            rare += has_last as usize;
            let branch = if has_last { OpBranch::Rare } else { OpBranch::Common };
            for w in [-50.0, -1.5, 0.0, 0.3, 7.0] {
                let x = DenseVector::scalar(w);
                assert!(close(c.sum.batch_loss(batch, &x), op.branch_loss(w, branch), 1e-12), "N={n} b={b} {batch:?} w={w}");
                let g = c.sum.batch_gradient(batch, &x);
                assert!(close(g[0], op.branch_gradient(w, branch), 1e-12));
            }
        }
        let freq = rare as f64 / batches.len() as f64;
        assert!(close(freq, b as f64 / n as f64, 1e-15));
        assert!(close(freq, op.rare_probability(), 1e-10));
    }
}

#[test]
fn thm3_batches_reduce_to_the_two_branches() {
    for n in 5..=12usize {
        let c = make_thm3_problem(n).unwrap();
        let d = newton_delta(1.0 / n as f64);
        assert!(close(c.delta, d, 1e-11), "N={n}");
        let op = c.op_problem();
        for batch in subsets(n, n - 1) {
            let branch = if batch.contains(&(n - 1)) { OpBranch::Common } else { OpBranch::Rare };
            for w in [-20.0, 0.0, 2.5] {
                let x = DenseVector::scalar(w);
                assert!(close(c.sum.batch_loss(&batch, &x), op.branch_loss(w, branch), 1e-12), "N={n} {batch:?}");
            }
        }
    }
}

#[test]
fn op_problem_closed_forms() {
    for d in [1.5, 2.0, 10.0] {
        let op = make_op_delta(d).unwrap();
        let p = (1.0 + d) / (1.0 + d.powi(4));
        assert!(close(op.rare_probability(), p, 1e-15));
        assert!(close(op.optimum(), -d * d, 1e-15));
        assert!(close(op.optimal_value(), -d.powi(3) / 2.0, 1e-15));
        for w in [-100.0, -3.0, 4.0] {
            // F(w) - F* = (w - w*)²/(2δ).
            let gap = op.scalar_loss(w) - op.optimal_value();
            assert!(close(gap, (w + d * d).powi(2) / (2.0 * d), 1e-12));
            let mixed = p * op.branch_gradient(w, OpBranch::Rare) + (1.0 - p) * op.branch_gradient(w, OpBranch::Common);
            assert!(close(mixed, op.scalar_gradient(w), 1e-12));
        }
        let k = op.constants();
        assert_eq!(k.lipschitz, Some(1.0 / d));
        assert_eq!(k.strong_convexity, Some(1.0 / d));
    }
}

#[test]
fn infeasible_sizes_are_rejected() {
    assert!(make_thm2_problem(5, 5).is_err());
    assert!(make_thm2_problem(5, 0).is_err());
    assert!(make_thm3_problem(1).is_err());
}
