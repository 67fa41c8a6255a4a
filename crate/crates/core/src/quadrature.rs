//! Gauss–Legendre quadrature on `[0, 1]`.

use serde::{Deserialize, Serialize};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[0, 1]`.
///
/// Roots of `P_n` come from Newton's method started at the Chebyshev-type
/// guesses `cos(π(i − 1/4)/(n + 1/2))`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n > 0, "quadrature needs at least one node");
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `(P_n(x), P_n'(x))` for `n ≥ 1` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// How λ-integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Quadrature {
    /// A single rule of the given order.
    Fixed { order: usize },
    /// Doubles the order from `initial` until consecutive estimates agree
    /// within `tol`, failing past `max_order`.
    Adaptive { initial: usize, max_order: usize, tol: f64 },
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::Adaptive {
            initial: 32,
            max_order: 1024,
            tol: 1e-8,
        }
    }
}

impl Quadrature {
    pub fn fixed(order: usize) -> Self {
        Quadrature::Fixed { order }
    }
}

/// Outcome of an adaptive run that never settled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonConvergence {
    pub order: usize,
    pub change: f64,
}

/// Integrates a vector-valued function over `[0, 1]` with `rule`.
///
/// `norm` measures the change between consecutive adaptive estimates.
pub fn integrate<T, E>(
    rule: &Quadrature,
    mut f: impl FnMut(f64) -> Result<T, E>,
    zero: impl Fn() -> T,
    axpy: impl Fn(&mut T, f64, &T),
    norm: impl Fn(&T, &T) -> f64,
) -> Result<Result<(T, usize), NonConvergence>, E> {
    let mut run = |n: usize| -> Result<T, E> {
        let mut acc = zero();
        for (x, w) in gauss_legendre(n) {
            let v = f(x)?;
            axpy(&mut acc, w, &v);
        }
        Ok(acc)
    };
    match *rule {
        Quadrature::Fixed { order } => Ok(Ok((run(order)?, order))),
        Quadrature::Adaptive { initial, max_order, tol } => {
            let mut n = initial.max(1);
            let mut prev = run(n)?;
            let mut change = f64::INFINITY;
            while 2 * n <= max_order {
                let next = run(2 * n)?;
                change = norm(&prev, &next);
                n *= 2;
                if change <= tol {
                    return Ok(Ok((next, n)));
                }
                prev = next;
            }
            Ok(Err(NonConvergence { order: n, change }))
        }
    }
}
