//! One-dimensional Gauss–Legendre quadrature shared by the line-integral
//! oracle and the kernel mass checks.

use crate::error::{Error, Result};

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss–Legendre rule on `n` equal sub-intervals.
pub fn composite_gl5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let width = (b - a) / n as f64;
    let half = 0.5 * width;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in 0..n {
        let mid = a + (i as f64 + 0.5) * width;
        let mut panel = 0.0;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            panel += w * f(mid + half * x);
        }
        neumaier_add(&mut sum, &mut comp, panel * half);
    }
    sum + comp
}

/// Halves the panel width until two successive estimates differ by less
/// than `tol`. Gives up after `max_halvings` refinements.
pub fn refine_gl5<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: f64,
    max_halvings: u32,
) -> Result<f64> {
    let mut n = initial_panels.max(1);
    let mut previous = composite_gl5(f, a, b, n);
    for _ in 0..max_halvings {
        n *= 2;
        let current = composite_gl5(f, a, b, n);
        if !current.is_finite() {
            return Err(Error::Accuracy { last: current, previous });
        }
        if (current - previous).abs() < tol {
            return Ok(current);
        }
        previous = current;
    }
    let last = composite_gl5(f, a, b, n * 2);
    Err(Error::Accuracy { last, previous })
}

/// Neumaier's variant of Kahan summation.
#[inline]
pub fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}
