//! Root finding, quadrature and finite differences used throughout the crate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, TfError};

/// Step used for finite-difference derivatives.
pub const FD_STEP: f64 = 1e-6;

/// Finite-difference derivative of `f` at `x` on the interval `[lo, hi]`.
///
/// Central difference in the interior; a second-order one-sided stencil
/// within `h` of either end.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, lo: f64, hi: f64) -> f64 {
    if x - h < lo {
        (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
    } else if x + h > hi {
        (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h)
    } else {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }
}

/// Outcome of a bisection search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `f(x) = target` for a nondecreasing `f` on `[lo, hi]`.
///
/// Stops once `|f(x) - target| < ftol` or the bracket has collapsed to
/// adjacent floats. The bracket must satisfy `f(lo) <= target <= f(hi)`.
pub fn bisect_increasing<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<Root> {
    if !(lo <= hi) {
        return Err(TfError::Bracketing(format!("empty interval [{lo}, {hi}]")));
    }
    let (flo, fhi) = (f(lo), f(hi));
    if (flo - target).abs() < ftol {
        return Ok(Root { x: lo, residual: flo - target, iterations: 0 });
    }
    if (fhi - target).abs() < ftol {
        return Ok(Root { x: hi, residual: fhi - target, iterations: 0 });
    }
    if flo > target || fhi < target {
        return Err(TfError::Bracketing(format!("target {target} not within [{flo}, {fhi}] on [{lo}, {hi}]")));
    }
    for it in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        let r = fm - target;
        if r.abs() < ftol || mid <= lo || mid >= hi {
            return Ok(Root { x: mid, residual: r, iterations: it });
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(TfError::Bracketing(format!("no convergence after {max_iter} iterations on [{lo}, {hi}]")))
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    // refined (two-panel) estimate with Richardson correction
    refined: f64,
    err: f64,
    flm: f64,
    frm: f64,
    depth: u32,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, depth: u32) -> Self {
        let m = 0.5 * (a + b);
        let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
        let h = b - a;
        let left = h * (fa + 4.0 * flm + fm) / 12.0;
        let right = h * (fm + 4.0 * frm + fb) / 12.0;
        let two = left + right;
        let diff = two - whole;
        Panel { a, b, fa, fm, fb, refined: two + diff / 15.0, err: diff.abs() / 15.0, flm, frm, depth }
    }

    fn split<F: Fn(f64) -> f64>(&self, f: &F) -> (Panel, Panel) {
        let m = 0.5 * (self.a + self.b);
        let h = self.b - self.a;
        let left_whole = h * (self.fa + 4.0 * self.flm + self.fm) / 12.0;
        let right_whole = h * (self.fm + 4.0 * self.frm + self.fb) / 12.0;
        (
            Panel::new(f, self.a, m, self.fa, self.flm, self.fm, left_whole, self.depth + 1),
            Panel::new(f, m, self.b, self.fm, self.frm, self.fb, right_whole, self.depth + 1),
        )
    }
}

struct ByError(Panel);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.0.err == other.0.err
    }
}
impl Eq for ByError {}
impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.err.total_cmp(&other.0.err).then_with(|| other.0.a.total_cmp(&self.0.a))
    }
}

/// Globally adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `tol`. Panels deeper than `max_depth` are frozen.
/// The returned value is summed in left-to-right order, so it does not
/// depend on heap internals.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error_estimate: 0.0, intervals: 0, converged: true };
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
    let root = Panel::new(&f, a, b, fa, fm, fb, whole, 0);

    let mut total_err = root.err;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    heap.push(ByError(root));

    const MAX_PANELS: usize = 200_000;
    while total_err > tol && heap.len() + frozen.len() < MAX_PANELS {
        let Some(ByError(worst)) = heap.pop() else { break };
        if worst.depth >= max_depth {
            frozen.push(worst);
            continue;
        }
        let (l, r) = worst.split(&f);
        total_err += l.err + r.err - worst.err;
        heap.push(ByError(l));
        heap.push(ByError(r));
    }

    let mut panels: Vec<Panel> = heap.into_iter().map(|p| p.0).chain(frozen).collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let values: Vec<f64> = panels.iter().map(|p| p.refined).collect();
    let err: f64 = panels.iter().map(|p| p.err).sum();
    let value = pairwise_sum(&values);
    Quadrature { value, error_estimate: err, intervals: panels.len(), converged: err <= tol && value.is_finite() }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `n + 1` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}
