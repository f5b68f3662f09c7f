//! The copula evaluation interface and the grid checks shared by every
//! other module.

use rayon::prelude::*;
use serde::Serialize;

use crate::numeric::{derivative, linspace, FD_STEP};
use crate::unit::UnitValue;

/// Tolerance applied to grid checks unless a caller overrides it.
pub const GRID_TOL: f64 = 1e-10;

/// How partial derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    #[default]
    Analytic,
    FiniteDifference,
}

/// A bivariate function on the unit square that may or may not be a copula.
///
/// Arguments are plain `f64` so that hot loops avoid re-validation;
/// implementations clamp to `[0, 1]`. At points where a partial derivative
/// is discontinuous across the diagonal (or across the kink of a singular
/// family) the value from the `u <= v` side is returned.
pub trait Copula: Send + Sync {
    fn eval(&self, u: f64, v: f64) -> f64;

    /// `dC/du`, which is also `P(V <= v | U = u)`.
    fn partial_u(&self, u: f64, v: f64) -> f64 {
        fd_partial_u(self, u, v)
    }

    /// `dC/dv`.
    fn partial_v(&self, u: f64, v: f64) -> f64 {
        fd_partial_v(self, u, v)
    }

    fn is_exchangeable(&self) -> bool {
        false
    }

    fn name(&self) -> String;

    fn value(&self, u: UnitValue, v: UnitValue) -> UnitValue {
        UnitValue::saturating(self.eval(u.get(), v.get()))
    }
}

pub fn fd_partial_u<C: Copula + ?Sized>(c: &C, u: f64, v: f64) -> f64 {
    derivative(|x| c.eval(x, v), u, FD_STEP, 0.0, 1.0)
}

pub fn fd_partial_v<C: Copula + ?Sized>(c: &C, u: f64, v: f64) -> f64 {
    derivative(|y| c.eval(u, y), v, FD_STEP, 0.0, 1.0)
}

/// Whether a report's worst value is a signed margin (must stay above
/// `-tolerance`) or an absolute deviation (must stay below `tolerance`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sense {
    Margin,
    Deviation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Location {
    None,
    Point { u: f64, v: f64 },
    Rectangle { u1: f64, u2: f64, v1: f64, v2: f64 },
    Triple { alpha: f64, x: f64, y: f64 },
}

/// Outcome of a sampled check over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCheckReport {
    pub check: String,
    pub grid_size: usize,
    pub worst_violation: f64,
    pub worst_location: Location,
    pub passed: bool,
    pub tolerance: f64,
    pub sense: Sense,
}

impl GridCheckReport {
    /// `worst` is the smallest observed margin; passes iff `worst >= -tol`.
    pub fn margin(check: impl Into<String>, grid_size: usize, worst: f64, at: Location, tol: f64) -> Self {
        GridCheckReport {
            check: check.into(),
            grid_size,
            worst_violation: worst,
            worst_location: at,
            passed: worst >= -tol,
            tolerance: tol,
            sense: Sense::Margin,
        }
    }

    /// `worst` is the largest observed deviation; passes iff `worst <= tol`.
    pub fn deviation(check: impl Into<String>, grid_size: usize, worst: f64, at: Location, tol: f64) -> Self {
        GridCheckReport {
            check: check.into(),
            grid_size,
            worst_violation: worst,
            worst_location: at,
            passed: worst <= tol,
            tolerance: tol,
            sense: Sense::Deviation,
        }
    }

    pub fn failed(&self) -> bool {
        !self.passed
    }
}

/// Running minimum (or maximum) with a location, reduced deterministically.
#[derive(Clone, Copy)]
pub(crate) struct Worst {
    pub value: f64,
    pub at: Location,
}

impl Worst {
    pub fn min_identity() -> Self {
        Worst { value: f64::INFINITY, at: Location::None }
    }
    pub fn max_identity() -> Self {
        Worst { value: f64::NEG_INFINITY, at: Location::None }
    }
    pub fn take_min(self, other: Worst) -> Worst {
        // NaN counts as the worst possible margin
        if other.value < self.value || (other.value.is_nan() && !self.value.is_nan()) {
            other
        } else {
            self
        }
    }
    pub fn take_max(self, other: Worst) -> Worst {
        if other.value > self.value || (other.value.is_nan() && !self.value.is_nan()) {
            other
        } else {
            self
        }
    }
}

/// Values of `c` on the `(n + 1) x (n + 1)` grid `{i/n}`; row index is `u`.
pub fn grid_values<C: Copula + ?Sized>(c: &C, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let g = linspace(0.0, 1.0, n);
    let rows = g.par_iter().map(|&u| g.iter().map(|&v| c.eval(u, v)).collect()).collect();
    (g, rows)
}

/// Minimum rectangle volume `V_C(R)` over all cells of the uniform grid.
pub fn check_two_increasing<C: Copula + ?Sized>(c: &C, n: usize, tol: f64) -> GridCheckReport {
    let n = n.max(2);
    let (g, z) = grid_values(c, n);
    let worst = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut w = Worst::min_identity();
            for j in 0..n {
                let vol = z[i + 1][j + 1] - z[i][j + 1] - z[i + 1][j] + z[i][j];
                w = w.take_min(Worst {
                    value: vol,
                    at: Location::Rectangle { u1: g[i], u2: g[i + 1], v1: g[j], v2: g[j + 1] },
                });
            }
            w
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Worst::min_identity(), Worst::take_min);
    GridCheckReport::margin("two-increasing", n, worst.value, worst.at, tol)
}

/// Largest deviation from the boundary identities `C(u,1)=u`, `C(1,v)=v`,
/// `C(u,0)=C(0,v)=0`.
pub fn check_boundary<C: Copula + ?Sized>(c: &C, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let g = linspace(0.0, 1.0, n);
    let mut w = Worst::max_identity();
    for &t in &g {
        let cases = [
            ((t, 1.0), (c.eval(t, 1.0) - t).abs()),
            ((1.0, t), (c.eval(1.0, t) - t).abs()),
            ((t, 0.0), c.eval(t, 0.0).abs()),
            ((0.0, t), c.eval(0.0, t).abs()),
        ];
        for ((u, v), dev) in cases {
            w = w.take_max(Worst { value: dev, at: Location::Point { u, v } });
        }
    }
    GridCheckReport::deviation("boundary", n, w.value, w.at, GRID_TOL)
}

/// Smallest slack in `W(u,v) <= C(u,v) <= M(u,v)`.
pub fn check_frechet_bounds<C: Copula + ?Sized>(c: &C, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let (g, z) = grid_values(c, n);
    let mut w = Worst::min_identity();
    for (i, &u) in g.iter().enumerate() {
        for (j, &v) in g.iter().enumerate() {
            let val = z[i][j];
            let lower = (u + v - 1.0).max(0.0);
            let upper = u.min(v);
            let slack = (val - lower).min(upper - val);
            w = w.take_min(Worst { value: slack, at: Location::Point { u, v } });
        }
    }
    GridCheckReport::margin("frechet-bounds", n, w.value, w.at, GRID_TOL)
}

/// Largest `|C(u,v) - C(v,u)|` on the grid.
pub fn check_symmetry<C: Copula + ?Sized>(c: &C, n: usize, tol: f64) -> GridCheckReport {
    let n = n.max(2);
    let (g, z) = grid_values(c, n);
    let mut w = Worst::max_identity();
    for i in 0..g.len() {
        for j in (i + 1)..g.len() {
            let d = (z[i][j] - z[j][i]).abs();
            w = w.take_max(Worst { value: d, at: Location::Point { u: g[i], v: g[j] } });
        }
    }
    GridCheckReport::deviation("symmetry", n, w.value, w.at, tol)
}

/// Largest gap between the reported partials and central differences on
/// interior grid points that stay at least `margin` away from the boundary,
/// the diagonal and the anti-diagonal (where the shipped singular
/// families have their kinks).
pub fn check_partial_derivatives<C: Copula + ?Sized>(c: &C, n: usize, margin: f64, tol: f64) -> GridCheckReport {
    let n = n.max(2);
    let g = linspace(0.0, 1.0, n);
    let mut w = Worst::max_identity();
    for &u in &g {
        for &v in &g {
            if u < margin
                || v < margin
                || u > 1.0 - margin
                || v > 1.0 - margin
                || (u - v).abs() < margin
                || (u + v - 1.0).abs() < margin
            {
                continue;
            }
            let du = (c.partial_u(u, v) - fd_partial_u(c, u, v)).abs();
            let dv = (c.partial_v(u, v) - fd_partial_v(c, u, v)).abs();
            w = w.take_max(Worst { value: du.max(dv), at: Location::Point { u, v } });
        }
    }
    GridCheckReport::deviation("partial-derivatives", n, w.value, w.at, tol)
}

/// Sup-norm distance `max |C - D|` on the grid.
pub fn sup_distance<C: Copula + ?Sized, D: Copula + ?Sized>(c: &C, d: &D, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let (g, zc) = grid_values(c, n);
    let (_, zd) = grid_values(d, n);
    let mut w = Worst::max_identity();
    for i in 0..g.len() {
        for j in 0..g.len() {
            let dev = (zc[i][j] - zd[i][j]).abs();
            w = w.take_max(Worst { value: dev, at: Location::Point { u: g[i], v: g[j] } });
        }
    }
    GridCheckReport::deviation("sup-distance", n, w.value, w.at, 0.0)
}

/// Any closure usable as a (candidate) copula in the grid checks.
pub struct FnCopula<F> {
    f: F,
    label: String,
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> FnCopula<F> {
    pub fn new(label: impl Into<String>, f: F) -> Self {
        FnCopula { f, label: label.into() }
    }
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> Copula for FnCopula<F> {
    fn eval(&self, u: f64, v: f64) -> f64 {
        (self.f)(u, v)
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}
