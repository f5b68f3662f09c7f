//! The increasing maps `phi` and `psi`, their pseudo-inverses, the sampled
//! membership and condition checks, and the pair combinators.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::base::RealFn;
use crate::copula::{Copula, GridCheckReport, Location, Worst, GRID_TOL};
use crate::error::{Result, TfError};
use crate::numeric::{bisect_increasing, derivative, linspace, FD_STEP};
use crate::unit::{clamp01, UnitValue};

/// Default number of sample points for map checks.
pub const MAP_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strictness {
    StrictlyIncreasing,
    Increasing,
}

/// Membership class of a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MapClass {
    /// continuous, strictly increasing, value 1 at 1
    Phi,
    /// continuous, increasing, value 1 at 1
    Psi,
}

/// A decreasing additive generator `lambda` with `lambda(1) = 0`, used to
/// build `phi = exp(-lambda)`.
#[derive(Clone)]
pub enum AdditiveGenerator {
    /// `-scale ln t`
    NegLog {
        scale: f64,
    },
    /// `c (1 - t)`
    Linear {
        c: f64,
    },
    /// identically zero (only valid in the nonincreasing role)
    Zero,
    Custom {
        label: String,
        f: RealFn,
        df: Option<RealFn>,
        inverse: Option<RealFn>,
    },
}

impl fmt::Debug for AdditiveGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl AdditiveGenerator {
    pub fn value(&self, t: f64) -> f64 {
        let t = clamp01(t);
        match self {
            AdditiveGenerator::NegLog { scale } => {
                if *scale == 0.0 {
                    0.0
                } else {
                    -scale * t.ln()
                }
            }
            AdditiveGenerator::Linear { c } => c * (1.0 - t),
            AdditiveGenerator::Zero => 0.0,
            AdditiveGenerator::Custom { f, .. } => f(t),
        }
    }

    pub fn derivative(&self, t: f64) -> Option<f64> {
        let t = clamp01(t);
        match self {
            AdditiveGenerator::NegLog { scale } => Some(if *scale == 0.0 { 0.0 } else { -scale / t }),
            AdditiveGenerator::Linear { c } => Some(-c),
            AdditiveGenerator::Zero => Some(0.0),
            AdditiveGenerator::Custom { df, .. } => df.as_ref().map(|d| d(t)),
        }
    }

    pub fn at_zero(&self) -> f64 {
        self.value(0.0)
    }

    /// `lambda^[-1](s)`: zero for `s >= lambda(0)`, the inverse otherwise.
    pub fn pseudo_inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        if s >= self.at_zero() {
            return 0.0;
        }
        let x = match self {
            AdditiveGenerator::NegLog { scale } => (-s / scale).exp(),
            AdditiveGenerator::Linear { c } => 1.0 - s / c,
            AdditiveGenerator::Zero => 0.0,
            AdditiveGenerator::Custom { inverse: Some(inv), .. } => inv(s),
            AdditiveGenerator::Custom { .. } => {
                bisect_increasing(|t| -self.value(t), 0.0, 1.0, -s, 0.0, 200).map(|r| r.x).unwrap_or(0.0)
            }
        };
        clamp01(x)
    }

    pub fn label(&self) -> String {
        match self {
            AdditiveGenerator::NegLog { scale } => format!("-{scale} ln t"),
            AdditiveGenerator::Linear { c } => format!("{c} (1 - t)"),
            AdditiveGenerator::Zero => "0".into(),
            AdditiveGenerator::Custom { label, .. } => label.clone(),
        }
    }
}

#[derive(Clone)]
pub enum MapKind {
    /// `t^beta`
    Power {
        beta: f64,
    },
    /// `t^beta (2 - t^gamma)` with `0 <= gamma <= beta`
    Ca {
        beta: f64,
        gamma: f64,
    },
    /// `(1 - alpha) t + alpha`
    Affine {
        alpha: f64,
    },
    /// `exp(-c (1 - t))`
    ExpLinear {
        c: f64,
    },
    /// `exp(-lambda(t))`
    ExpNeg(AdditiveGenerator),
    /// `min(slope t, 1)`
    Clipped {
        slope: f64,
    },
    /// piecewise linear through the knots, which must start at t = 0 and end at (1, 1)
    Table(Vec<(f64, f64)>),
    /// `outer(inner(t))`
    Compose(Box<MonotoneMap>, Box<MonotoneMap>),
    /// pointwise maximum
    Max(Box<MonotoneMap>, Box<MonotoneMap>),
    Custom {
        f: RealFn,
        df: Option<RealFn>,
        inverse: Option<RealFn>,
    },
}

/// A continuous nondecreasing map of `[0, 1]` into itself with value 1 at 1.
#[derive(Clone)]
pub struct MonotoneMap {
    kind: MapKind,
    label: String,
    strictness: Strictness,
    at_zero: f64,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneMap")
            .field("label", &self.label)
            .field("strictness", &self.strictness)
            .field("at_zero", &self.at_zero)
            .finish()
    }
}

fn bad(class: &'static str, reason: impl Into<String>) -> TfError {
    TfError::NotMember { class, reason: reason.into() }
}

impl MonotoneMap {
    pub fn new(kind: MapKind) -> Result<Self> {
        let (label, strictness) = match &kind {
            MapKind::Power { beta } => {
                if !(*beta >= 0.0 && beta.is_finite()) {
                    return Err(bad("map", format!("power exponent {beta} must be >= 0")));
                }
                let s = if *beta > 0.0 { Strictness::StrictlyIncreasing } else { Strictness::Increasing };
                (format!("t^{beta}"), s)
            }
            MapKind::Ca { beta, gamma } => {
                if !(*beta > 0.0 && *gamma >= 0.0 && gamma <= beta) {
                    return Err(bad("map", format!("ca map needs 0 <= gamma <= beta, beta > 0 (got {beta}, {gamma})")));
                }
                (format!("t^{beta}(2 - t^{gamma})"), Strictness::StrictlyIncreasing)
            }
            MapKind::Affine { alpha } => {
                if !(0.0..=1.0).contains(alpha) {
                    return Err(bad("map", format!("affine offset {alpha} outside [0, 1]")));
                }
                let s = if *alpha < 1.0 { Strictness::StrictlyIncreasing } else { Strictness::Increasing };
                (format!("{}t + {alpha}", 1.0 - alpha), s)
            }
            MapKind::ExpLinear { c } => {
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(bad("map", format!("exp-linear rate {c} must be >= 0")));
                }
                let s = if *c > 0.0 { Strictness::StrictlyIncreasing } else { Strictness::Increasing };
                (format!("exp(-{c}(1 - t))"), s)
            }
            MapKind::ExpNeg(g) => {
                let s = if g.value(0.5) > 0.0 { Strictness::StrictlyIncreasing } else { Strictness::Increasing };
                (format!("exp(-({}))", g.label()), s)
            }
            MapKind::Clipped { slope } => {
                if !(*slope >= 1.0) {
                    return Err(bad("map", format!("clip slope {slope} must be >= 1")));
                }
                let s = if *slope == 1.0 { Strictness::StrictlyIncreasing } else { Strictness::Increasing };
                (format!("min({slope}t, 1)"), s)
            }
            MapKind::Table(knots) => {
                if knots.len() < 2 || knots[0].0 != 0.0 || knots[knots.len() - 1] != (1.0, 1.0) {
                    return Err(bad("map", "table must start at t=0 and end at (1, 1)"));
                }
                let mut strict = true;
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                        return Err(bad("map", "table knots must increase"));
                    }
                    strict &= w[1].1 > w[0].1;
                }
                if knots[0].1 < 0.0 {
                    return Err(bad("map", "table values must lie in [0, 1]"));
                }
                let s = if strict { Strictness::StrictlyIncreasing } else { Strictness::Increasing };
                (format!("table[{}]", knots.len()), s)
            }
            MapKind::Compose(outer, inner) => {
                let s = if outer.strictness == Strictness::StrictlyIncreasing
                    && inner.strictness == Strictness::StrictlyIncreasing
                {
                    Strictness::StrictlyIncreasing
                } else {
                    Strictness::Increasing
                };
                (format!("({}) o ({})", outer.label, inner.label), s)
            }
            MapKind::Max(a, b) => {
                let s = if a.strictness == Strictness::StrictlyIncreasing
                    && b.strictness == Strictness::StrictlyIncreasing
                {
                    Strictness::StrictlyIncreasing
                } else {
                    Strictness::Increasing
                };
                (format!("max({}, {})", a.label, b.label), s)
            }
            MapKind::Custom { .. } => ("custom".to_string(), Strictness::Increasing),
        };
        let mut m = MonotoneMap { kind, label, strictness, at_zero: 0.0 };
        m.at_zero = m.value(0.0);
        if (m.value(1.0) - 1.0).abs() > 1e-12 {
            return Err(bad("map", format!("{} has value {} at 1", m.label, m.value(1.0))));
        }
        Ok(m)
    }

    /// A map from closures. `strictness` is the declared class; the sampled
    /// checks still apply.
    pub fn custom(
        label: impl Into<String>,
        strictness: Strictness,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: Option<RealFn>,
        inverse: Option<RealFn>,
    ) -> Result<Self> {
        let mut m = MonotoneMap::new(MapKind::Custom { f: Arc::new(f), df, inverse })?;
        m.label = label.into();
        m.strictness = strictness;
        Ok(m)
    }

    pub fn identity() -> Self {
        MonotoneMap::power(1.0)
    }

    pub fn power(beta: f64) -> Self {
        MonotoneMap::new(MapKind::Power { beta }).expect("power exponent must be >= 0")
    }

    pub fn ca(beta: f64, gamma: f64) -> Result<Self> {
        MonotoneMap::new(MapKind::Ca { beta, gamma })
    }

    pub fn affine(alpha: f64) -> Result<Self> {
        MonotoneMap::new(MapKind::Affine { alpha })
    }

    pub fn exp_linear(c: f64) -> Result<Self> {
        MonotoneMap::new(MapKind::ExpLinear { c })
    }

    pub fn exp_neg(g: AdditiveGenerator) -> Result<Self> {
        MonotoneMap::new(MapKind::ExpNeg(g))
    }

    pub fn clipped(slope: f64) -> Result<Self> {
        MonotoneMap::new(MapKind::Clipped { slope })
    }

    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        MonotoneMap::new(MapKind::Table(knots))
    }

    pub fn compose(outer: &MonotoneMap, inner: &MonotoneMap) -> Result<Self> {
        MonotoneMap::new(MapKind::Compose(Box::new(outer.clone()), Box::new(inner.clone())))
    }

    pub fn max(a: &MonotoneMap, b: &MonotoneMap) -> Result<Self> {
        MonotoneMap::new(MapKind::Max(Box::new(a.clone()), Box::new(b.clone())))
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn strictness(&self) -> Strictness {
        self.strictness
    }

    /// Cached value at zero.
    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    pub fn value(&self, t: f64) -> f64 {
        let t = clamp01(t);
        let y = match &self.kind {
            MapKind::Power { beta } => t.powf(*beta),
            MapKind::Ca { beta, gamma } => t.powf(*beta) * (2.0 - t.powf(*gamma)),
            MapKind::Affine { alpha } => (1.0 - alpha) * t + alpha,
            MapKind::ExpLinear { c } => (-c * (1.0 - t)).exp(),
            MapKind::ExpNeg(g) => (-g.value(t)).exp(),
            MapKind::Clipped { slope } => (slope * t).min(1.0),
            MapKind::Table(k) => table_value(k, t),
            MapKind::Compose(o, i) => o.value(i.value(t)),
            MapKind::Max(a, b) => a.value(t).max(b.value(t)),
            MapKind::Custom { f, .. } => f(t),
        };
        clamp01(y)
    }

    /// Whether [`MonotoneMap::derivative`] is closed form.
    pub fn has_analytic_derivative(&self) -> bool {
        match &self.kind {
            MapKind::ExpNeg(g) => g.derivative(0.5).is_some(),
            MapKind::Compose(o, i) => o.has_analytic_derivative() && i.has_analytic_derivative(),
            MapKind::Max(a, b) => a.has_analytic_derivative() && b.has_analytic_derivative(),
            MapKind::Custom { df, .. } => df.is_some(),
            _ => true,
        }
    }

    /// Derivative at `t`, closed form when available and a finite
    /// difference otherwise. Infinite slopes at zero are returned as
    /// `f64::INFINITY`. At kinks the right derivative is used.
    pub fn derivative(&self, t: f64) -> f64 {
        let t = clamp01(t);
        match &self.kind {
            MapKind::Power { beta } => {
                if *beta == 0.0 {
                    0.0
                } else if t == 0.0 {
                    match beta.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0,
                        _ => 0.0,
                    }
                } else {
                    beta * t.powf(beta - 1.0)
                }
            }
            MapKind::Ca { beta, gamma } => {
                let tail = 2.0 * beta - (beta + gamma) * t.powf(*gamma);
                if t == 0.0 {
                    if *beta < 1.0 {
                        f64::INFINITY
                    } else if *beta == 1.0 {
                        tail
                    } else {
                        0.0
                    }
                } else {
                    t.powf(beta - 1.0) * tail
                }
            }
            MapKind::Affine { alpha } => 1.0 - alpha,
            MapKind::ExpLinear { c } => c * (-c * (1.0 - t)).exp(),
            MapKind::ExpNeg(g) => match g.derivative(t) {
                Some(d) => {
                    let v = (-g.value(t)).exp();
                    if v == 0.0 {
                        0.0
                    } else {
                        -d * v
                    }
                }
                None => self.fd_derivative(t),
            },
            MapKind::Clipped { slope } => {
                if slope * t < 1.0 {
                    *slope
                } else {
                    0.0
                }
            }
            MapKind::Table(k) => table_slope(k, t),
            MapKind::Compose(o, i) => {
                let di = i.derivative(t);
                if di == 0.0 {
                    0.0
                } else {
                    o.derivative(i.value(t)) * di
                }
            }
            MapKind::Max(a, b) => {
                let (va, vb) = (a.value(t), b.value(t));
                if va > vb {
                    a.derivative(t)
                } else if vb > va {
                    b.derivative(t)
                } else {
                    a.derivative(t).max(b.derivative(t))
                }
            }
            MapKind::Custom { df: Some(df), .. } => df(t),
            MapKind::Custom { df: None, .. } => self.fd_derivative(t),
        }
    }

    fn fd_derivative(&self, t: f64) -> f64 {
        derivative(|x| self.value(x), t, FD_STEP, 0.0, 1.0)
    }

    /// Closed-form inverse on `[m(0), 1]`, if known.
    fn analytic_inverse(&self, y: f64) -> Option<f64> {
        match &self.kind {
            MapKind::Power { beta } if *beta > 0.0 => Some(y.powf(1.0 / beta)),
            MapKind::Affine { alpha } if *alpha < 1.0 => Some((y - alpha) / (1.0 - alpha)),
            MapKind::ExpLinear { c } if *c > 0.0 => Some(1.0 + y.ln() / c),
            MapKind::ExpNeg(g) => match g {
                AdditiveGenerator::Custom { inverse: None, .. } => None,
                _ => Some(g.pseudo_inverse(-y.ln())),
            },
            MapKind::Clipped { slope } => Some(y / slope),
            MapKind::Table(k) if self.strictness == Strictness::StrictlyIncreasing => Some(table_inverse(k, y)),
            MapKind::Compose(o, i) => {
                let oy = o.analytic_inverse(y.max(o.at_zero))?;
                i.analytic_inverse(oy.max(i.at_zero))
            }
            MapKind::Custom { inverse: Some(inv), .. } => Some(inv(y)),
            _ => None,
        }
    }

    /// `m^[-1](t)`: zero on `[0, m(0)]`, the inverse on `[m(0), 1]`.
    pub fn pseudo_inverse(&self, t: f64) -> f64 {
        let t = clamp01(t);
        if t <= self.at_zero {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        if let Some(s) = self.analytic_inverse(t) {
            return clamp01(s);
        }
        bisect_increasing(|s| self.value(s), 0.0, 1.0, t, 0.0, 200).map(|r| r.x).unwrap_or(0.0)
    }

    pub fn pseudo_inverse_unit(&self, t: UnitValue) -> UnitValue {
        UnitValue::saturating(self.pseudo_inverse(t.get()))
    }
}

fn table_segment(k: &[(f64, f64)], t: f64) -> usize {
    match k.iter().position(|&(x, _)| x > t) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => k.len() - 2,
    }
}

fn table_value(k: &[(f64, f64)], t: f64) -> f64 {
    let i = table_segment(k, t);
    let ((x0, y0), (x1, y1)) = (k[i], k[i + 1]);
    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
}

fn table_slope(k: &[(f64, f64)], t: f64) -> f64 {
    let i = table_segment(k, t);
    let ((x0, y0), (x1, y1)) = (k[i], k[i + 1]);
    (y1 - y0) / (x1 - x0)
}

fn table_inverse(k: &[(f64, f64)], y: f64) -> f64 {
    let i = match k.iter().position(|&(_, v)| v > y) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => k.len() - 2,
    };
    let ((x0, y0), (x1, y1)) = (k[i], k[i + 1]);
    x0 + (x1 - x0) * (y - y0) / (y1 - y0)
}

/// Sampled monotonicity and endpoint check for membership in `class`.
pub fn check_membership(m: &MonotoneMap, class: MapClass, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let g = linspace(0.0, 1.0, n);
    let vals: Vec<f64> = g.iter().map(|&t| m.value(t)).collect();
    let label = match class {
        MapClass::Phi => "phi-membership",
        MapClass::Psi => "psi-membership",
    };
    let end = (vals[n] - 1.0).abs();
    if end > 1e-12 {
        return GridCheckReport::deviation(
            format!("{label}: value at 1"),
            n,
            end,
            Location::Point { u: 1.0, v: vals[n] },
            1e-12,
        );
    }
    if class == MapClass::Phi && m.strictness == Strictness::Increasing && !matches!(m.kind, MapKind::Custom { .. }) {
        // declared non-strict (e.g. clipped or constant pieces)
        let mut r = GridCheckReport::margin(format!("{label}: declared non-strict"), n, 0.0, Location::None, 0.0);
        r.passed = false;
        return r;
    }
    let mut w = Worst::min_identity();
    for i in 0..n {
        w = w.take_min(Worst { value: vals[i + 1] - vals[i], at: Location::Point { u: g[i], v: g[i + 1] } });
    }
    let mut r = GridCheckReport::margin(format!("{label}: increments"), n, w.value, w.at, 0.0);
    r.passed = match class {
        MapClass::Phi => w.value > 0.0,
        MapClass::Psi => w.value >= 0.0,
    };
    r
}

/// Sampled concavity: second differences must not exceed `1e-10`.
pub fn check_concave(m: &MonotoneMap, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let g = linspace(0.0, 1.0, n);
    let vals: Vec<f64> = g.iter().map(|&t| m.value(t)).collect();
    let mut w = Worst::min_identity();
    for i in 1..n {
        let second = vals[i - 1] - 2.0 * vals[i] + vals[i + 1];
        w = w.take_min(Worst { value: -second, at: Location::Point { u: g[i], v: vals[i] } });
    }
    GridCheckReport::margin("concave", n, w.value, w.at, GRID_TOL)
}

/// Membership in the strictly increasing class, plus concavity when
/// requested. The first failing sub-check is returned.
pub fn check_phi_membership(m: &MonotoneMap, n: usize, concave: bool) -> GridCheckReport {
    let member = check_membership(m, MapClass::Phi, n);
    if !member.passed || !concave {
        return member;
    }
    check_concave(m, n)
}

/// The pair `(phi, psi)` of the transform.
#[derive(Debug, Clone)]
pub struct GeneratorPair {
    pub phi: MonotoneMap,
    pub psi: MonotoneMap,
}

impl GeneratorPair {
    /// Checks `phi` for the strict class and `psi` for the weak class.
    pub fn new(phi: MonotoneMap, psi: MonotoneMap) -> Result<Self> {
        let r = check_membership(&phi, MapClass::Phi, MAP_SAMPLES);
        if !r.passed {
            return Err(bad("Phi", format!("{} failed {}", phi.label, r.check)));
        }
        let r = check_membership(&psi, MapClass::Psi, MAP_SAMPLES);
        if !r.passed {
            return Err(bad("Psi", format!("{} failed {}", psi.label, r.check)));
        }
        Ok(GeneratorPair { phi, psi })
    }

    pub fn identity() -> Self {
        GeneratorPair { phi: MonotoneMap::identity(), psi: MonotoneMap::identity() }
    }

    pub fn powers(phi: f64, psi: f64) -> Result<Self> {
        GeneratorPair::new(MonotoneMap::power(phi), MonotoneMap::power(psi))
    }

    /// The four power pairs used for the Archimedean scatter study:
    /// a = (t^4/5, t^1/2), b = (t^2/3, t^1/2), c = (t^1/2, t^1/2), d = (t, t).
    pub fn preset(name: &str) -> Result<Self> {
        let (p, q) = match name {
            "a" => (0.8, 0.5),
            "b" => (2.0 / 3.0, 0.5),
            "c" => (0.5, 0.5),
            "d" => (1.0, 1.0),
            other => return Err(TfError::InvalidArgument(format!("unknown preset {other:?} (expected a, b, c or d)"))),
        };
        GeneratorPair::powers(p, q)
    }

    pub fn label(&self) -> String {
        format!("({}, {})", self.phi.label, self.psi.label)
    }
}

/// Checks `C(phi(u), psi(v)) <= C(phi(v), psi(u))` for `u <= v` on the grid.
pub fn check_condition_d1<C: Copula + ?Sized>(pair: &GeneratorPair, base: &C, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let g = linspace(0.0, 1.0, n);
    let phi: Vec<f64> = g.iter().map(|&t| pair.phi.value(t)).collect();
    let psi: Vec<f64> = g.iter().map(|&t| pair.psi.value(t)).collect();
    let mut w = Worst::min_identity();
    for i in 0..=n {
        for j in i..=n {
            let m = base.eval(phi[j], psi[i]) - base.eval(phi[i], psi[j]);
            w = w.take_min(Worst { value: m, at: Location::Point { u: g[i], v: g[j] } });
        }
    }
    GridCheckReport::margin("condition-d1", n, w.value, w.at, GRID_TOL)
}

/// Sampled monotonicity of `phi / psi` on `(1e-6, 1]`.
pub fn check_ratio_increasing(pair: &GeneratorPair, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let eps = 1e-6;
    let g = linspace(eps, 1.0, n);
    let ratio: Vec<f64> = g.iter().map(|&t| pair.phi.value(t) / pair.psi.value(t)).collect();
    let mut w = Worst::min_identity();
    for i in 0..n {
        let d = ratio[i + 1] - ratio[i];
        let d = if d.is_nan() { f64::NEG_INFINITY } else { d };
        w = w.take_min(Worst { value: d, at: Location::Point { u: g[i], v: g[i + 1] } });
    }
    GridCheckReport::margin("ratio-increasing", n, w.value, w.at, GRID_TOL)
}

/// Which sufficient condition certified a transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateMethod {
    D1Direct,
    SupermigrativeRatio,
    DirectTwoIncreasing,
}

/// Evidence that a transform is a copula.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCertificate {
    pub phi_concave: GridCheckReport,
    pub d1_holds: GridCheckReport,
    pub ratio_increasing: GridCheckReport,
    pub base_supermigrative: Option<GridCheckReport>,
    pub two_increasing: Option<GridCheckReport>,
    pub boundary: Option<GridCheckReport>,
    pub base_family: String,
    pub method: CertificateMethod,
    pub map_samples: usize,
}

impl ConditionCertificate {
    /// Whether the recorded reports support the recorded method.
    pub fn is_consistent(&self) -> bool {
        match self.method {
            CertificateMethod::D1Direct => self.phi_concave.passed && self.d1_holds.passed,
            CertificateMethod::SupermigrativeRatio => {
                self.phi_concave.passed
                    && self.ratio_increasing.passed
                    && self.base_supermigrative.as_ref().is_some_and(|r| r.passed)
            }
            CertificateMethod::DirectTwoIncreasing => {
                self.two_increasing.as_ref().is_some_and(|r| r.passed)
                    && self.boundary.as_ref().is_some_and(|r| r.passed)
            }
        }
    }
}

/// `(phi o f, psi o f)`. The result carries no certificate; concavity of
/// `phi o f` has to be re-checked before the transform is built.
pub fn compose(pair: &GeneratorPair, f: &MonotoneMap) -> Result<GeneratorPair> {
    let r = check_membership(f, MapClass::Phi, MAP_SAMPLES);
    if !r.passed {
        return Err(bad("Phi", format!("{} failed {}", f.label, r.check)));
    }
    if is_identity(f) {
        return Ok(pair.clone());
    }
    GeneratorPair::new(MonotoneMap::compose(&pair.phi, f)?, MonotoneMap::compose(&pair.psi, f)?)
}

fn is_identity(f: &MonotoneMap) -> bool {
    matches!(f.kind, MapKind::Power { beta } if beta == 1.0)
}

fn same_map(a: &MonotoneMap, b: &MonotoneMap) -> bool {
    linspace(0.0, 1.0, MAP_SAMPLES).iter().all(|&t| (a.value(t) - b.value(t)).abs() <= 1e-12)
}

/// `(max(phi1, phi2), psi)` for two pairs sharing `psi`.
pub fn max_phi(p1: &GeneratorPair, p2: &GeneratorPair) -> Result<GeneratorPair> {
    if !same_map(&p1.psi, &p2.psi) {
        return Err(TfError::MismatchedComponent(format!("psi differs: {} vs {}", p1.psi.label, p2.psi.label)));
    }
    if same_map(&p1.phi, &p2.phi) {
        return Ok(p1.clone());
    }
    GeneratorPair::new(MonotoneMap::max(&p1.phi, &p2.phi)?, p1.psi.clone())
}

/// `(phi, max(psi1, psi2))` for two pairs sharing `phi`.
pub fn max_psi(p1: &GeneratorPair, p2: &GeneratorPair) -> Result<GeneratorPair> {
    if !same_map(&p1.phi, &p2.phi) {
        return Err(TfError::MismatchedComponent(format!("phi differs: {} vs {}", p1.phi.label, p2.phi.label)));
    }
    if same_map(&p1.psi, &p2.psi) {
        return Ok(p1.clone());
    }
    GeneratorPair::new(p1.phi.clone(), MonotoneMap::max(&p1.psi, &p2.psi)?)
}
