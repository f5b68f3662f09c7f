//! Catalog of base copulas: the Fréchet bounds, product, FGM,
//! Cuadras-Augé and the Archimedean families, plus the supermigrativity test.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::copula::{
    check_symmetry, fd_partial_u, fd_partial_v, Copula, DerivativeMode, GridCheckReport, Location, Worst, GRID_TOL,
};
use crate::error::{Result, TfError};
use crate::numeric::{bisect_increasing, linspace};
use crate::transform::TransformedCopula;
use crate::unit::{clamp01, UnitValue};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied Archimedean generator.
#[derive(Clone)]
pub struct CustomGenerator {
    pub label: String,
    pub f: RealFn,
    pub df: Option<RealFn>,
    pub inverse: Option<RealFn>,
}

impl fmt::Debug for CustomGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomGenerator")
            .field("label", &self.label)
            .field("df", &self.df.is_some())
            .field("inverse", &self.inverse.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum GeneratorKind {
    /// `-ln t`, generating the product copula.
    NegLog,
    /// `1 - t`, generating the lower Fréchet bound.
    OneMinus,
    /// `t^(-alpha) - 1`
    Clayton {
        alpha: f64,
    },
    /// `(-ln t)^beta`
    Gumbel {
        beta: f64,
    },
    /// `-ln((exp(-gamma t) - 1) / (exp(-gamma) - 1))`
    Frank {
        gamma: f64,
    },
    Custom(CustomGenerator),
}

/// Additive generator of an Archimedean copula: continuous, strictly
/// decreasing and convex on `[0, 1]` with value 0 at 1.
#[derive(Debug, Clone)]
pub struct ArchimedeanGenerator {
    kind: GeneratorKind,
    at_zero: f64,
}

impl ArchimedeanGenerator {
    pub fn new(kind: GeneratorKind) -> Result<Self> {
        match kind {
            GeneratorKind::Clayton { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                return Err(domain("clayton", "alpha", alpha, "alpha > 0"))
            }
            GeneratorKind::Gumbel { beta } if !(beta >= 1.0 && beta.is_finite()) => {
                return Err(domain("gumbel", "beta", beta, "beta >= 1"))
            }
            GeneratorKind::Frank { gamma } if gamma == 0.0 || !gamma.is_finite() => {
                return Err(domain("frank", "gamma", gamma, "gamma != 0"))
            }
            _ => {}
        }
        let mut g = ArchimedeanGenerator { kind, at_zero: 0.0 };
        g.at_zero = g.value(0.0);
        Ok(g)
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    /// True when the generator is infinite at zero.
    pub fn is_strict(&self) -> bool {
        self.at_zero.is_infinite()
    }

    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    pub fn value(&self, t: f64) -> f64 {
        let t = clamp01(t);
        match &self.kind {
            GeneratorKind::NegLog => -t.ln(),
            GeneratorKind::OneMinus => 1.0 - t,
            GeneratorKind::Clayton { alpha } => t.powf(-alpha) - 1.0,
            GeneratorKind::Gumbel { beta } => (-t.ln()).powf(*beta),
            GeneratorKind::Frank { gamma } => {
                if t == 0.0 {
                    return f64::INFINITY;
                }
                -((-gamma * t).exp_m1() / (-gamma).exp_m1()).ln()
            }
            GeneratorKind::Custom(c) => (c.f)(t),
        }
    }

    /// Analytic derivative when one is known.
    pub fn derivative(&self, t: f64) -> Option<f64> {
        let t = clamp01(t);
        Some(match &self.kind {
            GeneratorKind::NegLog => -1.0 / t,
            GeneratorKind::OneMinus => -1.0,
            GeneratorKind::Clayton { alpha } => -alpha * t.powf(-alpha - 1.0),
            GeneratorKind::Gumbel { beta } => {
                if t == 1.0 {
                    if *beta > 1.0 {
                        0.0
                    } else {
                        -1.0
                    }
                } else {
                    -beta * (-t.ln()).powf(beta - 1.0) / t
                }
            }
            GeneratorKind::Frank { gamma } => {
                let a = (-gamma * t).exp_m1();
                gamma * (1.0 + a) / a
            }
            GeneratorKind::Custom(c) => return c.df.as_ref().map(|d| d(t)),
        })
    }

    /// `varphi^[-1](s)`: zero for `s >= varphi(0)`, the inverse otherwise.
    pub fn pseudo_inverse(&self, s: f64) -> f64 {
        if s.is_nan() {
            return 0.0;
        }
        if s <= 0.0 {
            return 1.0;
        }
        if s >= self.at_zero {
            return 0.0;
        }
        let x = match &self.kind {
            GeneratorKind::NegLog => (-s).exp(),
            GeneratorKind::OneMinus => 1.0 - s,
            GeneratorKind::Clayton { alpha } => (1.0 + s).powf(-1.0 / alpha),
            GeneratorKind::Gumbel { beta } => (-s.powf(1.0 / beta)).exp(),
            GeneratorKind::Frank { gamma } => -((-s).exp() * (-gamma).exp_m1()).ln_1p() / gamma,
            GeneratorKind::Custom(c) => match &c.inverse {
                Some(inv) => inv(s),
                None => {
                    // decreasing generator: solve -varphi(t) = -s
                    let f = |t: f64| -self.value(t);
                    bisect_increasing(f, 0.0, 1.0, -s, 1e-13, 200).map(|r| r.x).unwrap_or(0.0)
                }
            },
        };
        clamp01(x)
    }

    pub fn label(&self) -> String {
        match &self.kind {
            GeneratorKind::NegLog => "-ln t".into(),
            GeneratorKind::OneMinus => "1 - t".into(),
            GeneratorKind::Clayton { alpha } => format!("t^-{alpha} - 1"),
            GeneratorKind::Gumbel { beta } => format!("(-ln t)^{beta}"),
            GeneratorKind::Frank { gamma } => format!("frank({gamma})"),
            GeneratorKind::Custom(c) => c.label.clone(),
        }
    }

    /// Sampled check of the generator invariants at `n` interior points.
    pub fn validate(&self, n: usize) -> Result<()> {
        let n = n.max(10);
        let ts: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| self.value(t)).collect();
        if self.value(1.0).abs() > 1e-12 {
            return Err(TfError::InvalidGenerator(format!("varphi(1) = {} != 0", self.value(1.0))));
        }
        if !(self.at_zero > vals[0]) {
            return Err(TfError::InvalidGenerator("varphi(0) must exceed varphi(1/n)".into()));
        }
        for (i, w) in vals.windows(2).enumerate() {
            if !w[0].is_finite() || !(w[1] < w[0]) {
                return Err(TfError::InvalidGenerator(format!("not strictly decreasing near t={}", ts[i])));
            }
        }
        for (i, w) in vals.windows(3).enumerate() {
            let second = w[0] - 2.0 * w[1] + w[2];
            if second < -1e-10 * w[0].abs().max(1.0) {
                return Err(TfError::InvalidGenerator(format!(
                    "not convex near t={} (second difference {second:e})",
                    ts[i + 1]
                )));
            }
        }
        Ok(())
    }
}

fn domain(family: &'static str, param: &'static str, value: f64, dom: &'static str) -> TfError {
    TfError::ParameterDomain { family, param, value, domain: dom }
}

/// Base copula families.
#[derive(Debug, Clone)]
pub enum Family {
    Independence,
    FrechetUpper,
    FrechetLower,
    Fgm { theta: f64 },
    Clayton { alpha: f64 },
    Gumbel { beta: f64 },
    Frank { gamma: f64 },
    CuadrasAuge { alpha: f64 },
    Archimedean(ArchimedeanGenerator),
    Transformed(Arc<TransformedCopula>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Independence => "independence",
            Family::FrechetUpper => "frechet-upper",
            Family::FrechetLower => "frechet-lower",
            Family::Fgm { .. } => "fgm",
            Family::Clayton { .. } => "clayton",
            Family::Gumbel { .. } => "gumbel",
            Family::Frank { .. } => "frank",
            Family::CuadrasAuge { .. } => "cuadras-auge",
            Family::Archimedean(_) => "archimedean",
            Family::Transformed(_) => "transformed",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Family::Fgm { theta } if !(-1.0..=1.0).contains(&theta) => {
                Err(domain("fgm", "theta", theta, "-1 <= theta <= 1"))
            }
            Family::Clayton { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(domain("clayton", "alpha", alpha, "alpha > 0"))
            }
            Family::Gumbel { beta } if !(beta >= 1.0 && beta.is_finite()) => {
                Err(domain("gumbel", "beta", beta, "beta >= 1"))
            }
            Family::Frank { gamma } if gamma == 0.0 || !gamma.is_finite() => {
                Err(domain("frank", "gamma", gamma, "gamma != 0"))
            }
            Family::CuadrasAuge { alpha } if !(0.0..=1.0).contains(&alpha) => {
                Err(domain("cuadras-auge", "alpha", alpha, "0 <= alpha <= 1"))
            }
            _ => Ok(()),
        }
    }
}

/// A base copula: a family with validated parameters.
#[derive(Debug, Clone)]
pub struct CopulaSpec {
    family: Family,
    mode: DerivativeMode,
}

impl CopulaSpec {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(CopulaSpec { family, mode: DerivativeMode::Analytic })
    }

    pub fn independence() -> Self {
        CopulaSpec { family: Family::Independence, mode: DerivativeMode::Analytic }
    }

    pub fn upper() -> Self {
        CopulaSpec { family: Family::FrechetUpper, mode: DerivativeMode::Analytic }
    }

    pub fn lower() -> Self {
        CopulaSpec { family: Family::FrechetLower, mode: DerivativeMode::Analytic }
    }

    pub fn fgm(theta: f64) -> Result<Self> {
        Self::new(Family::Fgm { theta })
    }

    pub fn clayton(alpha: f64) -> Result<Self> {
        Self::new(Family::Clayton { alpha })
    }

    pub fn gumbel(beta: f64) -> Result<Self> {
        Self::new(Family::Gumbel { beta })
    }

    pub fn frank(gamma: f64) -> Result<Self> {
        Self::new(Family::Frank { gamma })
    }

    pub fn cuadras_auge(alpha: f64) -> Result<Self> {
        Self::new(Family::CuadrasAuge { alpha })
    }

    pub fn transformed(tf: TransformedCopula) -> Self {
        CopulaSpec { family: Family::Transformed(Arc::new(tf)), mode: DerivativeMode::Analytic }
    }

    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.mode
    }

    /// The additive generator for families that are Archimedean.
    pub fn archimedean_generator(&self) -> Option<ArchimedeanGenerator> {
        let kind = match &self.family {
            Family::Independence => GeneratorKind::NegLog,
            Family::FrechetLower => GeneratorKind::OneMinus,
            Family::Clayton { alpha } => GeneratorKind::Clayton { alpha: *alpha },
            Family::Gumbel { beta } => GeneratorKind::Gumbel { beta: *beta },
            Family::Frank { gamma } => GeneratorKind::Frank { gamma: *gamma },
            Family::Archimedean(g) => return Some(g.clone()),
            _ => return None,
        };
        ArchimedeanGenerator::new(kind).ok()
    }

    /// Whether both partial derivatives are available in closed form.
    pub fn has_analytic_partials(&self) -> bool {
        if self.mode == DerivativeMode::FiniteDifference {
            return false;
        }
        match &self.family {
            Family::Archimedean(g) => g.derivative(0.5).is_some(),
            Family::Transformed(tf) => tf.has_analytic_derivatives(),
            _ => true,
        }
    }

    fn analytic_partial_u(&self, u: f64, v: f64) -> f64 {
        match &self.family {
            Family::Independence => v,
            Family::FrechetUpper => {
                if u <= v {
                    1.0
                } else {
                    0.0
                }
            }
            Family::FrechetLower => {
                if u + v >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Fgm { theta } => v * (1.0 + theta * (1.0 - v) * (1.0 - 2.0 * u)),
            Family::Clayton { alpha } => {
                if v == 0.0 {
                    return 0.0;
                }
                // u^(-a-1) (u^-a + v^-a - 1)^(-1/a - 1), rewritten to stay finite at u = 0
                (1.0 + u.powf(*alpha) * (v.powf(-alpha) - 1.0)).powf(-1.0 / alpha - 1.0)
            }
            Family::Gumbel { beta } => {
                if u == 0.0 || v == 0.0 {
                    return 0.0;
                }
                let (x, y) = (-u.ln(), -v.ln());
                if x == 0.0 {
                    return if y == 0.0 { 1.0 } else { 0.0 };
                }
                let a = x.powf(*beta) + y.powf(*beta);
                let c = (-a.powf(1.0 / beta)).exp();
                c * a.powf(1.0 / beta - 1.0) * x.powf(beta - 1.0) / u
            }
            Family::Frank { gamma } => {
                let a = (-gamma * u).exp_m1();
                let b = (-gamma * v).exp_m1();
                let g = (-gamma).exp_m1();
                (1.0 + a) * b / (g + a * b)
            }
            Family::CuadrasAuge { alpha } => {
                if u <= v {
                    v.powf(*alpha)
                } else {
                    alpha * u.powf(alpha - 1.0) * v
                }
            }
            Family::Archimedean(g) => archimedean_partial(g, u, v).unwrap_or_else(|| fd_partial_u(self, u, v)),
            Family::Transformed(tf) => tf.partial_u(u, v),
        }
    }

    fn analytic_partial_v(&self, u: f64, v: f64) -> f64 {
        match &self.family {
            Family::FrechetUpper => {
                if v < u {
                    1.0
                } else {
                    0.0
                }
            }
            Family::CuadrasAuge { alpha } => {
                if u <= v {
                    if u == 0.0 {
                        0.0
                    } else {
                        alpha * u * v.powf(alpha - 1.0)
                    }
                } else {
                    u.powf(*alpha)
                }
            }
            Family::Archimedean(g) => archimedean_partial(g, v, u).unwrap_or_else(|| fd_partial_v(self, u, v)),
            Family::Transformed(tf) => tf.partial_v(u, v),
            // remaining families are exchangeable and smooth off their kinks
            _ => self.analytic_partial_u(v, u),
        }
    }
}

fn archimedean_partial(g: &ArchimedeanGenerator, u: f64, v: f64) -> Option<f64> {
    let c = g.pseudo_inverse(g.value(u) + g.value(v));
    if c <= 0.0 {
        return Some(0.0);
    }
    let du = g.derivative(u)?;
    let dc = g.derivative(c)?;
    if !du.is_finite() {
        return Some(0.0);
    }
    Some(clamp01(du / dc))
}

impl Copula for CopulaSpec {
    fn eval(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp01(u), clamp01(v));
        let val = match &self.family {
            Family::Independence => u * v,
            Family::FrechetUpper => u.min(v),
            Family::FrechetLower => (u + v - 1.0).max(0.0),
            Family::Fgm { theta } => u * v * (1.0 + theta * (1.0 - u) * (1.0 - v)),
            Family::Clayton { alpha } => {
                if u == 0.0 || v == 0.0 {
                    0.0
                } else {
                    (u.powf(-alpha) + v.powf(-alpha) - 1.0).powf(-1.0 / alpha)
                }
            }
            Family::Gumbel { beta } => {
                let a = (-u.ln()).powf(*beta) + (-v.ln()).powf(*beta);
                (-a.powf(1.0 / beta)).exp()
            }
            Family::Frank { gamma } => {
                let num = (-gamma * u).exp_m1() * (-gamma * v).exp_m1();
                -(num / (-gamma).exp_m1()).ln_1p() / gamma
            }
            Family::CuadrasAuge { alpha } => {
                if u <= v {
                    u * v.powf(*alpha)
                } else {
                    u.powf(*alpha) * v
                }
            }
            Family::Archimedean(g) => {
                if u == 0.0 || v == 0.0 {
                    0.0
                } else {
                    g.pseudo_inverse(g.value(u) + g.value(v))
                }
            }
            Family::Transformed(tf) => tf.eval(u, v),
        };
        clamp01(val)
    }

    fn partial_u(&self, u: f64, v: f64) -> f64 {
        match self.mode {
            DerivativeMode::Analytic => self.analytic_partial_u(clamp01(u), clamp01(v)),
            DerivativeMode::FiniteDifference => fd_partial_u(self, u, v),
        }
    }

    fn partial_v(&self, u: f64, v: f64) -> f64 {
        match self.mode {
            DerivativeMode::Analytic => self.analytic_partial_v(clamp01(u), clamp01(v)),
            DerivativeMode::FiniteDifference => fd_partial_v(self, u, v),
        }
    }

    fn is_exchangeable(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        match &self.family {
            Family::Independence | Family::FrechetUpper | Family::FrechetLower => self.family.name().into(),
            Family::Fgm { theta } => format!("fgm(theta={theta})"),
            Family::Clayton { alpha } => format!("clayton(alpha={alpha})"),
            Family::Gumbel { beta } => format!("gumbel(beta={beta})"),
            Family::Frank { gamma } => format!("frank(gamma={gamma})"),
            Family::CuadrasAuge { alpha } => format!("cuadras-auge(alpha={alpha})"),
            Family::Archimedean(g) => format!("archimedean({})", g.label()),
            Family::Transformed(tf) => tf.name(),
        }
    }
}

/// Archimedean copula `varphi^[-1](varphi(u) + varphi(v))` for a generator
/// that passes sampled monotonicity and convexity checks.
pub fn make_archimedean(gen: ArchimedeanGenerator) -> Result<CopulaSpec> {
    gen.validate(1000)?;
    Ok(CopulaSpec { family: Family::Archimedean(gen), mode: DerivativeMode::Analytic })
}

/// Closed-form evaluation of a family at validated unit arguments.
pub fn eval_family(family: &Family, u: UnitValue, v: UnitValue) -> Result<UnitValue> {
    let spec = CopulaSpec::new(family.clone())?;
    Ok(spec.value(u, v))
}

/// Checks `C(a x, y) >= C(x, a y)` over an `n^3` lattice of `(a, x, y)`
/// with `y <= x`. Exchangeability is verified first.
pub fn check_supermigrative<C: Copula + ?Sized>(c: &C, n: usize) -> Result<GridCheckReport> {
    let n = n.max(2);
    let sym = check_symmetry(c, n.max(50), 1e-12);
    if !sym.passed {
        return Err(TfError::NotExchangeable(sym.worst_violation));
    }
    let g = linspace(0.0, 1.0, n - 1);
    let worst = g
        .par_iter()
        .map(|&a| {
            let mut w = Worst::min_identity();
            for (j, &x) in g.iter().enumerate() {
                for &y in &g[..=j] {
                    let m = c.eval(a * x, y) - c.eval(x, a * y);
                    w = w.take_min(Worst { value: m, at: Location::Triple { alpha: a, x, y } });
                }
            }
            w
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Worst::min_identity(), Worst::take_min);
    Ok(GridCheckReport::margin("supermigrative", n, worst.value, worst.at, GRID_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{check_boundary, check_partial_derivatives, check_two_increasing, sup_distance};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn closed_form_values() {
        close(CopulaSpec::independence().eval(0.3, 0.5), 0.15, 1e-15);
        close(CopulaSpec::upper().eval(0.3, 0.5), 0.3, 0.0);
        close(CopulaSpec::fgm(1.0).unwrap().eval(0.5, 0.5), 0.3125, 1e-15);
        close(CopulaSpec::cuadras_auge(0.5).unwrap().eval(0.25, 0.81), 0.225, 1e-15);
        close(CopulaSpec::frank(4.0).unwrap().eval(1.0, 0.37), 0.37, 1e-14);
        // exp(-(2 (ln 2)^3)^(1/3)) = 2^(-2^(1/3))
        let gumbel = 2f64.powf(-(2f64.powf(1.0 / 3.0)));
        close(CopulaSpec::gumbel(3.0).unwrap().eval(0.5, 0.5), gumbel, 1e-15);
        // 2^(-2^(1/3)), computed independently
        close(gumbel, 0.417_566_810_032_921_1, 1e-12);
    }

    #[test]
    fn parameter_domains() {
        assert!(CopulaSpec::gumbel(0.5).is_err());
        assert!(CopulaSpec::fgm(1.5).is_err());
        assert!(CopulaSpec::clayton(0.0).is_err());
        assert!(CopulaSpec::frank(0.0).is_err());
        assert!(CopulaSpec::cuadras_auge(1.1).is_err());
        assert!(eval_family(&Family::Gumbel { beta: 0.9 }, UnitValue::ONE, UnitValue::ONE).is_err());
    }

    #[test]
    fn archimedean_generators_reproduce_families() {
        let pi = make_archimedean(ArchimedeanGenerator::new(GeneratorKind::NegLog).unwrap()).unwrap();
        close(pi.eval(0.3, 0.5), 0.15, 1e-15);
        let w = make_archimedean(ArchimedeanGenerator::new(GeneratorKind::OneMinus).unwrap()).unwrap();
        close(w.eval(0.7, 0.6), 0.3, 1e-15);
        close(w.eval(0.2, 0.3), 0.0, 0.0);
        let cl = make_archimedean(ArchimedeanGenerator::new(GeneratorKind::Clayton { alpha: 2.0 }).unwrap()).unwrap();
        close(cl.eval(0.5, 0.5), 7f64.powf(-0.5), 1e-15);
        close(7f64.powf(-0.5), 0.377_96, 5e-6);
    }

    #[test]
    fn custom_generator_numeric_inverse() {
        let gen = ArchimedeanGenerator::new(GeneratorKind::Custom(CustomGenerator {
            label: "t^-2 - 1".into(),
            f: Arc::new(|t: f64| t.powi(-2) - 1.0),
            df: None,
            inverse: None,
        }))
        .unwrap();
        let c = make_archimedean(gen).unwrap();
        close(c.eval(0.5, 0.5), 7f64.powf(-0.5), 1e-12);
    }

    #[test]
    fn non_convex_generator_rejected() {
        let gen = ArchimedeanGenerator::new(GeneratorKind::Custom(CustomGenerator {
            label: "1 - t^2".into(),
            f: Arc::new(|t: f64| 1.0 - t * t),
            df: None,
            inverse: None,
        }))
        .unwrap();
        assert!(matches!(make_archimedean(gen), Err(TfError::InvalidGenerator(_))));
    }

    #[test]
    fn generic_matches_closed_form() {
        for (kind, spec) in [
            (GeneratorKind::Clayton { alpha: 2.0 }, CopulaSpec::clayton(2.0).unwrap()),
            (GeneratorKind::Gumbel { beta: 3.0 }, CopulaSpec::gumbel(3.0).unwrap()),
            (GeneratorKind::Frank { gamma: 4.0 }, CopulaSpec::frank(4.0).unwrap()),
            (GeneratorKind::Frank { gamma: -3.0 }, CopulaSpec::frank(-3.0).unwrap()),
        ] {
            let generic = make_archimedean(ArchimedeanGenerator::new(kind).unwrap()).unwrap();
            let r = sup_distance(&generic, &spec, 100);
            assert!(r.worst_violation <= 1e-10, "{}: {r:?}", spec.name());
        }
    }

    #[test]
    fn cuadras_auge_endpoints() {
        // uv^alpha below the diagonal: alpha = 0 is M, alpha = 1 is the product
        let m = sup_distance(&CopulaSpec::cuadras_auge(0.0).unwrap(), &CopulaSpec::upper(), 100);
        let p = sup_distance(&CopulaSpec::cuadras_auge(1.0).unwrap(), &CopulaSpec::independence(), 100);
        assert!(m.worst_violation <= 1e-14);
        assert!(p.worst_violation <= 1e-14);
    }

    fn shipped() -> Vec<CopulaSpec> {
        vec![
            CopulaSpec::independence(),
            CopulaSpec::upper(),
            CopulaSpec::lower(),
            CopulaSpec::fgm(1.0).unwrap(),
            CopulaSpec::fgm(-0.7).unwrap(),
            CopulaSpec::clayton(2.0).unwrap(),
            CopulaSpec::gumbel(3.0).unwrap(),
            CopulaSpec::frank(4.0).unwrap(),
            CopulaSpec::frank(-2.0).unwrap(),
            CopulaSpec::cuadras_auge(0.3).unwrap(),
        ]
    }

    #[test]
    fn shipped_families_are_copulas() {
        for c in shipped() {
            assert!(check_boundary(&c, 200).passed, "{}", c.name());
            let r = check_two_increasing(&c, 200, 1e-10);
            assert!(r.passed, "{}: {r:?}", c.name());
        }
    }

    #[test]
    fn shipped_families_are_exchangeable() {
        for c in shipped() {
            assert!(check_symmetry(&c, 100, 1e-14).passed, "{}", c.name());
        }
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        for c in shipped() {
            let r = check_partial_derivatives(&c, 40, 0.02, 1e-5);
            assert!(r.passed, "{}: {r:?}", c.name());
        }
    }

    #[test]
    fn partial_examples() {
        close(CopulaSpec::independence().partial_u(0.3, 0.5), 0.5, 0.0);
        close(CopulaSpec::upper().partial_u(0.3, 0.5), 1.0, 0.0);
        let cl = CopulaSpec::clayton(2.0).unwrap();
        close(cl.partial_u(0.5, 0.5), fd_partial_u(&cl, 0.5, 0.5), 1e-6);
        // Clayton conditional is 1 at u = 0 for v > 0
        close(cl.partial_u(0.0, 0.4), 1.0, 1e-12);
    }

    #[test]
    fn supermigrative_criteria() {
        let yes = [
            CopulaSpec::independence(),
            CopulaSpec::upper(),
            CopulaSpec::fgm(1.0).unwrap(),
            CopulaSpec::fgm(0.0).unwrap(),
            CopulaSpec::clayton(2.0).unwrap(),
            CopulaSpec::cuadras_auge(0.0).unwrap(),
            CopulaSpec::cuadras_auge(0.4).unwrap(),
            CopulaSpec::cuadras_auge(1.0).unwrap(),
        ];
        for c in yes {
            let r = check_supermigrative(&c, 40).unwrap();
            assert!(r.passed, "{}: {r:?}", c.name());
        }
        let r = check_supermigrative(&CopulaSpec::fgm(-0.5).unwrap(), 40).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn supermigrative_rejects_asymmetric() {
        let c = crate::copula::FnCopula::new("asym", |u: f64, v: f64| u * v * (1.0 + 0.5 * u * (1.0 - u) * (1.0 - v)));
        assert!(matches!(check_supermigrative(&c, 10), Err(TfError::NotExchangeable(_))));
    }
}
