//! The transformed copula `phi^[-1](C(phi(u ^ v), psi(u v v)))`, its
//! validity gates and its singular/absolutely continuous split.

use serde::Serialize;

use crate::base::{check_supermigrative, CopulaSpec, Family};
use crate::copula::{
    check_boundary, check_two_increasing, Copula, DerivativeMode, GridCheckReport, Location, GRID_TOL,
};
use crate::error::{Result, TfError};
use crate::generators::{
    check_concave, check_condition_d1, check_ratio_increasing, AdditiveGenerator, CertificateMethod,
    ConditionCertificate, GeneratorPair, MapKind, MonotoneMap,
};
use crate::numeric::{adaptive_simpson, linspace};
use crate::unit::{clamp01, UnitValue};

/// Lower integration limit used in place of 0 for profiles whose slope
/// blows up at the origin.
pub const OPEN_START: f64 = 1e-9;
/// Absolute tolerance for the diagonal-jump integral.
pub const MASS_TOL: f64 = 1e-9;
/// Agreement required between quadrature and a closed-form mass.
pub const CLOSED_FORM_TOL: f64 = 1e-6;
/// One-sided step for finite-difference conditional CDFs.
pub const FD_COND_STEP: f64 = 1e-7;
/// Step for the finite-difference mixed density.
pub const DENSITY_STEP: f64 = 1e-5;
/// Half-width of the band around the diagonal where no density is reported.
pub const DIAGONAL_BAND: f64 = 1e-4;

/// Which validity condition the builder requires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Gate {
    /// concave `phi` with d1, or supermigrative base with `phi / psi` increasing
    #[default]
    Theorem,
    /// sampled 2-increasing and boundary checks on the candidate itself
    Direct,
}

/// Grid sizes used by [`build`].
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub grid: usize,
    pub map_samples: usize,
    pub supermigrative_grid: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { grid: 200, map_samples: 1000, supermigrative_grid: 40 }
    }
}

/// Known analytic decompositions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClosedForm {
    /// FGM base with `phi = t`, `psi = t^1/2`
    TfFgmPowerHalf {
        theta: f64,
    },
    /// Cuadras-Auge base with `phi = t^alpha`, `psi = t^alpha (2 - t^gamma)`
    TfCaBetaAlpha {
        alpha: f64,
        gamma: f64,
    },
    None,
}

impl ClosedForm {
    fn detect(base: &CopulaSpec, pair: &GeneratorPair) -> ClosedForm {
        match (base.family(), pair.phi.kind(), pair.psi.kind()) {
            (Family::Fgm { theta }, MapKind::Power { beta: b1 }, MapKind::Power { beta: b2 })
                if *b1 == 1.0 && *b2 == 0.5 =>
            {
                ClosedForm::TfFgmPowerHalf { theta: *theta }
            }
            (Family::CuadrasAuge { alpha }, MapKind::Power { beta: b1 }, MapKind::Ca { beta: b2, gamma })
                if b1 == alpha && b2 == alpha && *alpha > 0.0 =>
            {
                ClosedForm::TfCaBetaAlpha { alpha: *alpha, gamma: *gamma }
            }
            _ => ClosedForm::None,
        }
    }

    /// Singular part `S(u, v)`, which depends on `u ^ v` only.
    pub fn singular(&self, u: f64, v: f64) -> Option<f64> {
        let m = u.min(v);
        match *self {
            ClosedForm::TfFgmPowerHalf { theta } => {
                Some(m.powf(1.5) * (5.0 + theta * (5.0 - 9.0 * m + 5.0 * m.powf(1.5))) / 15.0)
            }
            ClosedForm::TfCaBetaAlpha { alpha, gamma } => Some(
                m.powf(1.0 + alpha)
                    * (4.0 / (1.0 + alpha) - m.powf(gamma) * (1.0 - alpha - gamma) / (1.0 + alpha + gamma) - 2.0),
            ),
            ClosedForm::None => None,
        }
    }

    /// `P(U = V)`.
    pub fn mass(&self) -> Option<f64> {
        self.singular(1.0, 1.0)
    }

    /// The copula itself in the simplified power form.
    pub fn eval(&self, u: f64, v: f64) -> Option<f64> {
        let (m, x) = (u.min(v), u.max(v));
        match *self {
            ClosedForm::TfFgmPowerHalf { theta } => Some(m * x.sqrt() * (1.0 + theta * (1.0 - m) * (1.0 - x.sqrt()))),
            ClosedForm::TfCaBetaAlpha { alpha, gamma } => Some(m * x.powf(alpha) * (2.0 - x.powf(gamma))),
            ClosedForm::None => None,
        }
    }

    /// Absolutely continuous part `A = C - S`.
    pub fn ac(&self, u: f64, v: f64) -> Option<f64> {
        Some(self.eval(u, v)? - self.singular(u, v)?)
    }
}

/// Which side of the diagonal a conditional-CDF formula describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `v >= u`
    Upper,
    /// `v < u`
    Lower,
}

/// A base copula and a generator pair, optionally with a validity
/// certificate.
#[derive(Debug, Clone)]
pub struct TransformedCopula {
    base: CopulaSpec,
    pair: GeneratorPair,
    certificate: Option<ConditionCertificate>,
    closed_form: ClosedForm,
    mode: DerivativeMode,
}

/// Builds and certifies a transform.
pub fn build(base: CopulaSpec, pair: GeneratorPair, gate: Gate, opts: &BuildOptions) -> Result<TransformedCopula> {
    let phi_concave = check_concave(&pair.phi, opts.map_samples);
    let d1_holds = check_condition_d1(&pair, &base, opts.grid);
    let ratio_increasing = check_ratio_increasing(&pair, opts.map_samples);
    let mut cert = ConditionCertificate {
        phi_concave,
        d1_holds,
        ratio_increasing,
        base_supermigrative: None,
        two_increasing: None,
        boundary: None,
        base_family: base.name(),
        method: CertificateMethod::D1Direct,
        map_samples: opts.map_samples,
    };
    let mut tf = TransformedCopula::candidate(base, pair);
    match gate {
        Gate::Theorem => {
            if !cert.phi_concave.passed {
                return Err(failed("phi-concave", &cert.phi_concave));
            }
            if !cert.d1_holds.passed {
                let sm = match check_supermigrative(&tf.base, opts.supermigrative_grid) {
                    Ok(r) => r,
                    Err(TfError::NotExchangeable(w)) => GridCheckReport::deviation(
                        "supermigrative: exchangeability",
                        opts.supermigrative_grid,
                        w,
                        Location::None,
                        1e-12,
                    ),
                    Err(e) => return Err(e),
                };
                let sm_ok = sm.passed;
                cert.base_supermigrative = Some(sm);
                if !sm_ok {
                    return Err(failed("condition-d1 (base not supermigrative)", &cert.d1_holds));
                }
                if !cert.ratio_increasing.passed {
                    return Err(failed("condition-d1 (phi/psi not increasing)", &cert.d1_holds));
                }
                cert.method = CertificateMethod::SupermigrativeRatio;
            }
        }
        Gate::Direct => {
            let two = check_two_increasing(&tf, opts.grid, GRID_TOL);
            let bnd = check_boundary(&tf, opts.grid);
            let (two_ok, bnd_ok) = (two.passed, bnd.passed);
            cert.two_increasing = Some(two.clone());
            cert.boundary = Some(bnd.clone());
            cert.method = CertificateMethod::DirectTwoIncreasing;
            if !two_ok {
                return Err(failed("two-increasing", &two));
            }
            if !bnd_ok {
                return Err(failed("boundary", &bnd));
            }
        }
    }
    tf.certificate = Some(cert);
    Ok(tf)
}

fn failed(condition: &str, report: &GridCheckReport) -> TfError {
    TfError::ValidationFailed { condition: condition.to_string(), report: Box::new(report.clone()) }
}

/// Per-point diagonal information.
#[derive(Debug, Clone, Serialize)]
pub struct SingularDecomposition {
    pub singular_mass: f64,
    pub ac_mass: f64,
    pub closed_form_mass: Option<f64>,
    pub quadrature_error: f64,
    pub intervals: usize,
    /// `(u, jump(u))`
    pub jump_profile: Vec<(f64, f64)>,
    pub method: DecompositionMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionMethod {
    ClosedForm,
    Quadrature,
}

/// Result of comparing the diagonal jump sign with the Archimedean
/// sufficient criterion.
#[derive(Debug, Clone, Serialize)]
pub struct SingularSupportReport {
    pub points: usize,
    /// number of sampled `u` with a strictly positive jump numerator
    pub points_in_s: usize,
    pub min_numerator: f64,
    pub max_numerator: f64,
    /// `varphi o psi - varphi o phi` strictly increasing on the grid
    pub archimedean_criterion: Option<bool>,
    /// the criterion (when available) implies a full diagonal; checks the implication
    pub agrees: bool,
}

impl SingularSupportReport {
    pub fn s_empty(&self) -> bool {
        self.points_in_s == 0
    }

    pub fn s_full(&self) -> bool {
        self.points_in_s == self.points
    }
}

fn positive_part_tol(scale: f64) -> f64 {
    1e-12 * scale.max(1.0)
}

impl TransformedCopula {
    /// An unvalidated candidate, e.g. for the direct gate or for
    /// probing pairs that may not yield a copula.
    pub fn candidate(base: CopulaSpec, pair: GeneratorPair) -> Self {
        let closed_form = ClosedForm::detect(&base, &pair);
        TransformedCopula { base, pair, certificate: None, closed_form, mode: DerivativeMode::Analytic }
    }

    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn base(&self) -> &CopulaSpec {
        &self.base
    }

    pub fn pair(&self) -> &GeneratorPair {
        &self.pair
    }

    pub fn phi(&self) -> &MonotoneMap {
        &self.pair.phi
    }

    pub fn psi(&self) -> &MonotoneMap {
        &self.pair.psi
    }

    pub fn certificate(&self) -> Option<&ConditionCertificate> {
        self.certificate.as_ref()
    }

    pub fn closed_form(&self) -> ClosedForm {
        self.closed_form
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.mode
    }

    /// Whether the conditional CDF comes from closed-form pieces only.
    pub fn has_analytic_derivatives(&self) -> bool {
        self.mode == DerivativeMode::Analytic
            && self.base.has_analytic_partials()
            && self.pair.phi.has_analytic_derivative()
            && self.pair.psi.has_analytic_derivative()
    }

    pub fn name(&self) -> String {
        format!("tf[{}; phi={}, psi={}]", self.base.name(), self.pair.phi.label(), self.pair.psi.label())
    }

    /// `C(phi(u ^ v), psi(u v v))`, the argument of the outer pseudo-inverse.
    pub fn inner(&self, u: f64, v: f64) -> f64 {
        let (m, x) = if u <= v { (u, v) } else { (v, u) };
        self.base.eval(self.pair.phi.value(m), self.pair.psi.value(x))
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp01(u), clamp01(v));
        self.pair.phi.pseudo_inverse(self.inner(u, v))
    }

    pub fn eval_unit(&self, u: UnitValue, v: UnitValue) -> UnitValue {
        UnitValue::saturating(self.eval(u.get(), v.get()))
    }

    /// Evaluation through the composed Archimedean generator,
    /// `(g o phi)^[-1]((g o phi)(u ^ v) + (g o psi)(u v v))`. `None` when the
    /// base is not Archimedean.
    pub fn eval_archimedean_shortcut(&self, u: f64, v: f64) -> Option<f64> {
        let g = self.base.archimedean_generator()?;
        let (m, x) = (clamp01(u.min(v)), clamp01(u.max(v)));
        let s = g.value(self.pair.phi.value(m)) + g.value(self.pair.psi.value(x));
        Some(self.pair.phi.pseudo_inverse(g.pseudo_inverse(s)))
    }

    fn s1_guard(&self, u: f64, v: f64) -> Result<f64> {
        let arg = self.inner(u, v);
        let z = self.pair.phi.at_zero();
        if z > 0.0 && arg <= z {
            return Err(TfError::OutsideS1 { u, v });
        }
        Ok(arg)
    }

    /// `P(V <= v | U = u)`. At `v = u` the limit from above is returned, so
    /// the diagonal atom is included.
    pub fn conditional_cdf(&self, u: f64, v: f64) -> Result<f64> {
        let branch = if v >= u { Branch::Upper } else { Branch::Lower };
        self.conditional_cdf_branch(u, v, branch)
    }

    pub fn conditional_cdf_unit(&self, u: UnitValue, v: UnitValue) -> Result<f64> {
        self.conditional_cdf(u.get(), v.get())
    }

    /// The conditional CDF formula of one branch, evaluated as given even
    /// on the diagonal. `Upper` at `v = u` is the right limit in `v`,
    /// `Lower` is the left limit.
    pub fn conditional_cdf_branch(&self, u: f64, v: f64, branch: Branch) -> Result<f64> {
        let (u, v) = (clamp01(u), clamp01(v));
        let arg = self.s1_guard(u, v)?;
        if self.mode == DerivativeMode::FiniteDifference {
            return Ok(self.fd_branch(u, v, branch));
        }
        let phi = &self.pair.phi;
        let psi = &self.pair.psi;
        let num = match branch {
            Branch::Upper => {
                let c1 = self.base.partial_u(phi.value(u), psi.value(v));
                if c1 == 0.0 {
                    return Ok(0.0);
                }
                c1 * phi.derivative(u)
            }
            Branch::Lower => {
                let c2 = self.base.partial_v(phi.value(v), psi.value(u));
                if c2 == 0.0 {
                    return Ok(0.0);
                }
                c2 * psi.derivative(u)
            }
        };
        if num == 0.0 || (arg == 0.0 && phi.at_zero() == 0.0) {
            return Ok(0.0);
        }
        let den = phi.derivative(phi.pseudo_inverse(arg));
        Ok(ratio(num, den))
    }

    /// One-sided difference of `eval` in `u`, staying on the branch's side
    /// of the diagonal, with one Richardson step.
    fn fd_branch(&self, u: f64, v: f64, branch: Branch) -> f64 {
        let f = |x: f64| self.eval(x, v);
        let d = |h: f64| match branch {
            Branch::Upper => (f(u) - f(u - h)) / h,
            Branch::Lower => (f(u + h) - f(u)) / h,
        };
        let room = match branch {
            Branch::Upper => u / 2.0,
            Branch::Lower => (1.0 - u) / 2.0,
        };
        let h = FD_COND_STEP.min(room);
        if h <= 0.0 {
            let h = FD_COND_STEP;
            return match branch {
                Branch::Upper => (f(u + h) - f(u)) / h,
                Branch::Lower => (f(u) - f(u - h)) / h,
            }
            .clamp(0.0, 1.0);
        }
        (2.0 * d(h / 2.0) - d(h)).clamp(0.0, 1.0)
    }

    /// The atom `P(V = u | U = u)`.
    pub fn diagonal_jump(&self, u: f64) -> Result<f64> {
        Ok(self.conditional_cdf_branch(u, u, Branch::Upper)? - self.conditional_cdf_branch(u, u, Branch::Lower)?)
    }

    /// `C_1(phi(u), psi(u)) phi'(u) - C_2(phi(u), psi(u)) psi'(u)`, whose sign
    /// decides whether `(u, u)` carries singular mass.
    pub fn jump_numerator(&self, u: f64) -> f64 {
        let u = clamp01(u);
        let (p, q) = (self.pair.phi.value(u), self.pair.psi.value(u));
        let a = self.base.partial_u(p, q);
        let b = self.base.partial_v(p, q);
        let a = if a == 0.0 { 0.0 } else { a * self.pair.phi.derivative(u) };
        let b = if b == 0.0 { 0.0 } else { b * self.pair.psi.derivative(u) };
        a - b
    }

    fn require_phi_zero(&self) -> Result<()> {
        if self.pair.phi.at_zero() > 0.0 {
            return Err(TfError::PreconditionViolated(format!(
                "phi(0) = {} > 0; the diagonal decomposition needs phi(0) = 0",
                self.pair.phi.at_zero()
            )));
        }
        Ok(())
    }

    /// `P(U = V)` by integrating the diagonal jump, with the absolutely
    /// continuous mass computed independently.
    pub fn singular_mass(&self) -> Result<SingularDecomposition> {
        self.require_phi_zero()?;
        let jump = |u: f64| self.diagonal_jump(u).unwrap_or(f64::NAN);
        let q = adaptive_simpson(jump, OPEN_START, 1.0, MASS_TOL, 30);
        if !q.converged || !q.value.is_finite() {
            return Err(TfError::QuadratureNonconvergence { estimate: q.value, tolerance: MASS_TOL });
        }
        let ac_mass = self.ac_component(1.0, 1.0)?;
        let jump_profile = linspace(0.0, 1.0, 100)
            .into_iter()
            .map(|u| {
                let u = u.max(OPEN_START);
                (u, jump(u))
            })
            .collect();
        let closed = self.closed_form.mass();
        if let Some(c) = closed {
            if (c - q.value).abs() > CLOSED_FORM_TOL {
                return Err(TfError::CaseMismatch(format!(
                    "quadrature mass {} differs from closed form {} by more than {CLOSED_FORM_TOL}",
                    q.value, c
                )));
            }
        }
        Ok(SingularDecomposition {
            singular_mass: q.value,
            ac_mass,
            closed_form_mass: closed,
            quadrature_error: q.error_estimate,
            intervals: q.intervals,
            jump_profile,
            method: if closed.is_some() { DecompositionMethod::ClosedForm } else { DecompositionMethod::Quadrature },
        })
    }

    /// `A(u, v)`, the absolutely continuous part of the copula. The inner
    /// integral over `t` is exact: the conditional CDF increase on `[0, v]`
    /// minus the atom when it lies inside.
    pub fn ac_component(&self, u: f64, v: f64) -> Result<f64> {
        self.require_phi_zero()?;
        let (u, v) = (clamp01(u), clamp01(v));
        let inner = |s: f64| -> f64 {
            let run = || -> Result<f64> {
                let base = self.conditional_cdf_branch(s, 0.0, Branch::Lower)?;
                if s <= v {
                    Ok(self.conditional_cdf_branch(s, v, Branch::Upper)? - base - self.diagonal_jump(s)?)
                } else {
                    Ok(self.conditional_cdf_branch(s, v, Branch::Lower)? - base)
                }
            };
            run().unwrap_or(f64::NAN)
        };
        let m = u.min(v);
        let tol = 1e-10;
        let mut total = 0.0;
        let mut pieces = vec![];
        if m > OPEN_START {
            pieces.push((OPEN_START, m));
        }
        if u > m.max(OPEN_START) {
            pieces.push((m.max(OPEN_START), u));
        }
        for (a, b) in pieces {
            let q = adaptive_simpson(inner, a, b, tol, 40);
            if !q.converged || !q.value.is_finite() {
                return Err(TfError::QuadratureNonconvergence { estimate: q.value, tolerance: tol });
            }
            total += q.value;
        }
        Ok(total)
    }

    /// Singular part `S = C - A`.
    pub fn singular_component(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.eval(u, v) - self.ac_component(u, v)?)
    }

    /// Mixed density off the diagonal, by a central difference of the
    /// conditional CDF in `v`.
    pub fn mixed_density(&self, u: f64, v: f64) -> Result<f64> {
        if (u - v).abs() < DIAGONAL_BAND {
            return Err(TfError::PreconditionViolated(format!(
                "({u}, {v}) lies within {DIAGONAL_BAND} of the diagonal"
            )));
        }
        let branch = if v > u { Branch::Upper } else { Branch::Lower };
        let h = DENSITY_STEP;
        let (lo, hi) = ((v - h).max(0.0), (v + h).min(1.0));
        let f_hi = self.conditional_cdf_branch(u, hi, branch)?;
        let f_lo = self.conditional_cdf_branch(u, lo, branch)?;
        Ok((f_hi - f_lo) / (hi - lo))
    }

    /// Samples the diagonal jump at `n` interior points and, for
    /// Archimedean bases, the sufficient monotonicity criterion.
    pub fn singular_support_check(&self, n: usize) -> SingularSupportReport {
        let n = n.max(2);
        let us: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        let nums: Vec<f64> = us.iter().map(|&u| self.jump_numerator(u)).collect();
        let scale = nums.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let tol = positive_part_tol(scale);
        let points_in_s = nums.iter().filter(|&&x| x > tol).count();
        let min_numerator = nums.iter().copied().fold(f64::INFINITY, f64::min);
        let max_numerator = nums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let archimedean_criterion = self.base.archimedean_generator().map(|g| {
            let h: Vec<f64> =
                us.iter().map(|&u| g.value(self.pair.psi.value(u)) - g.value(self.pair.phi.value(u))).collect();
            h.windows(2).all(|w| w[1] > w[0])
        });
        let agrees = match archimedean_criterion {
            Some(true) => points_in_s == n,
            _ => true,
        };
        SingularSupportReport { points: n, points_in_s, min_numerator, max_numerator, archimedean_criterion, agrees }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den.is_infinite() {
        return 0.0;
    }
    if den == 0.0 {
        return 1.0;
    }
    clamp01(num / den)
}

impl Copula for TransformedCopula {
    fn eval(&self, u: f64, v: f64) -> f64 {
        TransformedCopula::eval(self, u, v)
    }

    fn partial_u(&self, u: f64, v: f64) -> f64 {
        self.conditional_cdf(u, v).unwrap_or(0.0)
    }

    /// By symmetry `dC/dv (u, v) = F(u | v)`; at ties the `u <= v` side
    /// is the lower branch of the conditional given `v`.
    fn partial_v(&self, u: f64, v: f64) -> f64 {
        let branch = if u > v { Branch::Upper } else { Branch::Lower };
        self.conditional_cdf_branch(v, u, branch).unwrap_or(0.0)
    }

    fn is_exchangeable(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        TransformedCopula::name(self)
    }
}

/// `lambda^[-1](lambda(u ^ v) + chi(u v v))`, built as the transform of the
/// product copula with `phi = exp(-lambda)` and `psi = exp(-chi)`.
#[derive(Debug, Clone)]
pub struct AdditiveProductCopula {
    pub lambda: AdditiveGenerator,
    pub chi: AdditiveGenerator,
    pub tf: TransformedCopula,
}

impl AdditiveProductCopula {
    /// Direct evaluation through the additive generators.
    pub fn eval_direct(&self, u: f64, v: f64) -> f64 {
        let (m, x) = (clamp01(u.min(v)), clamp01(u.max(v)));
        self.lambda.pseudo_inverse(self.lambda.value(m) + self.chi.value(x))
    }
}

impl Copula for AdditiveProductCopula {
    fn eval(&self, u: f64, v: f64) -> f64 {
        self.tf.eval(u, v)
    }

    fn partial_u(&self, u: f64, v: f64) -> f64 {
        Copula::partial_u(&self.tf, u, v)
    }

    fn partial_v(&self, u: f64, v: f64) -> f64 {
        Copula::partial_v(&self.tf, u, v)
    }

    fn is_exchangeable(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("additive-product[lambda={}, chi={}]", self.lambda.label(), self.chi.label())
    }
}

/// Builds the additive product copula. `lambda` must be strictly
/// decreasing, `chi` nonincreasing, both zero at 1, and `chi - lambda`
/// increasing. When `exp(-lambda)` is concave the theorem gate certifies
/// it; otherwise the direct gate is used.
pub fn additive_product_copula(
    lambda: AdditiveGenerator,
    chi: AdditiveGenerator,
    opts: &BuildOptions,
) -> Result<AdditiveProductCopula> {
    let n = opts.map_samples.max(2);
    let g = linspace(0.0, 1.0, n);
    if lambda.value(1.0).abs() > 1e-12 || chi.value(1.0).abs() > 1e-12 {
        return Err(TfError::PreconditionViolated("lambda(1) and chi(1) must be 0".into()));
    }
    let lam: Vec<f64> = g.iter().map(|&t| lambda.value(t)).collect();
    let ch: Vec<f64> = g.iter().map(|&t| chi.value(t)).collect();
    for i in 0..n {
        if !(lam[i + 1] < lam[i]) {
            return Err(TfError::PreconditionViolated(format!("lambda not strictly decreasing near t = {}", g[i])));
        }
        if ch[i + 1] > ch[i] {
            return Err(TfError::PreconditionViolated(format!("chi increases near t = {}", g[i])));
        }
        // skip the first step when lambda(0) is infinite
        if lam[i].is_finite() {
            let d = (ch[i + 1] - lam[i + 1]) - (ch[i] - lam[i]);
            if d < -GRID_TOL * (1.0 + lam[i].abs()) {
                return Err(TfError::PreconditionViolated(format!("chi - lambda decreases near t = {}", g[i])));
            }
        }
    }
    let phi = MonotoneMap::exp_neg(lambda.clone())?;
    let psi = MonotoneMap::exp_neg(chi.clone())?;
    let pair = GeneratorPair::new(phi, psi)?;
    let gate = if check_concave(&pair.phi, opts.map_samples).passed { Gate::Theorem } else { Gate::Direct };
    let tf = build(CopulaSpec::independence(), pair, gate, opts)?;
    Ok(AdditiveProductCopula { lambda, chi, tf })
}
