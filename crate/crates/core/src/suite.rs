//! The reproduction matrix: closed-form masses, rank-correlation table,
//! tail coefficients, validity gates, ordering checks and oracles.
//!
//! Each row records the measured and expected numbers it compared. Rows in
//! [`KNOWN_UNATTAINABLE`] are evaluated like any other and keep their verdict;
//! callers decide whether a known failure should affect their exit status.

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::copula::{
    check_boundary, check_frechet_bounds, check_two_increasing, sup_distance, Copula, Location, GRID_TOL,
};
use crate::dependence::{
    closed_tail_for, concordance_balance, concordance_balance_naive, concordance_compare, kendall_tau,
    lambda_fgm_affine_lower, lambda_numeric, phi_order_criterion, psi_order_criterion, spearman_rho, tp2_check, Side,
    DEFAULT_EPS,
};
use crate::sampling::sample;
use crate::transform::{build, BuildOptions, Gate, TransformedCopula};
use crate::{CopulaSpec, GeneratorPair, MonotoneMap, TfError};

pub const MASS_TOL: f64 = 1e-6;
pub const MC_MASS_TOL: f64 = 0.005;
pub const MC_MASS_N: usize = 200_000;
pub const RANK_TOL: f64 = 0.03;
pub const RANK_N: usize = 10_000;
pub const TAIL_TOL: f64 = 1e-3;
pub const GRID: usize = 200;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const SHORTCUT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Sample size and Monte-Carlo tolerances under `quick`.
pub const QUICK_N: usize = 2_000;
pub const QUICK_MASS_TOL: f64 = 0.035;
pub const QUICK_RANK_TOL: f64 = 0.08;

/// Rows that cannot hold as written, with the reason.
pub const KNOWN_UNATTAINABLE: &[(&str, &str)] = &[(
    "6-upper",
    "1 - t^(1/2) ~ (1 - t)/2 near 1, so the upper-tail exponent is 1, not 1/2; \
     t^(1/2) distortion maps Gumbel(3) to itself and lambda_U stays 2 - 2^(1/3)",
)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub quick: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: DEFAULT_SEED, quick: false }
    }
}

impl SuiteOptions {
    fn mass_n(&self) -> usize {
        if self.quick {
            QUICK_N
        } else {
            MC_MASS_N
        }
    }

    fn mass_tol(&self) -> f64 {
        if self.quick {
            QUICK_MASS_TOL
        } else {
            MC_MASS_TOL
        }
    }

    fn rank_n(&self) -> usize {
        if self.quick {
            QUICK_N
        } else {
            RANK_N
        }
    }

    fn rank_tol(&self) -> f64 {
        if self.quick {
            QUICK_RANK_TOL
        } else {
            RANK_TOL
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub criterion: String,
    pub label: String,
    pub passed: bool,
    /// Set when the row is listed in [`KNOWN_UNATTAINABLE`].
    pub known_issue: Option<String>,
    pub values: BTreeMap<String, f64>,
}

impl SuiteRow {
    /// Fails without being excused.
    pub fn unexpected_failure(&self) -> bool {
        !self.passed && self.known_issue.is_none()
    }

    pub fn verdict(&self) -> &'static str {
        match (self.passed, &self.known_issue) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL [known]",
            (false, None) => "FAIL",
        }
    }

    pub fn summary(&self) -> String {
        let vals: Vec<String> = self
            .values
            .iter()
            .map(|(k, v)| if *v != 0.0 && v.abs() < 1e-4 { format!("{k}={v:.2e}") } else { format!("{k}={v:.6}") })
            .collect();
        format!("{}: {}", self.label, vals.join(", "))
    }
}

struct Rows(Vec<SuiteRow>);

impl Rows {
    fn push(&mut self, criterion: &str, label: impl Into<String>, passed: bool, values: &[(&str, f64)]) {
        let known_issue = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == criterion).map(|(_, why)| why.to_string());
        self.0.push(SuiteRow {
            criterion: criterion.to_string(),
            label: label.into(),
            passed,
            known_issue,
            values: values.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        });
    }
}

/// Runs every criterion in order.
pub fn run(opts: &SuiteOptions) -> Vec<SuiteRow> {
    let mut r = Rows(vec![]);
    criterion_1(&mut r, opts);
    criterion_2(&mut r);
    criteria_3_4(&mut r, opts);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    criterion_10(&mut r, opts);
    r.0
}

fn tf(base: CopulaSpec, pair: GeneratorPair) -> TransformedCopula {
    build(base, pair, Gate::Theorem, &BuildOptions::default()).unwrap_or_else(|e| panic!("build failed: {e}"))
}

fn tf_fgm(theta: f64) -> TransformedCopula {
    tf(CopulaSpec::fgm(theta).unwrap(), GeneratorPair::powers(1.0, 0.5).unwrap())
}

fn tf_ca(alpha: f64, gamma: f64) -> TransformedCopula {
    let pair = GeneratorPair::new(MonotoneMap::power(alpha), MonotoneMap::ca(alpha, gamma).unwrap()).unwrap();
    tf(CopulaSpec::cuadras_auge(alpha).unwrap(), pair)
}

fn ca_mass(alpha: f64, gamma: f64) -> f64 {
    4.0 / (1.0 + alpha) - (1.0 - alpha - gamma) / (1.0 + alpha + gamma) - 2.0
}

pub fn archimedean_bases() -> Vec<(&'static str, CopulaSpec)> {
    vec![
        ("clayton", CopulaSpec::clayton(2.0).unwrap()),
        ("gumbel", CopulaSpec::gumbel(3.0).unwrap()),
        ("frank", CopulaSpec::frank(4.0).unwrap()),
    ]
}

/// Published `(tau, rho)` per base and preset.
pub fn reported(base: &str, case: &str) -> Option<(f64, f64)> {
    Some(match (base, case) {
        ("clayton", "a") => (0.6226, 0.7712),
        ("clayton", "b") => (0.5220, 0.6848),
        ("clayton", "c") => (0.3313, 0.4756),
        ("clayton", "d") => (0.5023, 0.6839),
        ("gumbel", "a") => (0.8734, 0.9608),
        ("gumbel", "b") => (0.8017, 0.9273),
        ("gumbel", "c") => (0.6677, 0.8499),
        ("gumbel", "d") => (0.6575, 0.8399),
        ("frank", "a") => (0.5768, 0.7359),
        ("frank", "b") => (0.4828, 0.6469),
        ("frank", "c") => (0.3297, 0.4787),
        ("frank", "d") => (0.3859, 0.5548),
        _ => return None,
    })
}

fn criterion_1(r: &mut Rows, opts: &SuiteOptions) {
    let n = opts.mass_n();
    for &theta in &[0.0, 0.5, 1.0] {
        let c = tf_fgm(theta);
        let want = (5.0 + theta) / 15.0;
        let got = c.singular_mass().map(|d| d.singular_mass).unwrap_or(f64::NAN);
        let frac = sample(&c, n, opts.seed).unwrap().diagonal_fraction();
        r.push(
            "1",
            format!("tf-fgm theta={theta}, n={n}"),
            (got - want).abs() <= MASS_TOL && (frac - want).abs() <= opts.mass_tol(),
            &[("quadrature", got), ("closed_form", want), ("diagonal_fraction", frac)],
        );
    }
}

fn criterion_2(r: &mut Rows) {
    for &alpha in &[0.25, 0.5, 0.75] {
        for gamma in [0.0, alpha / 2.0, alpha] {
            let want = ca_mass(alpha, gamma);
            let got = tf_ca(alpha, gamma).singular_mass().map(|d| d.singular_mass).unwrap_or(f64::NAN);
            let diff = want - (1.0 - alpha) / (1.0 + alpha);
            let excess = 2.0 * gamma / ((1.0 + alpha) * (1.0 + alpha + gamma));
            let mut pass = (got - want).abs() <= MASS_TOL && excess >= 0.0 && (diff - excess).abs() <= 1e-12;
            if gamma == 0.0 {
                pass &= diff.abs() <= 1e-15;
            }
            r.push(
                "2",
                format!("tf-ca alpha={alpha} gamma={gamma}"),
                pass,
                &[("quadrature", got), ("closed_form", want), ("excess_over_base", excess)],
            );
        }
    }
}

fn criteria_3_4(r: &mut Rows, opts: &SuiteOptions) {
    let (n, tol) = (opts.rank_n(), opts.rank_tol());
    for (name, base) in archimedean_bases() {
        let mut taus = vec![];
        for case in ["a", "b", "c", "d"] {
            let c = tf(base.clone(), GeneratorPair::preset(case).unwrap());
            let batch = sample(&c, n, opts.seed).unwrap();
            let tau = kendall_tau(&batch).unwrap();
            let rho = spearman_rho(&batch).unwrap();
            let (t_ref, r_ref) = reported(name, case).unwrap();
            r.push(
                "3",
                format!("{name} ({case}), n={n}"),
                (tau - t_ref).abs() <= tol && (rho - r_ref).abs() <= tol,
                &[("tau", tau), ("tau_reported", t_ref), ("rho", rho), ("rho_reported", r_ref)],
            );
            taus.push(tau);
        }
        r.push(
            "4",
            format!("{name}: tau (a),(b) above (c),(d)"),
            taus[0].min(taus[1]) > taus[2].max(taus[3]),
            &[("tau_a", taus[0]), ("tau_b", taus[1]), ("tau_c", taus[2]), ("tau_d", taus[3])],
        );
    }
}

fn criterion_5(r: &mut Rows) {
    for &theta in &[0.0, 1.0] {
        for &(beta, gamma) in &[(1.0, 0.5), (0.8, 0.4), (0.5, 0.25)] {
            let fgm = CopulaSpec::fgm(theta).unwrap();
            let pa = GeneratorPair::new(MonotoneMap::power(beta), MonotoneMap::ca(beta, gamma).unwrap()).unwrap();
            let la = lambda_numeric(&tf(fgm.clone(), pa), Side::Upper, &DEFAULT_EPS).unwrap().value;
            let want = gamma / beta;
            r.push(
                "5",
                format!("tf-fgm theta={theta}, psi=ca, beta={beta} gamma={gamma}"),
                (la - want).abs() <= TAIL_TOL,
                &[("lambda_u", la), ("closed_form", want)],
            );
            let lb = lambda_numeric(&tf(fgm, GeneratorPair::powers(beta, gamma).unwrap()), Side::Upper, &DEFAULT_EPS)
                .unwrap()
                .value;
            let want = 1.0 - gamma / beta;
            r.push(
                "5",
                format!("tf-fgm theta={theta}, psi=power, beta={beta} gamma={gamma}"),
                (lb - want).abs() <= TAIL_TOL,
                &[("lambda_u", lb), ("closed_form", want)],
            );
        }
    }
    for &(a0, theta) in &[(0.5, 0.0), (0.5, 1.0), (0.25, 0.5)] {
        let pair = GeneratorPair::new(MonotoneMap::identity(), MonotoneMap::affine(a0).unwrap()).unwrap();
        let l = lambda_numeric(&tf(CopulaSpec::fgm(theta).unwrap(), pair), Side::Lower, &DEFAULT_EPS).unwrap().value;
        let want = lambda_fgm_affine_lower(a0, theta);
        r.push(
            "5",
            format!("fgm theta={theta}, phi=t, psi=affine a0={a0}"),
            (l - want).abs() <= TAIL_TOL,
            &[("lambda_l", l), ("closed_form", want)],
        );
    }
}

fn criterion_6(r: &mut Rows) {
    let gumbel = tf(CopulaSpec::gumbel(3.0).unwrap(), GeneratorPair::powers(0.5, 0.5).unwrap());
    let lu = lambda_numeric(&gumbel, Side::Upper, &DEFAULT_EPS).unwrap().value;
    let stated = 2.0 - 2f64.powf(1.0 / 3.0).powi(2);
    r.push(
        "6-upper",
        "gumbel(3), phi=psi=t^1/2, against 2 - 2^(2/3)",
        (lu - stated).abs() <= TAIL_TOL,
        &[("lambda_u", lu), ("stated", stated)],
    );
    let derived = 2.0 - 2f64.powf(1.0 / 3.0);
    let closed = closed_tail_for(gumbel.base(), gumbel.pair(), Side::Upper).unwrap_or(f64::NAN);
    r.push(
        "6-derived",
        "gumbel(3), phi=psi=t^1/2, against 2 - 2^(1/3)",
        (lu - derived).abs() <= TAIL_TOL && (closed - derived).abs() <= 1e-9,
        &[("lambda_u", lu), ("derived", derived), ("closed_form", closed)],
    );
    let clayton = tf(CopulaSpec::clayton(2.0).unwrap(), GeneratorPair::powers(0.5, 0.5).unwrap());
    let ll = lambda_numeric(&clayton, Side::Lower, &DEFAULT_EPS).unwrap().value;
    let closed = closed_tail_for(clayton.base(), clayton.pair(), Side::Lower).unwrap_or(f64::NAN);
    r.push(
        "6-lower",
        "clayton(2), phi=psi=t^1/2",
        (ll - 0.5).abs() <= TAIL_TOL && (closed - 0.5).abs() <= 1e-9,
        &[("lambda_l", ll), ("expected", 0.5), ("closed_form", closed)],
    );
}

fn criterion_7(r: &mut Rows) {
    let mut certified: Vec<(String, TransformedCopula)> = vec![];
    for (name, base) in archimedean_bases() {
        for case in ["a", "b", "c", "d"] {
            certified.push((format!("{name} ({case})"), tf(base.clone(), GeneratorPair::preset(case).unwrap())));
        }
    }
    for &theta in &[0.0, 0.5, 1.0] {
        certified.push((format!("tf-fgm theta={theta}"), tf_fgm(theta)));
    }
    for &(a, g) in &[(0.5, 0.25), (0.75, 0.75)] {
        certified.push((format!("tf-ca alpha={a} gamma={g}"), tf_ca(a, g)));
    }
    certified
        .push(("product (t, t^1/2)".into(), tf(CopulaSpec::independence(), GeneratorPair::powers(1.0, 0.5).unwrap())));
    for (name, c) in &certified {
        let b = check_boundary(c, GRID);
        let f = check_frechet_bounds(c, GRID);
        let t = check_two_increasing(c, GRID, GRID_TOL);
        r.push(
            "7",
            format!("{name}: grid checks"),
            b.passed && f.passed && t.passed,
            &[("boundary", b.worst_violation), ("frechet", f.worst_violation), ("volume", t.worst_violation)],
        );
    }
    let bad = GeneratorPair::powers(1.0, 2.0).unwrap();
    let rejected = matches!(
        build(CopulaSpec::independence(), bad.clone(), Gate::Theorem, &BuildOptions::default()),
        Err(TfError::ValidationFailed { .. })
    );
    let vol = check_two_increasing(&TransformedCopula::candidate(CopulaSpec::independence(), bad), GRID, GRID_TOL);
    r.push(
        "7",
        "product (t, t^2): rejected with a negative volume",
        rejected && vol.worst_violation < 0.0,
        &with_rectangle(&[("rejected", rejected as u8 as f64), ("volume", vol.worst_violation)], vol.worst_location),
    );
}

fn with_rectangle<'a>(vals: &[(&'a str, f64)], at: Location) -> Vec<(&'a str, f64)> {
    let mut out = vals.to_vec();
    if let Location::Rectangle { u1, u2, v1, v2 } = at {
        out.extend([("u1", u1), ("u2", u2), ("v1", v1), ("v2", v2)]);
    }
    out
}

fn criterion_8(r: &mut Rows) {
    for &theta in &[0.0, 1.0] {
        let t = tp2_check(&tf_fgm(theta), 100);
        r.push("8", format!("tf-fgm theta={theta}: tp2"), t.passed, &[("worst_gap", t.worst_violation)]);
    }
    for &g in &[0.25, 0.5] {
        let t = tp2_check(&tf_ca(0.5, g), 100);
        r.push("8", format!("tf-ca alpha=0.5 gamma={g}: tp2"), t.passed, &[("worst_gap", t.worst_violation)]);
    }
    let t = tp2_check(&CopulaSpec::lower(), 100);
    r.push("8", "W: tp2 fails", !t.passed, &with_rectangle(&[("worst_gap", t.worst_violation)], t.worst_location));
}

fn criterion_9(r: &mut Rows) {
    let b = |x: bool| x as u8 as f64;
    let pair = GeneratorPair::powers(0.8, 0.5).unwrap();
    let (lo, hi) = (CopulaSpec::fgm(0.2).unwrap(), CopulaSpec::fgm(0.8).unwrap());
    let base_order = concordance_compare(&lo, &hi, GRID);
    let tf_order = concordance_compare(&tf(lo, pair.clone()), &tf(hi, pair), GRID);
    r.push(
        "9",
        "fgm 0.2 < 0.8, base and under (t^0.8, t^0.5)",
        base_order.passed && tf_order.passed,
        &[("base_margin", base_order.worst_violation), ("transformed_margin", tf_order.worst_violation)],
    );
    let pi = CopulaSpec::independence();
    let p06 = tf(pi.clone(), GeneratorPair::powers(1.0, 0.6).unwrap());
    let p04 = tf(pi.clone(), GeneratorPair::powers(1.0, 0.4).unwrap());
    let fwd = (concordance_compare(&p06, &p04, GRID).passed, psi_order_criterion(p06.psi(), p04.psi(), GRID).passed);
    let rev = (concordance_compare(&p04, &p06, GRID).passed, psi_order_criterion(p04.psi(), p06.psi(), GRID).passed);
    r.push(
        "9",
        "psi order t^0.6 vs t^0.4, both directions",
        fwd == (true, true) && rev == (false, false),
        &[("fwd_order", b(fwd.0)), ("fwd_criterion", b(fwd.1)), ("rev_order", b(rev.0)), ("rev_criterion", b(rev.1))],
    );
    let (s05, id) = (MonotoneMap::power(0.5), MonotoneMap::identity());
    let c1 = tf(pi.clone(), GeneratorPair::new(s05.clone(), MonotoneMap::power(0.5)).unwrap());
    let c2 = tf(pi.clone(), GeneratorPair::new(id.clone(), MonotoneMap::power(0.5)).unwrap());
    let fwd = (concordance_compare(&c1, &c2, GRID).passed, phi_order_criterion(&pi, &s05, &id, GRID).passed);
    let rev = (concordance_compare(&c2, &c1, GRID).passed, phi_order_criterion(&pi, &id, &s05, GRID).passed);
    r.push(
        "9",
        "phi order t^0.5 vs t with psi=t^0.5, both directions",
        fwd.0 == fwd.1 && rev.0 == rev.1,
        &[("fwd_order", b(fwd.0)), ("fwd_criterion", b(fwd.1)), ("rev_order", b(rev.0)), ("rev_criterion", b(rev.1))],
    );
}

fn criterion_10(r: &mut Rows, opts: &SuiteOptions) {
    let bases = [
        CopulaSpec::independence(),
        CopulaSpec::fgm(1.0).unwrap(),
        CopulaSpec::clayton(2.0).unwrap(),
        CopulaSpec::gumbel(3.0).unwrap(),
        CopulaSpec::frank(4.0).unwrap(),
        CopulaSpec::cuadras_auge(0.5).unwrap(),
    ];
    for b in &bases {
        let d = sup_distance(&tf(b.clone(), GeneratorPair::identity()), b, GRID);
        r.push(
            "10",
            format!("identity pair over {}", b.name()),
            d.worst_violation <= IDENTITY_TOL,
            &[("sup", d.worst_violation)],
        );
    }
    let mut worst = 0.0f64;
    for (_, base) in archimedean_bases() {
        for case in ["a", "b", "c", "d"] {
            let c = tf(base.clone(), GeneratorPair::preset(case).unwrap());
            for i in 0..=GRID {
                for j in 0..=GRID {
                    let (u, v) = (i as f64 / GRID as f64, j as f64 / GRID as f64);
                    worst = worst.max((c.eval_archimedean_shortcut(u, v).unwrap() - c.eval(u, v)).abs());
                }
            }
        }
    }
    r.push("10", "archimedean shortcut vs direct, 12 configs", worst <= SHORTCUT_TOL, &[("max_gap", worst)]);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut equal = 0usize;
    for k in 0..50 {
        let n = 2 + (unit() * 1999.0) as usize;
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let (a, b) = (unit(), unit());
                // even samples are coarsened to force heavy ties
                if k % 2 == 0 {
                    ((a * 20.0).floor(), (0.5 * a + 0.5 * b * 20.0).floor())
                } else {
                    (a, 0.6 * a + 0.4 * b)
                }
            })
            .collect();
        equal += (concordance_balance(&pairs) == concordance_balance_naive(&pairs)) as usize;
    }
    r.push(
        "10",
        "merge-count vs pairwise tau balance, 50 samples",
        equal == 50,
        &[("identical", equal as f64), ("samples", 50.0)],
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_rows_are_flagged_and_excused() {
        let mut r = Rows(vec![]);
        r.push("6-upper", "x", false, &[]);
        r.push("1", "y", false, &[("a", 1.0)]);
        assert!(!r.0[0].unexpected_failure());
        assert_eq!(r.0[0].verdict(), "FAIL [known]");
        assert!(r.0[1].unexpected_failure());
        assert_eq!(r.0[1].summary(), "y: a=1.000000");
    }

    #[test]
    fn every_preset_has_a_reported_value() {
        for (name, _) in archimedean_bases() {
            for case in ["a", "b", "c", "d"] {
                assert!(reported(name, case).is_some());
            }
        }
        assert!(reported("frank", "e").is_none());
    }
}
