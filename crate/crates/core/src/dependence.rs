//! Tail dependence (numeric limits and closed forms), rank correlations,
//! the TP2 check and the concordance order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::base::{CopulaSpec, Family};
use crate::copula::{grid_values, Copula, GridCheckReport, Location, Worst};
use crate::error::{Result, TfError};
use crate::generators::{GeneratorPair, MapKind, MonotoneMap};
use crate::numeric::linspace;
use crate::sampling::SampleBatch;

/// Default step sequence for the numeric tail limits.
pub const DEFAULT_EPS: [f64; 6] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
/// Successive extrapolated estimates further apart than this are flagged.
pub const TAIL_CONVERGENCE: f64 = 1e-3;
/// Tolerance on the difference of products in the TP2 check.
pub const TP2_TOL: f64 = 1e-12;
/// Slack allowed in the concordance comparison.
pub const CONCORDANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Upper,
    Lower,
}

/// Difference quotients along an `eps` sequence and their extrapolation.
#[derive(Debug, Clone, Serialize)]
pub struct TailEstimate {
    pub side: Side,
    pub value: f64,
    pub quotients: Vec<f64>,
    pub extrapolated: Vec<f64>,
    pub converged: bool,
}

/// `2 - (1 - C(u,u)) / (1 - u)` at `u = 1 - eps`, or `C(u,u) / u` at
/// `u = eps`, Richardson-extrapolated assuming an error linear in `eps`.
pub fn lambda_numeric<C: Copula + ?Sized>(c: &C, side: Side, eps: &[f64]) -> Result<TailEstimate> {
    if eps.len() < 2 || eps.iter().any(|&e| !(e > 0.0 && e <= 0.1)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(TfError::InvalidArgument("eps must be decreasing, in (0, 0.1], with at least two entries".into()));
    }
    let quotients: Vec<f64> = eps
        .iter()
        .map(|&e| match side {
            Side::Upper => {
                let u = 1.0 - e;
                2.0 - (1.0 - c.eval(u, u)) / (1.0 - u)
            }
            Side::Lower => c.eval(e, e) / e,
        })
        .collect();
    let extrapolated: Vec<f64> = (1..eps.len())
        .map(|i| {
            let r = eps[i - 1] / eps[i];
            (r * quotients[i] - quotients[i - 1]) / (r - 1.0)
        })
        .collect();
    let k = extrapolated.len();
    let value = extrapolated[k - 1];
    let converged = k < 2 || (extrapolated[k - 1] - extrapolated[k - 2]).abs() <= TAIL_CONVERGENCE;
    Ok(TailEstimate { side, value, quotients, extrapolated, converged })
}

/// Both tail coefficients, numeric and (when known) closed form.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub lambda_u_numeric: f64,
    pub lambda_l_numeric: f64,
    pub lambda_u_closed: Option<f64>,
    pub lambda_l_closed: Option<f64>,
    pub eps_sequence: Vec<f64>,
    pub upper_quotients: Vec<f64>,
    pub lower_quotients: Vec<f64>,
    pub extrapolation_note: String,
}

pub fn tail_report<C: Copula + ?Sized>(c: &C, eps: &[f64]) -> Result<TailReport> {
    let up = lambda_numeric(c, Side::Upper, eps)?;
    let lo = lambda_numeric(c, Side::Lower, eps)?;
    let mut note = String::from("one Richardson step on successive eps, error assumed linear in eps");
    if !up.converged {
        note.push_str("; upper estimate not settled");
    }
    if !lo.converged {
        note.push_str("; lower estimate not settled");
    }
    Ok(TailReport {
        lambda_u_numeric: up.value,
        lambda_l_numeric: lo.value,
        lambda_u_closed: None,
        lambda_l_closed: None,
        eps_sequence: eps.to_vec(),
        upper_quotients: up.quotients,
        lower_quotients: lo.quotients,
        extrapolation_note: note,
    })
}

/// Known tail coefficients `(lambda_U, lambda_L)` of the base families.
pub fn base_tail_coefficients(c: &CopulaSpec) -> Option<(f64, f64)> {
    Some(match *c.family() {
        Family::Independence | Family::FrechetLower | Family::Fgm { .. } | Family::Frank { .. } => (0.0, 0.0),
        Family::FrechetUpper => (1.0, 1.0),
        Family::Clayton { alpha } => (0.0, 2f64.powf(-1.0 / alpha)),
        Family::Gumbel { beta } => (2.0 - 2f64.powf(1.0 / beta), 0.0),
        Family::CuadrasAuge { alpha } => (1.0 - alpha, if alpha == 0.0 { 1.0 } else { 0.0 }),
        _ => return None,
    })
}

/// Which hypothesis set of the tail result applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailCase {
    /// upper side, `b = 1`
    UpperB1,
    /// upper side, base `lambda_U = 0`, `b` in `[0, 1]`
    UpperLamU0,
    /// lower side, `b = 1`
    LowerB1,
    /// lower side, base `lambda_L = 0`, `b` in `(0, 1]`
    LowerLamL0,
}

/// Endpoint behaviour of a generator pair: `1 - phi ~ a (1 - t)^alpha`
/// with `b = lim (1 - psi) / (1 - phi)` at 1, or `phi ~ a t^alpha` with
/// `b = lim phi / psi` at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCaseInputs {
    pub alpha_exp: f64,
    pub a: f64,
    pub b: f64,
    pub case_tag: Option<TailCase>,
    /// the local slope moved by more than 1e-3 across the fitted points
    pub slope_unstable: bool,
}

impl TailCaseInputs {
    pub fn new(alpha_exp: f64, a: f64, b: f64, case_tag: Option<TailCase>) -> Result<Self> {
        if !(alpha_exp > 0.0) {
            return Err(TfError::InvalidArgument(format!("tail exponent {alpha_exp} must be > 0")));
        }
        let ok = match case_tag {
            Some(TailCase::UpperLamU0) => (0.0..=1.0).contains(&b),
            Some(TailCase::LowerLamL0) => b > 0.0 && b <= 1.0,
            _ => true,
        };
        if !ok {
            return Err(TfError::CaseMismatch(format!("b = {b} outside the range required by {case_tag:?}")));
        }
        Ok(TailCaseInputs { alpha_exp, a, b, case_tag, slope_unstable: false })
    }
}

fn extrapolate_last(eps: &[f64], q: &[f64]) -> f64 {
    let k = q.len();
    let r = eps[k - 2] / eps[k - 1];
    (r * q[k - 1] - q[k - 2]) / (r - 1.0)
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Estimates the tail exponent, scale and ratio of a pair near one end.
/// The exponent is the log-log slope over the last three `eps` points,
/// rounded to 1e-6 when it lands that close to a multiple of 1e-3.
pub fn estimate_tail_inputs(pair: &GeneratorPair, side: Side) -> TailCaseInputs {
    let eps = &DEFAULT_EPS;
    let (num, ratio): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .map(|&e| match side {
            Side::Upper => {
                let t = 1.0 - e;
                let d = 1.0 - pair.phi.value(t);
                (d, (1.0 - pair.psi.value(t)) / d)
            }
            Side::Lower => {
                let p = pair.phi.value(e);
                (p, p / pair.psi.value(e))
            }
        })
        .unzip();
    let k = eps.len();
    let tail = k - 3..k;
    let mut alpha = loglog_slope(&eps[tail.clone()], &num[tail.clone()]);
    let early = loglog_slope(&eps[k - 4..k - 1], &num[k - 4..k - 1]);
    let slope_unstable = (alpha - early).abs() > 1e-3;
    let snapped = (alpha * 1000.0).round() / 1000.0;
    if (alpha - snapped).abs() < 1e-6 {
        alpha = snapped;
    }
    let scaled: Vec<f64> = eps.iter().zip(&num).map(|(e, d)| d / e.powf(alpha)).collect();
    let a = extrapolate_last(eps, &scaled);
    let mut b = extrapolate_last(eps, &ratio).clamp(0.0, f64::MAX);
    if (b - b.round()).abs() < 1e-6 {
        b = b.round();
    }
    TailCaseInputs { alpha_exp: alpha, a, b, case_tag: None, slope_unstable }
}

/// Picks the applicable case from estimated inputs and the base
/// coefficient on that side. `None` when no case applies.
pub fn detect_tail_case(inputs: &TailCaseInputs, side: Side, base_lambda: f64) -> Option<TailCase> {
    let b1 = (inputs.b - 1.0).abs() < 1e-6;
    let zero = base_lambda.abs() < 1e-12;
    match side {
        Side::Upper if b1 => Some(TailCase::UpperB1),
        Side::Upper if zero && (0.0..=1.0).contains(&inputs.b) => Some(TailCase::UpperLamU0),
        Side::Lower if b1 => Some(TailCase::LowerB1),
        Side::Lower if zero && inputs.b > 1e-9 && inputs.b <= 1.0 => Some(TailCase::LowerLamL0),
        _ => None,
    }
}

/// Closed-form tail coefficient of the transform for the tagged case.
pub fn lambda_transformed_closed(base_lambda: f64, inputs: &TailCaseInputs) -> Result<f64> {
    let inv = 1.0 / inputs.alpha_exp;
    match inputs.case_tag {
        Some(TailCase::UpperB1) => Ok(2.0 - (2.0 - base_lambda).powf(inv)),
        Some(TailCase::UpperLamU0) => {
            if base_lambda.abs() > 1e-12 {
                return Err(TfError::CaseMismatch(format!("base lambda_U = {base_lambda}, expected 0")));
            }
            if !(0.0..=1.0).contains(&inputs.b) {
                return Err(TfError::CaseMismatch(format!("b = {} outside [0, 1]", inputs.b)));
            }
            Ok(2.0 - (1.0 + inputs.b).powf(inv))
        }
        Some(TailCase::LowerB1) => Ok(base_lambda.powf(inv)),
        Some(TailCase::LowerLamL0) => {
            if base_lambda.abs() > 1e-12 {
                return Err(TfError::CaseMismatch(format!("base lambda_L = {base_lambda}, expected 0")));
            }
            if !(inputs.b > 0.0 && inputs.b <= 1.0) {
                return Err(TfError::CaseMismatch(format!("b = {} outside (0, 1]", inputs.b)));
            }
            Ok(0.0)
        }
        None => Err(TfError::CaseMismatch("no tail case selected".into())),
    }
}

/// Lower tail of the FGM transform with `phi = t`, `psi = (1 - a) t + a`.
pub fn lambda_fgm_affine_lower(alpha0: f64, theta: f64) -> f64 {
    alpha0 * (1.0 + (1.0 - alpha0) * theta)
}

/// Whether a transform is the FGM instance covered by
/// [`lambda_fgm_affine_lower`]; returns `(alpha0, theta)`.
pub fn fgm_affine_instance(base: &CopulaSpec, pair: &GeneratorPair) -> Option<(f64, f64)> {
    match (base.family(), pair.phi.kind(), pair.psi.kind()) {
        (Family::Fgm { theta }, MapKind::Power { beta }, MapKind::Affine { alpha }) if *beta == 1.0 && *alpha > 0.0 => {
            Some((*alpha, *theta))
        }
        _ => None,
    }
}

/// Tail coefficients of the additive product copula: upper
/// `2 - (1 + b)^(1/alpha)`, lower 0.
pub fn lambda_additive_closed(side: Side, alpha_exp: f64, b: f64) -> Result<f64> {
    if !(alpha_exp > 0.0) {
        return Err(TfError::InvalidArgument(format!("tail exponent {alpha_exp} must be > 0")));
    }
    match side {
        Side::Upper if (0.0..=1.0).contains(&b) => Ok(2.0 - (1.0 + b).powf(1.0 / alpha_exp)),
        Side::Upper => Err(TfError::CaseMismatch(format!("b = {b} outside [0, 1]"))),
        Side::Lower if b <= 0.0 => Ok(0.0),
        Side::Lower => Err(TfError::CaseMismatch(format!("lim (chi - lambda) = {b} must be <= 0"))),
    }
}

/// Closed-form tail coefficient of a transform on one side, if a case
/// applies. Lower-side `b = 0` is only handled for the FGM instance.
pub fn closed_tail_for(base: &CopulaSpec, pair: &GeneratorPair, side: Side) -> Result<f64> {
    if side == Side::Lower {
        if let Some((a0, theta)) = fgm_affine_instance(base, pair) {
            return Ok(lambda_fgm_affine_lower(a0, theta));
        }
    }
    let (bu, bl) = base_tail_coefficients(base)
        .ok_or_else(|| TfError::UnsupportedCase(format!("no known tail coefficients for {}", base.name())))?;
    let base_lambda = if side == Side::Upper { bu } else { bl };
    let mut inputs = estimate_tail_inputs(pair, side);
    inputs.case_tag = detect_tail_case(&inputs, side, base_lambda);
    if inputs.case_tag.is_none() {
        return Err(TfError::UnsupportedCase(format!(
            "{side:?} tail with b = {} and base coefficient {base_lambda}",
            inputs.b
        )));
    }
    lambda_transformed_closed(base_lambda, &inputs)
}

fn check_sample(batch: &SampleBatch) -> Result<()> {
    if batch.n < 2 {
        return Err(TfError::Degenerate(format!("need at least 2 draws, got {}", batch.n)));
    }
    let first = batch.pairs[0];
    if batch.pairs.iter().all(|p| p.0 == first.0) || batch.pairs.iter().all(|p| p.1 == first.1) {
        return Err(TfError::Degenerate("a margin is constant".into()));
    }
    Ok(())
}

/// Counts `concordant - discordant` pairs with Knight's merge-sort method.
pub fn concordance_balance(pairs: &[(f64, f64)]) -> i64 {
    let n = pairs.len();
    if n < 2 {
        return 0;
    }
    let mut p = pairs.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let pairs_of = |k: i64| k * (k - 1) / 2;

    let (mut n1, mut n3) = (0i64, 0i64);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && p[j].0 == p[i].0 {
            j += 1;
        }
        n1 += pairs_of((j - i) as i64);
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && p[l].1 == p[k].1 {
                l += 1;
            }
            n3 += pairs_of((l - k) as i64);
            k = l;
        }
        i = j;
    }

    let mut v: Vec<f64> = p.iter().map(|x| x.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut v, &mut buf);

    let mut n2 = 0i64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && v[j] == v[i] {
            j += 1;
        }
        n2 += pairs_of((j - i) as i64);
        i = j;
    }
    pairs_of(n as i64) - n1 - n2 + n3 - 2 * swaps
}

/// Sorts `v` and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut s = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            s += (mid - i) as i64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    s
}

/// The same balance by direct enumeration of all pairs.
pub fn concordance_balance_naive(pairs: &[(f64, f64)]) -> i64 {
    let mut s = 0i64;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let a = sign(pairs[i].0 - pairs[j].0);
            let b = sign(pairs[i].1 - pairs[j].1);
            s += a * b;
        }
    }
    s
}

fn sign(x: f64) -> i64 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Kendall's tau-a: ties contribute zero.
pub fn kendall_tau(batch: &SampleBatch) -> Result<f64> {
    check_sample(batch)?;
    let n = batch.n as f64;
    Ok(concordance_balance(&batch.pairs) as f64 / (n * (n - 1.0) / 2.0))
}

pub fn kendall_tau_naive(batch: &SampleBatch) -> Result<f64> {
    check_sample(batch)?;
    let n = batch.n as f64;
    Ok(concordance_balance_naive(&batch.pairs) as f64 / (n * (n - 1.0) / 2.0))
}

/// Ranks starting at 1, with ties sharing their mean rank.
pub fn midranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && xs[idx[j]] == xs[idx[i]] {
            j += 1;
        }
        let mean = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            r[k] = mean;
        }
        i = j;
    }
    r
}

/// Spearman's rho: Pearson correlation of the midranks.
pub fn spearman_rho(batch: &SampleBatch) -> Result<f64> {
    check_sample(batch)?;
    let ru = midranks(&batch.us());
    let rv = midranks(&batch.vs());
    let n = ru.len() as f64;
    let mu = ru.iter().sum::<f64>() / n;
    let mv = rv.iter().sum::<f64>() / n;
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in ru.iter().zip(&rv) {
        suv += (a - mu) * (b - mv);
        suu += (a - mu) * (a - mu);
        svv += (b - mv) * (b - mv);
    }
    Ok(suv / (suu * svv).sqrt())
}

/// A statistic with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub batches: usize,
}

/// Number of contiguous batches for Monte-Carlo standard errors.
pub const SE_BATCHES: usize = 20;

/// Full-sample statistic plus the spread of the statistic over
/// `SE_BATCHES` contiguous batches.
pub fn with_batch_se(batch: &SampleBatch, stat: impl Fn(&SampleBatch) -> Result<f64>) -> Result<Estimate> {
    let value = stat(batch)?;
    let k = SE_BATCHES;
    let size = batch.n / k;
    if size < 2 {
        return Ok(Estimate { value, std_error: f64::NAN, batches: 0 });
    }
    let vals: Vec<f64> = (0..k).map(|i| stat(&batch.slice(i * size, (i + 1) * size))).collect::<Result<_>>()?;
    let mean = vals.iter().sum::<f64>() / k as f64;
    let var = vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k as f64 - 1.0);
    Ok(Estimate { value, std_error: (var / k as f64).sqrt(), batches: k })
}

/// Minimum rectangles drawn when the grid is too large to enumerate.
pub const TP2_RANDOM_RECTANGLES: usize = 1_000_000;

/// `A(u1,v1) A(u2,v2) - A(u1,v2) A(u2,v1) >= -1e-12` for ordered
/// rectangles of the `(n+1) x (n+1)` grid; all of them for `n <= 100`, a
/// seeded random subset of 10^6 otherwise.
pub fn tp2_check<C: Copula + ?Sized>(c: &C, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let (g, vals) = grid_values(c, n);
    let margin = |i1: usize, i2: usize, j1: usize, j2: usize| vals[i1][j1] * vals[i2][j2] - vals[i1][j2] * vals[i2][j1];
    let at =
        |i1: usize, i2: usize, j1: usize, j2: usize| Location::Rectangle { u1: g[i1], u2: g[i2], v1: g[j1], v2: g[j2] };
    let worst = if n <= 100 {
        (0..=n)
            .into_par_iter()
            .map(|i1| {
                let mut w = Worst::min_identity();
                for i2 in i1 + 1..=n {
                    for j1 in 0..=n {
                        for j2 in j1 + 1..=n {
                            let m = margin(i1, i2, j1, j2);
                            if m < w.value || m.is_nan() {
                                w = w.take_min(Worst { value: m, at: at(i1, i2, j1, j2) });
                            }
                        }
                    }
                }
                w
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Worst::min_identity(), Worst::take_min)
    } else {
        let chunks = 64;
        let per = TP2_RANDOM_RECTANGLES.div_ceil(chunks);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(0x7470_3200 + c as u64);
                let mut pick = || (rng.next_u64() % (n as u64 + 1)) as usize;
                let mut w = Worst::min_identity();
                let mut done = 0;
                while done < per {
                    let (a, b, x, y) = (pick(), pick(), pick(), pick());
                    if a == b || x == y {
                        continue;
                    }
                    let (i1, i2) = (a.min(b), a.max(b));
                    let (j1, j2) = (x.min(y), x.max(y));
                    let m = margin(i1, i2, j1, j2);
                    if m < w.value || m.is_nan() {
                        w = w.take_min(Worst { value: m, at: at(i1, i2, j1, j2) });
                    }
                    done += 1;
                }
                w
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Worst::min_identity(), Worst::take_min)
    };
    GridCheckReport::margin("tp2", n, worst.value, worst.at, TP2_TOL)
}

/// `C <= D` pointwise on the grid, up to 1e-12.
pub fn concordance_compare<C: Copula + ?Sized, D: Copula + ?Sized>(c: &C, d: &D, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let g = linspace(0.0, 1.0, n);
    let worst = g
        .par_iter()
        .map(|&u| {
            let mut w = Worst::min_identity();
            for &v in &g {
                w = w.take_min(Worst { value: d.eval(u, v) - c.eval(u, v), at: Location::Point { u, v } });
            }
            w
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Worst::min_identity(), Worst::take_min);
    GridCheckReport::margin("concordance", n, worst.value, worst.at, CONCORDANCE_TOL)
}

/// `C(f(s), t) <= f(C(s, t))` for `0 <= s <= t <= 1` with
/// `f = phi1 o phi2^[-1]`: the criterion for the transform with `phi1` to
/// lie below the one with `phi2` when `psi` is shared.
pub fn phi_order_criterion<C: Copula + ?Sized>(
    base: &C,
    phi1: &MonotoneMap,
    phi2: &MonotoneMap,
    n: usize,
) -> GridCheckReport {
    let n = n.max(2);
    let g = linspace(0.0, 1.0, n);
    let f = |x: f64| phi1.value(phi2.pseudo_inverse(x));
    let mut w = Worst::min_identity();
    for (j, &t) in g.iter().enumerate() {
        for &s in &g[..=j] {
            let m = f(base.eval(s, t)) - base.eval(f(s), t);
            w = w.take_min(Worst { value: m, at: Location::Point { u: s, v: t } });
        }
    }
    GridCheckReport::margin("phi-order-criterion", n, w.value, w.at, CONCORDANCE_TOL)
}

/// `psi1 <= psi2` pointwise on the grid.
pub fn psi_order_criterion(psi1: &MonotoneMap, psi2: &MonotoneMap, n: usize) -> GridCheckReport {
    let n = n.max(2);
    let mut w = Worst::min_identity();
    for t in linspace(0.0, 1.0, n) {
        w = w.take_min(Worst { value: psi2.value(t) - psi1.value(t), at: Location::Point { u: t, v: t } });
    }
    GridCheckReport::margin("psi-order-criterion", n, w.value, w.at, CONCORDANCE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::MonotoneMap;
    use crate::transform::{build, BuildOptions, Gate, TransformedCopula};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn batch(pairs: Vec<(f64, f64)>) -> SampleBatch {
        let n = pairs.len();
        SampleBatch { on_diagonal: vec![false; n], pairs, seed: 0, n }
    }

    fn tf(base: CopulaSpec, pair: GeneratorPair) -> TransformedCopula {
        build(base, pair, Gate::Theorem, &BuildOptions::default()).unwrap()
    }

    #[test]
    fn numeric_tails_of_bases() {
        let m = lambda_numeric(&CopulaSpec::upper(), Side::Upper, &DEFAULT_EPS).unwrap();
        close(m.value, 1.0, 1e-12);
        let fgm = CopulaSpec::fgm(1.0).unwrap();
        close(lambda_numeric(&fgm, Side::Upper, &DEFAULT_EPS).unwrap().value, 0.0, 1e-6);
        close(lambda_numeric(&fgm, Side::Lower, &DEFAULT_EPS).unwrap().value, 0.0, 1e-6);
        let clayton = CopulaSpec::clayton(2.0).unwrap();
        let l = lambda_numeric(&clayton, Side::Lower, &DEFAULT_EPS).unwrap();
        close(l.value, 0.5f64.sqrt(), 1e-6);
        assert!(l.converged);
        assert!(lambda_numeric(&clayton, Side::Lower, &[1e-3, 1e-2]).is_err());
    }

    #[test]
    fn closed_tail_examples() {
        // (a): psi = t^b (2 - t^g), lambda_U = g / b
        for &(b, g) in &[(1.0, 0.5), (0.8, 0.4), (0.5, 0.25)] {
            let pair = GeneratorPair::new(MonotoneMap::power(b), MonotoneMap::ca(b, g).unwrap()).unwrap();
            let base = CopulaSpec::fgm(1.0).unwrap();
            let mut inp = estimate_tail_inputs(&pair, Side::Upper);
            close(inp.alpha_exp, 1.0, 1e-9);
            close(inp.b, 1.0 - g / b, 1e-6);
            inp.case_tag = Some(TailCase::UpperLamU0);
            close(lambda_transformed_closed(0.0, &inp).unwrap(), g / b, 1e-6);
            close(closed_tail_for(&base, &pair, Side::Upper).unwrap(), g / b, 1e-6);
        }
        // (b): psi = t^g, lambda_U = 1 - g / b
        let pair = GeneratorPair::powers(0.8, 0.4).unwrap();
        let inp = TailCaseInputs::new(1.0, 0.8, 0.5, Some(TailCase::UpperLamU0)).unwrap();
        close(lambda_transformed_closed(0.0, &inp).unwrap(), 0.5, 1e-15);
        close(estimate_tail_inputs(&pair, Side::Upper).b, 0.5, 1e-6);
        // b = 1 with base lambda_U = 0 gives 0
        let inp = TailCaseInputs::new(1.0, 1.0, 1.0, Some(TailCase::UpperB1)).unwrap();
        assert_eq!(lambda_transformed_closed(0.0, &inp).unwrap(), 0.0);
        assert!(TailCaseInputs::new(1.0, 1.0, 0.0, Some(TailCase::LowerLamL0)).is_err());
        let inp = TailCaseInputs::new(1.0, 1.0, 0.5, Some(TailCase::UpperLamU0)).unwrap();
        assert!(matches!(lambda_transformed_closed(0.3, &inp), Err(TfError::CaseMismatch(_))));
    }

    #[test]
    fn tail_input_estimates() {
        let sqrt = GeneratorPair::powers(0.5, 0.5).unwrap();
        let lo = estimate_tail_inputs(&sqrt, Side::Lower);
        close(lo.alpha_exp, 0.5, 1e-9);
        close(lo.a, 1.0, 1e-9);
        assert_eq!(lo.b, 1.0);
        assert_eq!(estimate_tail_inputs(&sqrt, Side::Upper).b, 1.0);
        let affine = GeneratorPair::new(MonotoneMap::identity(), MonotoneMap::affine(0.5).unwrap()).unwrap();
        close(estimate_tail_inputs(&affine, Side::Lower).b, 0.0, 1e-6);
    }

    #[test]
    fn fgm_affine_lower_values() {
        assert_eq!(lambda_fgm_affine_lower(0.5, 1.0), 0.75);
        assert_eq!(lambda_fgm_affine_lower(1.0, 0.3), 1.0);
        for &(a0, theta) in &[(0.5, 0.0), (0.5, 1.0), (0.25, 0.5)] {
            let base = CopulaSpec::fgm(theta).unwrap();
            let pair = GeneratorPair::new(MonotoneMap::identity(), MonotoneMap::affine(a0).unwrap()).unwrap();
            let c = tf(base.clone(), pair.clone());
            let num = lambda_numeric(&c, Side::Lower, &DEFAULT_EPS).unwrap().value;
            close(num, lambda_fgm_affine_lower(a0, theta), 1e-3);
            close(closed_tail_for(&base, &pair, Side::Lower).unwrap(), lambda_fgm_affine_lower(a0, theta), 1e-15);
        }
    }

    #[test]
    fn unsupported_lower_case() {
        let base = CopulaSpec::clayton(2.0).unwrap();
        let pair = GeneratorPair::new(MonotoneMap::identity(), MonotoneMap::affine(0.5).unwrap()).unwrap();
        assert!(matches!(closed_tail_for(&base, &pair, Side::Lower), Err(TfError::UnsupportedCase(_))));
    }

    #[test]
    fn additive_closed() {
        close(lambda_additive_closed(Side::Upper, 1.0, 0.3).unwrap(), 0.7, 1e-15);
        assert_eq!(lambda_additive_closed(Side::Upper, 1.0, 1.0).unwrap(), 0.0);
        close(lambda_additive_closed(Side::Upper, 2.0, 1.0).unwrap(), 2.0 - 2f64.sqrt(), 1e-15);
        assert_eq!(lambda_additive_closed(Side::Lower, 1.0, -0.5).unwrap(), 0.0);
        assert!(lambda_additive_closed(Side::Upper, 1.0, 1.5).is_err());
    }

    #[test]
    fn tail_consistency_for_power_pairs() {
        let clayton = CopulaSpec::clayton(2.0).unwrap();
        let c = tf(clayton.clone(), GeneratorPair::powers(0.5, 0.5).unwrap());
        close(lambda_numeric(&c, Side::Lower, &DEFAULT_EPS).unwrap().value, 0.5, 1e-3);
        close(closed_tail_for(&clayton, c.pair(), Side::Lower).unwrap(), 0.5, 1e-9);
        for &a0 in &[0.25, 0.5, 0.75] {
            let ca = tf(CopulaSpec::independence(), GeneratorPair::powers(1.0, a0).unwrap());
            close(lambda_numeric(&ca, Side::Upper, &DEFAULT_EPS).unwrap().value, 1.0 - a0, 1e-3);
            close(closed_tail_for(ca.base(), ca.pair(), Side::Upper).unwrap(), 1.0 - a0, 1e-6);
        }
    }

    #[test]
    fn tau_fast_matches_naive_with_ties() {
        let mut pairs = vec![];
        for i in 0..300u64 {
            let a = ((i * 7919) % 37) as f64 / 37.0;
            let b = ((i * 104729) % 23) as f64 / 23.0;
            pairs.push((a, if i % 5 == 0 { a } else { b }));
        }
        assert_eq!(concordance_balance(&pairs), concordance_balance_naive(&pairs));
    }

    #[test]
    fn comonotone_sample() {
        let b = batch((0..50).map(|i| (i as f64 / 50.0, i as f64 / 50.0)).collect());
        assert_eq!(kendall_tau(&b).unwrap(), 1.0);
        close(spearman_rho(&b).unwrap(), 1.0, 1e-15);
        let flat = batch(vec![(0.5, 0.1), (0.5, 0.2), (0.5, 0.3)]);
        assert!(matches!(kendall_tau(&flat), Err(TfError::Degenerate(_))));
        assert!(spearman_rho(&batch(vec![(0.1, 0.2)])).is_err());
    }

    #[test]
    fn midrank_ties() {
        assert_eq!(midranks(&[0.3, 0.1, 0.3, 0.2]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn tp2_examples() {
        let fgm = tf(CopulaSpec::fgm(1.0).unwrap(), GeneratorPair::powers(1.0, 0.5).unwrap());
        assert!(tp2_check(&fgm, 40).passed);
        let w = tp2_check(&CopulaSpec::lower(), 40);
        assert!(!w.passed);
        match w.worst_location {
            Location::Rectangle { u1, u2, v1, v2 } => {
                let c = CopulaSpec::lower();
                assert!(c.eval(u1, v1) * c.eval(u2, v2) < c.eval(u1, v2) * c.eval(u2, v1));
            }
            other => panic!("{other:?}"),
        }
        // sampled rectangles on a fine grid
        assert!(!tp2_check(&CopulaSpec::lower(), 150).passed);
    }

    #[test]
    fn concordance_examples() {
        let lo = CopulaSpec::fgm(0.2).unwrap();
        let hi = CopulaSpec::fgm(0.8).unwrap();
        assert!(concordance_compare(&lo, &hi, 50).passed);
        assert!(!concordance_compare(&hi, &lo, 50).passed);

        let pi = CopulaSpec::independence();
        let p1 = tf(pi.clone(), GeneratorPair::powers(1.0, 0.6).unwrap());
        let p2 = tf(pi.clone(), GeneratorPair::powers(1.0, 0.4).unwrap());
        assert!(concordance_compare(&p1, &p2, 50).passed);
        assert!(psi_order_criterion(p1.psi(), p2.psi(), 200).passed);
        assert!(!concordance_compare(&p2, &p1, 50).passed);
        assert!(!psi_order_criterion(p2.psi(), p1.psi(), 200).passed);

        let (s, t) = (MonotoneMap::power(0.5), MonotoneMap::identity());
        let c1 = tf(pi.clone(), GeneratorPair::new(s.clone(), MonotoneMap::power(0.5)).unwrap());
        let c2 = tf(pi.clone(), GeneratorPair::new(t.clone(), MonotoneMap::power(0.5)).unwrap());
        assert!(phi_order_criterion(&pi, &s, &t, 100).passed);
        assert!(concordance_compare(&c1, &c2, 100).passed);
        assert!(!phi_order_criterion(&pi, &t, &s, 100).passed);
        assert!(!concordance_compare(&c2, &c1, 100).passed);
    }
}
