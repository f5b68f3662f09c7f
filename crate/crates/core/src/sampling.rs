//! Exact sampling by conditional inversion, with the diagonal atom placed
//! explicitly.

use std::io::{self, BufRead, Write};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TfError};
use crate::numeric::bisect_increasing;
use crate::transform::{Branch, TransformedCopula};

/// Draws of `u` are kept this far from the endpoints.
pub const U_MARGIN: f64 = 1e-12;
/// Target accuracy of the inverted conditional CDF.
pub const INVERSION_TOL: f64 = 1e-10;
pub const MAX_BISECTION: usize = 200;

/// Samples with a flag for draws placed on the diagonal atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub pairs: Vec<(f64, f64)>,
    pub on_diagonal: Vec<bool>,
    pub seed: u64,
    pub n: usize,
}

/// The `i`-th pair of uniforms for `seed`. Each draw consumes a fixed
/// block of the ChaCha8 keystream, so the value is independent of how
/// draws are scheduled.
pub fn uniform_pair(seed: u64, i: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(u128::from(i) * 4);
    (to_unit(rng.next_u64()), to_unit(rng.next_u64()))
}

fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn branch_value(tf: &TransformedCopula, u: f64, v: f64, b: Branch) -> f64 {
    tf.conditional_cdf_branch(u, v, b).unwrap_or(0.0)
}

/// Draws `V` given `U = u` with conditional probability level `p`.
/// Returns the value and whether it is the diagonal atom.
pub fn invert_conditional(tf: &TransformedCopula, u: f64, p: f64) -> Result<(f64, bool)> {
    let below = branch_value(tf, u, u, Branch::Lower);
    let above = branch_value(tf, u, u, Branch::Upper);
    if above > below && p >= below && p < above {
        return Ok((u, true));
    }
    let (lo, hi, branch) = if p < below { (0.0, u, Branch::Lower) } else { (u, 1.0, Branch::Upper) };
    let f = |v: f64| branch_value(tf, u, v, branch);
    let (flo, fhi) = (f(lo), f(hi));
    if p <= flo {
        return Ok((lo, false));
    }
    if p >= fhi {
        return Ok((hi, false));
    }
    let root = bisect_increasing(f, lo, hi, p, INVERSION_TOL, MAX_BISECTION)
        .map_err(|e| TfError::InversionFailure { u, p, reason: e.to_string() })?;
    Ok((root.x, false))
}

/// `n` draws from `tf`, deterministic in `(n, seed)` regardless of the
/// thread count.
pub fn sample(tf: &TransformedCopula, n: usize, seed: u64) -> Result<SampleBatch> {
    if tf.phi().at_zero() > 0.0 {
        return Err(TfError::PreconditionViolated(format!("sampling needs phi(0) = 0, got {}", tf.phi().at_zero())));
    }
    let draws: Vec<Result<(f64, f64, bool)>> = (0..n)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let (a, p) = uniform_pair(seed, i as u64);
            let u = a.clamp(U_MARGIN, 1.0 - U_MARGIN);
            let (v, diag) = invert_conditional(tf, u, p)?;
            Ok((u, v, diag))
        })
        .collect();
    let mut pairs = Vec::with_capacity(n);
    let mut on_diagonal = Vec::with_capacity(n);
    for d in draws {
        let (u, v, diag) = d?;
        pairs.push((u, v));
        on_diagonal.push(diag);
    }
    Ok(SampleBatch { pairs, on_diagonal, seed, n })
}

impl SampleBatch {
    pub fn diagonal_fraction(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.on_diagonal.iter().filter(|&&d| d).count() as f64 / self.n as f64
    }

    pub fn us(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn vs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    /// A contiguous sub-batch, for batch-means error estimates.
    pub fn slice(&self, start: usize, end: usize) -> SampleBatch {
        SampleBatch {
            pairs: self.pairs[start..end].to_vec(),
            on_diagonal: self.on_diagonal[start..end].to_vec(),
            seed: self.seed,
            n: end - start,
        }
    }

    /// Writes `u,v,on_diagonal` rows; numbers use the shortest
    /// representation that reads back to the same `f64`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "u,v,on_diagonal")?;
        for (&(u, v), &d) in self.pairs.iter().zip(&self.on_diagonal) {
            writeln!(w, "{u:?},{v:?},{}", u8::from(d))?;
        }
        w.flush()
    }

    pub fn read_csv<R: BufRead>(r: R, seed: u64) -> io::Result<SampleBatch> {
        let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
        let mut lines = r.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("u,v,on_diagonal") {
            return Err(bad("missing header u,v,on_diagonal".into()));
        }
        let mut pairs = vec![];
        let mut on_diagonal = vec![];
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 3 {
                return Err(bad(format!("row {}: expected 3 fields", k + 2)));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", k + 2)));
            pairs.push((num(f[0])?, num(f[1])?));
            on_diagonal.push(match f[2] {
                "1" => true,
                "0" => false,
                other => return Err(bad(format!("row {}: flag {other:?}", k + 2))),
            });
        }
        let n = pairs.len();
        Ok(SampleBatch { pairs, on_diagonal, seed, n })
    }
}

/// Kolmogorov-Smirnov distances of both margins from Uniform(0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalKs {
    pub ks_u: f64,
    pub ks_v: f64,
    /// `1.95 / sqrt(n)`, roughly the 0.001-level critical value
    pub band: f64,
}

impl MarginalKs {
    pub fn passed(&self) -> bool {
        self.ks_u < self.band && self.ks_v < self.band
    }
}

pub fn ks_uniform(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

pub fn empirical_marginals(batch: &SampleBatch) -> Result<MarginalKs> {
    if batch.n < 100 {
        return Err(TfError::InvalidArgument(format!("need at least 100 draws, got {}", batch.n)));
    }
    Ok(MarginalKs {
        ks_u: ks_uniform(&batch.us()),
        ks_v: ks_uniform(&batch.vs()),
        band: 1.95 / (batch.n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::CopulaSpec;
    use crate::generators::GeneratorPair;
    use crate::transform::{build, BuildOptions, Gate};

    fn ca_half() -> TransformedCopula {
        build(
            CopulaSpec::independence(),
            GeneratorPair::powers(1.0, 0.5).unwrap(),
            Gate::Theorem,
            &BuildOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn uniforms_depend_only_on_seed_and_index() {
        let a = uniform_pair(7, 12345);
        assert_eq!(a, uniform_pair(7, 12345));
        assert_ne!(a, uniform_pair(8, 12345));
        assert_ne!(a, uniform_pair(7, 12346));
        assert!(a.0 >= 0.0 && a.0 < 1.0 && a.1 >= 0.0 && a.1 < 1.0);
    }

    #[test]
    fn diagonal_draws_are_exact() {
        let b = sample(&ca_half(), 2000, 3).unwrap();
        for (&(u, v), &d) in b.pairs.iter().zip(&b.on_diagonal) {
            if d {
                assert_eq!(u.to_bits(), v.to_bits());
            }
            assert!((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let tf = ca_half();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| sample(&tf, 3000, 11).unwrap());
        let b = sample(&tf, 3000, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inversion_hits_target() {
        let tf = ca_half();
        for &(u, p) in &[(0.3, 0.05), (0.3, 0.9), (0.7, 0.2), (0.5, 0.999)] {
            let (v, diag) = invert_conditional(&tf, u, p).unwrap();
            assert!(!diag);
            assert!((tf.conditional_cdf(u, v).unwrap() - p).abs() < 1e-9);
        }
        // the atom at u = 0.25 covers [0.25, 0.5)
        assert_eq!(invert_conditional(&tf, 0.25, 0.4).unwrap(), (0.25, true));
    }

    #[test]
    fn csv_round_trip() {
        let b = sample(&ca_half(), 200, 5).unwrap();
        let mut buf = vec![];
        b.write_csv(&mut buf).unwrap();
        let back = SampleBatch::read_csv(&buf[..], 5).unwrap();
        assert_eq!(back, b);
        let empty = sample(&ca_half(), 0, 5).unwrap();
        let mut buf = vec![];
        empty.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "u,v,on_diagonal\n");
    }

    #[test]
    fn marginal_checks() {
        let b = sample(&ca_half(), 100, 1).unwrap();
        let ks = empirical_marginals(&b).unwrap();
        assert!(ks.ks_u > 0.0 && ks.band > 0.19);
        assert!(empirical_marginals(&sample(&ca_half(), 99, 1).unwrap()).is_err());
        assert_eq!(ks, empirical_marginals(&sample(&ca_half(), 100, 1).unwrap()).unwrap());
    }
}
