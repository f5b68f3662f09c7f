//! JSON job configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use tfcop::copula::GRID_TOL;
use tfcop::generators::MapKind;
use tfcop::transform::{build, BuildOptions, Gate, TransformedCopula};
use tfcop::{CopulaSpec, GeneratorPair, MonotoneMap, TfError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseSpec {
    Independence,
    FrechetUpper,
    FrechetLower,
    Fgm { theta: f64 },
    Clayton { alpha: f64 },
    Gumbel { beta: f64 },
    Frank { gamma: f64 },
    CuadrasAuge { alpha: f64 },
}

impl BaseSpec {
    pub fn to_spec(&self) -> Result<CopulaSpec, TfError> {
        match *self {
            BaseSpec::Independence => Ok(CopulaSpec::independence()),
            BaseSpec::FrechetUpper => Ok(CopulaSpec::upper()),
            BaseSpec::FrechetLower => Ok(CopulaSpec::lower()),
            BaseSpec::Fgm { theta } => CopulaSpec::fgm(theta),
            BaseSpec::Clayton { alpha } => CopulaSpec::clayton(alpha),
            BaseSpec::Gumbel { beta } => CopulaSpec::gumbel(beta),
            BaseSpec::Frank { gamma } => CopulaSpec::frank(gamma),
            BaseSpec::CuadrasAuge { alpha } => CopulaSpec::cuadras_auge(alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Identity,
    Power { beta: f64 },
    Ca { beta: f64, gamma: f64 },
    Affine { alpha: f64 },
    ExpLinear { c: f64 },
}

impl MapSpec {
    pub fn to_map(&self) -> Result<MonotoneMap, TfError> {
        match *self {
            MapSpec::Identity => Ok(MonotoneMap::identity()),
            MapSpec::Power { beta } => MonotoneMap::new(MapKind::Power { beta }),
            MapSpec::Ca { beta, gamma } => MonotoneMap::new(MapKind::Ca { beta, gamma }),
            MapSpec::Affine { alpha } => MonotoneMap::new(MapKind::Affine { alpha }),
            MapSpec::ExpLinear { c } => MonotoneMap::new(MapKind::ExpLinear { c }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// smallest rectangle volume accepted by the 2-increasing check
    #[serde(default = "default_two_increasing")]
    pub two_increasing: f64,
    /// agreement required between numeric and closed-form tail coefficients
    #[serde(default = "default_tail")]
    pub tail: f64,
}

fn default_two_increasing() -> f64 {
    GRID_TOL
}

fn default_tail() -> f64 {
    1e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { two_increasing: default_two_increasing(), tail: default_tail() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub base: BaseSpec,
    /// one of the named pairs a, b, c, d; excludes `phi` and `psi`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<MapSpec>,
    #[serde(default)]
    pub gate: Gate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

pub const DEFAULT_N: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_GRID: usize = 200;

impl JobConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: JobConfig = serde_json::from_str(text).context("malformed config")?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    fn check(&self) -> anyhow::Result<()> {
        let t = &self.tolerances;
        if !(t.two_increasing > 0.0 && t.tail > 0.0) {
            bail!("tolerances must be > 0");
        }
        if self.preset.is_some() && (self.phi.is_some() || self.psi.is_some()) {
            bail!("give either preset or phi/psi, not both");
        }
        if self.grid == Some(0) {
            bail!("grid must be positive");
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(DEFAULT_N)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn grid(&self) -> usize {
        self.grid.unwrap_or(DEFAULT_GRID)
    }

    pub fn base_spec(&self) -> Result<CopulaSpec, TfError> {
        self.base.to_spec()
    }

    /// Missing maps default to the identity.
    pub fn pair(&self) -> Result<GeneratorPair, TfError> {
        if let Some(p) = &self.preset {
            return GeneratorPair::preset(p);
        }
        let phi = self.phi.as_ref().unwrap_or(&MapSpec::Identity).to_map()?;
        let psi = self.psi.as_ref().unwrap_or(&MapSpec::Identity).to_map()?;
        GeneratorPair::new(phi, psi)
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions { grid: self.grid(), ..BuildOptions::default() }
    }

    pub fn build(&self) -> Result<TransformedCopula, TfError> {
        build(self.base_spec()?, self.pair()?, self.gate, &self.build_options())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_presets_and_maps() {
        let c = JobConfig::parse(r#"{"base":{"family":"clayton","alpha":2},"preset":"b","seed":9}"#).unwrap();
        assert_eq!(c.base, BaseSpec::Clayton { alpha: 2.0 });
        assert_eq!((c.seed(), c.n(), c.grid()), (9, DEFAULT_N, DEFAULT_GRID));
        let c = JobConfig::parse(
            r#"{"base":{"family":"cuadras-auge","alpha":0.5},"phi":{"kind":"power","beta":0.5},
                "psi":{"kind":"ca","beta":0.5,"gamma":0.25},"gate":"direct"}"#,
        )
        .unwrap();
        assert_eq!(c.gate, Gate::Direct);
        assert!(c.pair().is_ok());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_tolerances() {
        for bad in [
            r#"{"base":{"family":"independence"},"extra":1}"#,
            r#"{"base":{"family":"fgm","theta":0.5,"alpha":1}}"#,
            r#"{"base":{"family":"independence"},"phi":{"kind":"power","beta":1,"c":2}}"#,
            r#"{"base":{"family":"independence"},"tolerances":{"two_increasing":0}}"#,
            r#"{"base":{"family":"independence"},"tolerances":{"tail":-1}}"#,
            r#"{"base":{"family":"independence"},"preset":"a","phi":{"kind":"identity"}}"#,
            r#"{"base":{"family":"student"}}"#,
            r#"{"base":{"family":"independence"}"#,
        ] {
            assert!(JobConfig::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn echo_round_trips() {
        let text = r#"{"base":{"family":"frank","gamma":4},"preset":"c","n":500}"#;
        let c = JobConfig::parse(text).unwrap();
        let again = JobConfig::parse(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
