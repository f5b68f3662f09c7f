//! Transformed bivariate copulas `phi^[-1](C(phi(u ^ v), psi(u v v)))`:
//! construction and validity checks, the diagonal singular component,
//! exact sampling and dependence measures.

pub mod base;
pub mod copula;
pub mod dependence;
pub mod error;
pub mod generators;
pub mod numeric;
pub mod sampling;
pub mod suite;
pub mod transform;
pub mod unit;

pub use base::{make_archimedean, ArchimedeanGenerator, CopulaSpec, Family, GeneratorKind};
pub use copula::{Copula, DerivativeMode, GridCheckReport};
pub use error::{Result, TfError};
pub use generators::{AdditiveGenerator, GeneratorPair, MonotoneMap};
pub use transform::{build, BuildOptions, Gate, TransformedCopula};
pub use unit::UnitValue;
