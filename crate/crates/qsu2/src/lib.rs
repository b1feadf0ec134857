//! Finite truncations of the operators of the equivariant real spectral triple
//! on quantum SU(2), together with numerical certificates for its identities:
//! algebra relations, equivariance, the real structure, isospectrality of the
//! Dirac operator and the commutant and first-order properties up to
//! infinitesimals.

pub mod approx;
#[cfg(feature = "cli")]
pub mod cli;
pub mod expr;
pub mod hilbert;
pub mod qnum;
pub mod regrep;
pub mod spingeom;
pub mod symmetry;
pub mod verify;

pub use hilbert::{BasisKind, TruncatedBasis, TruncatedOperator};
pub use qnum::{DeformationParameter, HalfInteger, Precision};

/// Errors raised while building or checking operators.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Qnum(#[from] qnum::QnumError),
    #[error(transparent)]
    Hilbert(#[from] hilbert::HilbertError),
    #[error("{operator} needs a {expected:?} basis, got {found:?}")]
    WrongBasis { operator: &'static str, expected: BasisKind, found: BasisKind },
    #[error("cross-check failed for {operator}: residual {residual:e}")]
    CrossCheck { operator: String, residual: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// The four generators of the coordinate algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Generator {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "a*")]
    AStar,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "b*")]
    BStar,
}

impl Generator {
    pub const ALL: [Generator; 4] = [Generator::A, Generator::B, Generator::AStar, Generator::BStar];

    pub fn star(self) -> Self {
        match self {
            Generator::A => Generator::AStar,
            Generator::AStar => Generator::A,
            Generator::B => Generator::BStar,
            Generator::BStar => Generator::B,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::A => "a",
            Generator::AStar => "a*",
            Generator::B => "b",
            Generator::BStar => "b*",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "a" => Some(Generator::A),
            "a*" => Some(Generator::AStar),
            "b" => Some(Generator::B),
            "b*" => Some(Generator::BStar),
            _ => None,
        }
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Numerical context shared by all builders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub q: DeformationParameter,
    pub precision: Precision,
}

impl Params {
    pub fn new(q: f64) -> Result<Self, qnum::QnumError> {
        Ok(Self { q: DeformationParameter::new(q)?, precision: Precision::Double })
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q.value()
    }

    #[inline]
    pub(crate) fn eval(&self, m: &qnum::QMonomial) -> f64 {
        m.eval(self.q, self.precision)
    }
}

/// Map over independent work items, in parallel when the `parallel`
/// feature is on. Output order follows input order.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    items.into_iter().map(f).collect()
}
