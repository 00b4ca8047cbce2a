use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-conforming mesh: facet {facet:?} is shared by {count} pentatopes")]
    Conformity { facet: [usize; 4], count: usize },

    #[error("zero scale factor on axis {axis}")]
    ZeroScale { axis: usize },

    #[error("invalid extrusion interval: t_lo={t_lo}, t_hi={t_hi}, layers={layers}")]
    NonconvexSpec { t_lo: f64, t_hi: f64, layers: usize },

    #[error("degenerate prism: repeated node indices {0:?}")]
    DegeneratePrism([usize; 8]),

    #[error("element {element} is inverted or degenerate (measure {measure:e})")]
    InvertedElement { element: usize, measure: f64 },

    #[error("no degree of freedom is constrained; the system is singular")]
    EmptyDirichlet,

    #[error(
        "conflicting Dirichlet values for node {node}, dof {dof}: {first} vs {second}"
    )]
    InconsistentDirichlet {
        node: usize,
        dof: usize,
        first: f64,
        second: f64,
    },

    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("field evaluated outside its domain: {0}")]
    DomainError(String),

    #[error("mesh has no elements")]
    EmptyMesh,

    #[error("time {time} outside mesh range [{lo}, {hi}] (margin {margin})")]
    TimeOutOfRange {
        time: f64,
        lo: f64,
        hi: f64,
        margin: f64,
    },

    #[error("no facet carries an initial-slice tag {0:?}")]
    MissingBottom(Vec<i32>),

    #[error("length mismatch: expected {expected}, got {actual} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported file version: {0}")]
    UnsupportedVersion(String),

    #[error("mesh file contains no tetrahedra")]
    NoTets,

    #[error("count mismatch in section `{section}`: declared {declared}, found {found}")]
    CountMismatch {
        section: String,
        declared: usize,
        found: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable upper-case name of the error kind, for logs and harnesses.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidMesh(_) => "INVALID_MESH",
            Error::Conformity { .. } => "CONFORMITY",
            Error::ZeroScale { .. } => "ZERO_SCALE",
            Error::NonconvexSpec { .. } => "NONCONVEX_SPEC",
            Error::DegeneratePrism(_) => "DEGENERATE_PRISM",
            Error::InvertedElement { .. } => "INVERTED_ELEMENT",
            Error::EmptyDirichlet => "EMPTY_DIRICHLET",
            Error::InconsistentDirichlet { .. } => "INCONSISTENT_DIRICHLET",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::DomainError(_) => "DOMAIN_ERROR",
            Error::EmptyMesh => "EMPTY_MESH",
            Error::TimeOutOfRange { .. } => "TIME_OUT_OF_RANGE",
            Error::MissingBottom(_) => "MISSING_BOTTOM",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::UnsupportedVersion(_) => "UNSUPPORTED_VERSION",
            Error::NoTets => "NO_TETS",
            Error::CountMismatch { .. } => "COUNT_MISMATCH",
            Error::Config(_) => "CONFIG",
            Error::Io { .. } => "IO_ERROR",
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
