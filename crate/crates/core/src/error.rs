use thiserror::Error;

use crate::graph::EdgeKey;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("self-loop on vertex {0} is not an edge")]
    SelfLoop(usize),

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("edge {0} is not in the allowed set")]
    EdgeNotAllowed(EdgeKey),

    #[error("conditioning on {0} would make a degree negative")]
    DegreeUnderflow(EdgeKey),

    #[error("invalid degree specification: {0}")]
    InvalidSpec(String),

    #[error("switching pattern violated: {0}")]
    SwitchPattern(String),

    #[error("switching would create existing edge {0}")]
    MultiEdge(EdgeKey),

    #[error("duplicate edge {0}")]
    DuplicateEdge(EdgeKey),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("graph class is empty")]
    EmptyClass,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("series diverges: {0}")]
    Divergence(String),

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("estimate state missing: {0}")]
    MissingState(String),

    #[error("depth budget exhausted: {0}")]
    DepthExhausted(String),

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("codeword cannot be decoded: {0}")]
    Undecodable(String),

    #[error("sampler failed: {0}")]
    Sampler(String),

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
