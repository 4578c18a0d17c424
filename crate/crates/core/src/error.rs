use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{key}: {source}")]
    Parse {
        key: String,
        #[source]
        source: ParseError,
    },
    #[error("evaluation failed at {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required key '{0}'")]
    MissingKey(String),
    #[error("duplicate key '{0}'")]
    DuplicateKey(String),
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("expression for {key} uses '{var}', which is not a chart coordinate")]
    UnknownCoordinate { key: String, var: String },
    #[error("metric is not symmetric at {point:?}: g[{i}][{j}] = {gij}, g[{j}][{i}] = {gji}")]
    NotSymmetric {
        point: Vec<f64>,
        i: usize,
        j: usize,
        gij: f64,
        gji: f64,
    },
    #[error("metric is not positive definite at {0:?}")]
    NotPositiveDefinite(Vec<f64>),
    #[error("sampling box for coordinate {0} is empty")]
    EmptyBox(usize),
    #[error("point {point:?} lies outside the sampling box")]
    OutOfBox { point: Vec<f64> },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("requires dimension n > 2, chart has n = {0}")]
    DimensionTooSmall(usize),
    #[error("the 1-form π vanishes")]
    ZeroOneForm,
    #[error("tensor rank {upper} up / {lower} down is not supported (at most (1,3))")]
    UnsupportedRank { upper: usize, lower: usize },
    #[error("chart has no almost-contact structure (phi, f1, f2, f3)")]
    MissingStructure,
    #[error("parallel unit ξ gate failed (residual {0:.3e})")]
    GateFailed(f64),
    #[error("unknown catalog entry '{0}'")]
    UnknownManifold(String),
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
    #[error("unknown tensor '{0}'")]
    UnknownTensor(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
