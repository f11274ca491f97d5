use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("energy {offset:e} rad/s lies within {distance:e} rad/s of the pole at {pole:e} rad/s")]
    NearPole { offset: f64, pole: f64, distance: f64 },

    #[error("energy {offset:e} rad/s is not a root of the secular function (hard-core violation {violation:e})")]
    NotARoot { offset: f64, violation: f64 },

    #[error("energy {offset:e} rad/s is within {distance:e} rad/s of an AB level")]
    NearSingular { offset: f64, distance: f64 },

    #[error("{what} index {index} out of range 1..={max}")]
    IndexOutOfRange { what: &'static str, index: usize, max: usize },

    #[error("dimension {dim} exceeds the dense eigensolve budget (N <= {max_n})")]
    DimensionTooLarge { dim: usize, max_n: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
