use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no pixels")]
    NoPixels,

    #[error("bandwidth search did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("degenerate palette: normal-equation matrix is singular")]
    DegeneratePalette,

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("pixel buffer of {len} rows does not match {width}x{height}")]
    BadBuffer {
        width: usize,
        height: usize,
        len: usize,
    },

    #[error("entropy input contains a negative or non-finite element at index {index}")]
    InvalidDistribution { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("malformed colour '{0}': expected #RRGGBB")]
    InvalidHex(String),

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("report {path}: {source}")]
    Report {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
