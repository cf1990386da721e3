use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed manifest: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid grid dimensions {nx}x{ny}x{nz}: {reason}")]
    Dims {
        nx: usize,
        ny: usize,
        nz: usize,
        reason: &'static str,
    },

    #[error("{path}: expected {expected} values ({expected_bytes} bytes), file holds {actual_bytes} bytes")]
    SizeMismatch {
        path: PathBuf,
        expected: usize,
        expected_bytes: u64,
        actual_bytes: u64,
    },

    #[error("member {member}: non-finite value {value} at vertex {vertex}")]
    NonFinite {
        member: usize,
        vertex: usize,
        value: f64,
    },

    #[error("ensemble needs at least 2 members, got {0}")]
    TooFewMembers(usize),

    #[error("z index {index} out of range for nz = {nz}")]
    SliceOutOfRange { index: usize, nz: usize },

    #[error("field is already 2D")]
    AlreadyTwoD,

    #[error("stride {stride} leaves fewer than 2 vertices on an axis of extent {extent}")]
    Stride { stride: usize, extent: usize },

    #[error("invalid noise spec: {0}")]
    Noise(&'static str),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("probability {value} at local vertex {vertex} is outside [0, 1]")]
    Probability { vertex: usize, value: f64 },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
