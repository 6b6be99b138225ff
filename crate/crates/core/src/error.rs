use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("bad magic: expected \"AFPY\", found {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("truncated header")]
    TruncatedHeader,

    #[error("trailing bytes after payload: {0}")]
    TrailingBytes(usize),

    #[error("dimension {0} does not fit in 32 bits")]
    DimsOverflow(usize),

    #[error("invalid tensor shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph has {nodes} nodes; exact solver is limited to {max}")]
    TooManyNodes { nodes: usize, max: usize },

    #[error("partition labels {labels} nodes but graph has {nodes}")]
    LabelOutOfRange { labels: usize, nodes: usize },

    #[error("proposal pixel {0} is not a node of the graph")]
    ProposalMasked(u32),

    #[error("scene too crowded: instance {instance} not placed after {attempts} attempts")]
    SceneTooCrowded { instance: u32, attempts: u32 },

    #[error("matching invariant violated: {0}")]
    MatchingViolation(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
