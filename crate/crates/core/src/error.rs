use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("degenerate scale: every camera centre sits at the origin")]
    DegenerateScale,
    #[error("degenerate epipolar geometry: relative translation is zero (pure rotation)")]
    DegenerateGeometry,
    #[error("degenerate epipolar line: pixel maps onto the epipole")]
    DegenerateLine,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("need at least {count} frames, got {n_frames}")]
    InsufficientFrames { n_frames: usize, count: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
