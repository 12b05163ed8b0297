use alloc::string::String;

use crate::stain::Dye;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("channel count mismatch: expected {expected}, found {found}")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("wavelength grid must be 440..=700 nm in 20 nm steps")]
    WavelengthGrid,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("stain vector has zero mean optical density (unstained region?)")]
    Unstained,
    #[error("duplicate dye {0}")]
    DuplicateDye(Dye),
    #[error("missing dye {0}")]
    MissingDye(Dye),
    #[error("expected 4 dyes, got {0}")]
    DyeCount(usize),
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("non-finite value in iterate at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("patch at ({cx}, {cy}) of size {size} exceeds the image bounds")]
    OutOfBounds { cx: usize, cy: usize, size: usize },
    #[error("patch has zero total abundance")]
    ZeroPatch,
    #[error("pooled covariance is singular")]
    SingularCovariance,
    #[error("class {0} has too few samples")]
    EmptyClass(&'static str),
    #[error("could only place {placed} of {requested} cells without overlap")]
    Placement { placed: usize, requested: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
