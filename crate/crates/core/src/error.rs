use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("mode {mode} out of range for a tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} has zero norm")]
    ZeroNorm(&'static str),
    #[error("codebook index {index} out of range for {len} codewords")]
    IndexOutOfRange { index: u32, len: usize },
    #[error("infeasible link budget: {0}")]
    Infeasible(&'static str),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Failures of the feedback message bit codec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("message truncated: needed {needed} bits, only {available} available")]
    Truncated { needed: usize, available: usize },
    #[error("unknown model id {0:#04b}")]
    UnknownModel(u8),
    #[error("field `{field}` value {value} does not fit its bit width")]
    Overflow { field: &'static str, value: usize },
    #[error("parafac weights must carry the omitted unit entry at position 0")]
    NonCanonical,
    #[error("{0} unexpected bytes after the message")]
    TrailingData(usize),
    #[error("payload lengths inconsistent with the preamble")]
    Inconsistent,
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
