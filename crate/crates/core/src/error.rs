use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is outside the supported range 3..2^62")]
    ModulusOutOfRange(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("integer does not fit in {len} octets")]
    Overflow { len: usize },

    #[error("{0} is not a primitive root modulo p")]
    NotPrimitiveRoot(u64),
    #[error("primitive vector components must be pairwise distinct")]
    DuplicateGenerator,
    #[error("ephemeral secret {0} outside 1..=p-2")]
    SecretOutOfRange(u64),
    #[error("peer public component {0} outside 2..=p-2")]
    InvalidPeerPublic(u64),
    #[error("peer signature did not verify")]
    SignatureInvalid,
    #[error("transcript MAC did not verify")]
    MacInvalid,
    #[error("handshake message malformed: {0}")]
    HandshakeMalformed(&'static str),
    #[error("channel closed")]
    ChannelClosed,

    #[error("HKDF salt must not be empty")]
    EmptySalt,
    #[error("HKDF output length {0} exceeds 255*32")]
    OutLenTooLarge(usize),

    #[error("matrix is singular modulo p")]
    Singular,
    #[error("key matrix degenerate: det(V) = 0")]
    DegenerateKey,

    #[error("shape {rows}x{cols} invalid: both dimensions must be at least 3")]
    BadShape { rows: usize, cols: usize },
    #[error("message of {len} bytes does not fit from the start position ({capacity} cells available)")]
    MessageTooLong { len: usize, capacity: usize },
    #[error("start position ({row}, {col}) outside the matrix")]
    BadStart { row: usize, col: usize },
    #[error("length {0} exceeds available cells")]
    BadLength(usize),
    #[error("block at ({row}, {col}) out of bounds")]
    OutOfBounds { row: usize, col: usize },
    #[error("invalid index plan: {0}")]
    BadPlan(String),
    #[error("overlapping blocks disagree at cell ({row}, {col})")]
    OverlapMismatch { row: usize, col: usize },
    #[error("cell ({row}, {col}) not covered by any block")]
    Uncovered { row: usize, col: usize },

    #[error("recovered cell ({row}, {col}) is not an octet value")]
    CellOutOfRange { row: usize, col: usize },

    #[error("header malformed: {0}")]
    HeaderMalformed(String),
    #[error("parse error at offset {offset}: {reason}")]
    ParseError { offset: usize, reason: &'static str },

    #[error("analysis input is empty")]
    EmptyInput,
    #[error("randomness tests need at least {needed} bits, got {got}")]
    InsufficientBits { needed: usize, got: usize },
    #[error("known-plaintext probe needs at least 3 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("stacked plaintext rows are linearly dependent")]
    SingularSystem,
    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },
}
