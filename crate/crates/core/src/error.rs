use thiserror::Error;

/// Errors produced by the workbench.
///
/// Solver and attack failures are ordinary variants: callers that probe many
/// candidate keys match on them and keep going.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    /// The greedy solver left a nonzero residual.
    #[error("target is not a subset sum of the easy knapsack")]
    NotDecryptable,

    #[error("decryption failed: {0}")]
    DecryptionFailure(String),

    #[error("basis rows are linearly dependent")]
    RankDeficient,

    /// An oracle guard (size cap) was exceeded.
    #[error("refused: {0}")]
    Refused(String),

    #[error("attack failed: {0}")]
    AttackFailed(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
