use thiserror::Error;

use crate::compartments::NodePath;

pub type Result<T> = std::result::Result<T, Error>;

/// Error taxonomy shared by all modules.
///
/// Reconstruction errors carry the path of the scheme node at which the
/// requirement could not be met (the root path for flat schemes).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("operands belong to different prime fields")]
    ModulusMismatch,

    #[error("no inverse of zero")]
    NoInverseOfZero,

    #[error("{0} is not a valid modulus (must be prime and >= 5)")]
    NotPrime(u64),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("crucial share missing at node {path}")]
    CrucialShareMissing { path: NodePath },

    #[error("insufficient distinct shares at node {path}")]
    InsufficientShares { path: NodePath },

    #[error("inconsistent shares at node {path}")]
    InconsistentShares { path: NodePath },

    #[error("enumeration limit exceeded: {0}")]
    EnumerationLimit(String),

    #[error("randomness state space too large: {0}")]
    StateSpaceTooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("compiler produced wrong scheme; counterexample subset: {{{0}}}")]
    CompilerProducedWrongScheme(String),
}
