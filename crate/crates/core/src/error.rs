use thiserror::Error;

/// Errors raised by state construction, optical elements and the protocol.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("support overflow: amplitude {amplitude:.3e} on q={q} (path {path}) would leave the OAM window")]
    SupportOverflow { q: i64, path: usize, amplitude: f64 },

    #[error("degenerate profile: all coefficients vanish after clipping to the window")]
    DegenerateProfile,

    #[error("asymmetric profile: c({m}) != c({partner})")]
    AsymmetricProfile { m: i64, partner: i64 },

    #[error("unsupported pump charge l={0}; only l=1 supports the parity protocol")]
    UnsupportedPump(i64),

    #[error("impossible outcome {outcome}: probability {probability:.3e}")]
    ImpossibleOutcome { outcome: String, probability: f64 },

    #[error("protocol integrity: {0}")]
    ProtocolIntegrity(String),

    #[error("convention inconsistency: {0}")]
    ConventionInconsistency(String),

    #[error("wiring: {0}")]
    Wiring(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bench lowering: {0}")]
    Lowering(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
