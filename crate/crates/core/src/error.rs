use thiserror::Error;

/// Library-wide error type. `Unknown` verdicts are values, not errors; these
/// variants cover genuine failures and explicitly rejected inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("null set: {0}")]
    NullSet(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("precondition violation: {0}")]
    PreconditionViolation(String),
    #[error("hypothesis fail: {0}")]
    HypothesisFail(String),
    #[error("construction failure: {0}")]
    ConstructionFailure(String),
    #[error("zero modular")]
    ZeroModular,
    #[error("band empty: {0}")]
    BandEmpty(String),
    #[error("evaluation failure: {0}")]
    EvalFailure(String),
    #[error("unknown corpus entry: {0}")]
    UnknownCorpus(String),
    #[error("skipped: {0}")]
    Skipped(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
