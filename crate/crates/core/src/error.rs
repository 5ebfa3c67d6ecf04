use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("generated graph has zero edges")]
    DegenerateGraph,

    #[error("iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("class {0} has no training node")]
    MissingClass(usize),

    #[error("too few nodes: every split part must be non-empty")]
    TooFewNodes,

    #[error("constant input: correlation is undefined")]
    ConstantInput,
}

pub type Result<T> = std::result::Result<T, Error>;
