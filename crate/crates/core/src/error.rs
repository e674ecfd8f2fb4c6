use thiserror::Error;

/// Errors raised by the constructors and checks in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge sets have mismatched universe sizes ({0} vs {1})")]
    UniverseMismatch(usize, usize),

    #[error("vertex {vertex} is out of range for a universe of {size} vertices")]
    VertexOutOfRange { vertex: usize, size: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("complete graph 1-factorization needs an even order >= 2, got {0}")]
    OddFactorization(usize),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("invalid party layout: {0}")]
    InvalidLayout(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid basis assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid extension witness: {0}")]
    InvalidWitness(String),

    #[error("ambiguous grouping on party {party}: overlap {overlap} between states {a} and {b} is in the dead band")]
    AmbiguousGrouping {
        party: usize,
        a: usize,
        b: usize,
        overlap: f64,
    },

    #[error("invalid document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
