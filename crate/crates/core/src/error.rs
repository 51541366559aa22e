use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Scheme parameters that admit no scheme.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("{what} {index} out of range (must be < {bound})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },
    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),
    /// The caller asked for something the operation refuses to do.
    #[error("usage error: {0}")]
    Usage(String),
    /// A scheme invariant that should hold by construction did not.
    #[error("internal consistency fault: {0}")]
    Consistency(String),
    #[error("insufficient range: {feasible} usable rows, need at least {needed}")]
    InsufficientRange { feasible: usize, needed: usize },
}

impl Error {
    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Self::Infeasible(msg.into())
    }
}
