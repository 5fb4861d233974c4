use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configured size cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Message-passing inputs do not satisfy the update protocol.
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(
        "no feasible grouping into {requested} groups{}",
        match smallest_feasible {
            Some(k) => format!(" (smallest feasible group count is {k})"),
            None => " (no feasible group count exists)".to_string(),
        }
    )]
    NoFeasibleGrouping {
        requested: usize,
        smallest_feasible: Option<usize>,
    },
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
