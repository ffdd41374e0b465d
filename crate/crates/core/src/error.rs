use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid beacon interval set: {0}")]
    InvalidIntervals(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("schedule is incomplete: {missing} configuration(s) never discovered")]
    IncompleteSchedule { missing: usize },

    #[error("{undiscovered} network(s) are never discovered by the schedule")]
    UndiscoveredNetworks { undiscovered: usize },

    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("sample space exhausted: requested {requested}, only {available} distinct sets exist")]
    SampleSpaceExhausted { requested: usize, available: usize },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
