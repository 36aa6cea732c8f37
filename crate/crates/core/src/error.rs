use thiserror::Error;

pub type Result<T, E = AmpcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AmpcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("truncated sampling failed after {attempts} draws (observed rejection rate {rejection_rate:.6})")]
    SamplingFailure { attempts: usize, rejection_rate: f64 },

    #[error("combined-noise truncation infeasible: {attempts} joint redraws, empirical acceptance rate {acceptance_rate:.6}")]
    TruncationInfeasible { attempts: usize, acceptance_rate: f64 },

    #[error("insufficient shares: need {needed} distinct evaluation points, got {got}")]
    InsufficientShares { needed: usize, got: usize },

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("infeasible privacy budget: {0}")]
    InfeasibleBudget(String),

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("incomplete aggregation: {0}")]
    IncompleteAggregation(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl AmpcError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AmpcError::InvalidArgument(msg.into())
    }

    pub(crate) fn violation(msg: impl Into<String>) -> Self {
        AmpcError::ProtocolViolation(msg.into())
    }
}
