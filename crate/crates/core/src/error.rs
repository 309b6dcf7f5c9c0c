use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A matrix that has to be inverted is singular or too badly conditioned.
    #[error("{matrix} is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Singular { matrix: String, condition: f64 },

    #[error("point (floor {floor}, node {node}) lies outside the window of its floor")]
    PointOutsideWindow { floor: usize, node: usize },

    #[error("budget exceeded: {required} evaluations requested, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

impl Error {
    pub(crate) fn singular(matrix: impl Into<String>, condition: f64) -> Self {
        Error::Singular {
            matrix: matrix.into(),
            condition,
        }
    }
}
