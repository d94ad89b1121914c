use thiserror::Error;

use crate::model::UserIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("infeasible QoS instance: {0}")]
    Infeasible(String),

    #[error("degenerate (zero-norm) equivalent channel at user {0}")]
    DegenerateChannel(UserIndex),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
