use thiserror::Error;

use crate::noise_moments::NoiseMoments;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("infeasible pre-averaging geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("pipeline failed at {stage}: {source}")]
    Pipeline {
        stage: String,
        /// Step-1 noise moments, when they were computed before the failure.
        partial: Option<Box<NoiseMoments>>,
        #[source]
        source: Box<Error>,
    },

    #[error("ingest: {0}")]
    Ingest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
