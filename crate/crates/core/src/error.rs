use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QkdError {
    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("dimension mismatch: {left} amplitudes vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("eve record for round {0} does not match any round record")]
    MisalignedRound(u64),
}

pub type Result<T, E = QkdError> = std::result::Result<T, E>;
