use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CbsError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("evaluation point {z} lies within {dist:e} of a pole")]
    PoleProximity { z: String, dist: f64 },
    #[error("integrand does not decay in the integration variable")]
    NonDecaying,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error("untagged term in configuration selection: {0}")]
    Untagged(String),
}

pub type Result<T> = std::result::Result<T, CbsError>;
