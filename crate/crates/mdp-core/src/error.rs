use thiserror::Error;

pub type Result<T> = std::result::Result<T, MdpError>;

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("discount must lie in [0, 1), got {0}")]
    InvalidDiscount(f64),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("model contract violated: {0}")]
    ModelContract(String),

    #[error("invalid state or action index: {0}")]
    InvalidIndex(String),

    #[error("{0}")]
    Contraction(#[from] ContractionFailure),
}

/// One sweep in the residual history broke the discount contraction bound.
#[derive(Debug, Error)]
#[error(
    "contraction failure at sweep {sweep}: residual {residual:.6e} exceeds \
     {discount} * {previous:.6e} + {slack:.1e}"
)]
pub struct ContractionFailure {
    pub sweep: usize,
    pub residual: f64,
    pub previous: f64,
    pub discount: f64,
    pub slack: f64,
}
