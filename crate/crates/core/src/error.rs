use thiserror::Error;

pub type Result<T> = std::result::Result<T, GpbError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpbError {
    #[error("parameter lists are empty")]
    Empty,

    #[error(
        "length mismatch: {probs} probabilities, {lower} lower values, \
         {upper} upper values, {weights} weights"
    )]
    LengthMismatch {
        probs: usize,
        lower: usize,
        upper: usize,
        weights: usize,
    },

    #[error("probability {value} at index {index} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("lower value {lower} exceeds upper value {upper} at index {index}")]
    InvertedPair { index: usize, lower: i64, upper: i64 },

    #[error("weight at index {index} must be a positive integer")]
    NonPositiveWeight { index: usize },

    #[error("support arithmetic overflows 64-bit integers")]
    Overflow,

    #[error("value {value} at index {index} is not an integer after scaling by 10^{digits}")]
    NotIntegral { index: usize, value: f64, digits: u32 },

    #[error("{count} effective indicators exceed the oracle cap of {cap}")]
    OracleCap { count: u64, cap: u64 },

    #[error("imaginary residual {residual:e} after inversion exceeds {limit:e}")]
    ImaginaryResidual { residual: f64, limit: f64 },

    #[error("quantile level {0} is outside [0, 1]")]
    QuantileLevel(f64),

    #[error("cdf tables cover different supports: offset {left_offset} width {left_width} vs offset {right_offset} width {right_width}")]
    SupportMismatch {
        left_offset: i64,
        left_width: usize,
        right_offset: i64,
        right_width: usize,
    },

    #[error("transform input is empty")]
    EmptyTransform,

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl GpbError {
    /// Stable identifier used in machine-readable CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            GpbError::Empty => "empty",
            GpbError::LengthMismatch { .. } => "length_mismatch",
            GpbError::ProbabilityOutOfRange { .. } => "probability_out_of_range",
            GpbError::InvertedPair { .. } => "inverted_pair",
            GpbError::NonPositiveWeight { .. } => "non_positive_weight",
            GpbError::Overflow => "overflow",
            GpbError::NotIntegral { .. } => "not_integral",
            GpbError::OracleCap { .. } => "oracle_cap",
            GpbError::ImaginaryResidual { .. } => "imaginary_residual",
            GpbError::QuantileLevel(_) => "quantile_level",
            GpbError::SupportMismatch { .. } => "support_mismatch",
            GpbError::EmptyTransform => "empty_transform",
            GpbError::Config(_) => "config",
        }
    }
}
