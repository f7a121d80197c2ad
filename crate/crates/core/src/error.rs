use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("length {length} is not an integer multiple of the grid spacing {dx}")]
    IncommensurateLength { length: f64, dx: f64 },

    #[error("incommensurate binning: {0}")]
    IncommensurateBinning(String),

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not a projector (residual {residual:.3e})")]
    NotProjector { residual: f64 },

    #[error("grid of {n} points exceeds the dense-oracle cap of {cap}")]
    OracleTooLarge { n: usize, cap: usize },

    #[error("branches overlap ({overlap:.3e}); disjoint branches required")]
    BranchesOverlap { overlap: f64 },

    #[error("pre- and post-selected states are orthogonal (overlap {overlap:.3e})")]
    VanishingOverlap { overlap: f64 },

    #[error("grid point x = {x} lies on a sign-flip node of the square wave")]
    NodeOnGrid { x: f64 },

    #[error("potential has no analytic derivative; classical dynamics unavailable")]
    NoForce,

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

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

    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::GridMismatch => "grid_mismatch",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ZeroNorm => "zero_norm",
            Error::IncommensurateLength { .. } => "incommensurate_length",
            Error::IncommensurateBinning(_) => "incommensurate_binning",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotProjector { .. } => "not_projector",
            Error::OracleTooLarge { .. } => "oracle_too_large",
            Error::BranchesOverlap { .. } => "branches_overlap",
            Error::VanishingOverlap { .. } => "vanishing_overlap",
            Error::NodeOnGrid { .. } => "node_on_grid",
            Error::NoForce => "no_force",
            Error::InsufficientSampling(_) => "insufficient_sampling",
            Error::InvalidExperiment(_) => "invalid_experiment",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
