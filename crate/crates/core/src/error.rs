use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(ValidationReport),

    #[error("failed to parse configuration: {0}")]
    ConfigParse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("pulse profile and basis are defined on different grids")]
    GridMismatch,

    /// A retained eigenstate does not decay before the grid edge.
    #[error(
        "eigenstate {state} does not decay at the grid boundary \
         (|psi(+-L)| / max|psi| = {ratio:.3e}); enlarge the grid or reduce basis_size"
    )]
    BoundaryDecay { state: usize, ratio: f64 },

    /// The recoil kick leaks population past the retained levels.
    #[error(
        "feeding matrix trace deviates from 1 by {deviation:.3e} (limit 1e-4); \
         basis_size is too small for this Lamb-Dicke parameter"
    )]
    Truncation { deviation: f64 },

    #[error("eigensolver did not converge: {0}")]
    NonConvergent(String),

    /// The doughnut ring lies outside the grid, so the profile maximum is not sampled.
    #[error("doughnut ring at |x| = {radius} lies outside the grid half-width {half_width}")]
    EmptyProfile { radius: f64, half_width: f64 },

    #[error("excitation probability {0} lies outside [0, 1]; cosine operator is corrupted")]
    ExcitationOutOfRange(f64),

    #[error("state vector is not normalized (norm {0})")]
    Unnormalized(f64),
}

impl Error {
    /// True for failures of the numerical guards (truncation, boundary decay,
    /// convergence), as opposed to malformed input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::BoundaryDecay { .. }
                | Error::Truncation { .. }
                | Error::NonConvergent(_)
                | Error::EmptyProfile { .. }
                | Error::ExcitationOutOfRange(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::ConfigParse(_) => "config_parse",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::GridMismatch => "grid_mismatch",
            Error::BoundaryDecay { .. } => "boundary_decay",
            Error::Truncation { .. } => "truncation",
            Error::NonConvergent(_) => "non_convergent",
            Error::EmptyProfile { .. } => "empty_profile",
            Error::ExcitationOutOfRange(_) => "excitation_out_of_range",
            Error::Unnormalized(_) => "unnormalized",
        }
    }
}
