use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Each variant maps to a stable
/// machine-readable code via [`Error::code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficients are not Hermitian symmetric (max defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("every sample is below the zero tolerance")]
    AllZero,

    #[error("Bernoulli kernel of order 1 evaluated at its jump point t = {t}")]
    JumpPoint { t: f64 },

    #[error("invalid weight function: {0}")]
    InvalidWeight(String),

    #[error("invalid spline: {0}")]
    InvalidSpline(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("targets are all equal ({value}); constraints on the coefficients are infeasible")]
    InfeasibleTargets { value: f64 },

    #[error("simplex did not terminate within {iterations} iterations")]
    DegenerateLp { iterations: usize },

    #[error("stationarity residual {residual:e} exceeds {limit:e}")]
    StationarityResidual { residual: f64, limit: f64 },

    #[error("multiplier lambda vanished ({lambda:e})")]
    NullMultiplier { lambda: f64 },

    #[error("{found} sign changes exceed the allowed {allowed}")]
    TooManySignChanges { found: usize, allowed: usize },

    #[error("signed interval length sum {residual:e} exceeds {limit:e}")]
    MeanZeroViolation { residual: f64, limit: f64 },

    #[error("knots are not strictly increasing within one period")]
    KnotOrderViolation,

    #[error("Gauss-Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("line search stalled at residual {residual:e}")]
    StalledLineSearch { residual: f64 },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "not_hermitian",
            Error::AllZero => "all_zero",
            Error::JumpPoint { .. } => "jump_point",
            Error::InvalidWeight(_) => "invalid_weight",
            Error::InvalidSpline(_) => "invalid_spline",
            Error::InvalidProblem(_) => "invalid_problem",
            Error::InfeasibleTargets { .. } => "infeasible_targets",
            Error::DegenerateLp { .. } => "degenerate_lp",
            Error::StationarityResidual { .. } => "stationarity_residual",
            Error::NullMultiplier { .. } => "null_multiplier",
            Error::TooManySignChanges { .. } => "too_many_sign_changes",
            Error::MeanZeroViolation { .. } => "mean_zero_violation",
            Error::KnotOrderViolation => "knot_order_violation",
            Error::NoConvergence { .. } => "no_convergence",
            Error::StalledLineSearch { .. } => "stalled_line_search",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
