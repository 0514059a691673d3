use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("invalid chart index {0}")]
    InvalidChart(usize),
    #[error("declared node fails its check: {0}")]
    NodeCheckFailed(String),
    #[error("undeclared singularity near {0}")]
    UndeclaredSingularity(String),
    #[error("infinity multiplicities {found:?}, expected {expected:?}")]
    MultiplicityMismatch { found: Vec<usize>, expected: Vec<usize> },
    #[error("sheet continuation is ambiguous at base point {0}")]
    SheetContinuationAmbiguity(String),
    #[error("fiber root residual {residual:e} too large at base point {at}")]
    ResidualRootError { residual: f64, at: String },
    #[error("homogeneity mismatch: {0}")]
    HomogeneityMismatch(String),
    #[error("target projects within the branch exclusion radius: {0}")]
    TargetOnBranchLocus(String),
    #[error("no calibration for degree {degree}, twist {ell}")]
    CalibrationMissing { degree: u32, ell: i32 },
    #[error("calibration inconsistent: cross-validation residual {0:e}")]
    CalibrationInconsistent(f64),
    #[error("form is not dbar-closed (residual {0:e})")]
    NotClosed(f64),
    #[error("Gram matrix ill-conditioned (condition {0:e})")]
    GramIllConditioned(f64),
    #[error("path passes through an exclusion zone: {0}")]
    PathThroughExclusion(String),
    #[error("cocycle relation violated (residual {0:e})")]
    CocycleViolation(f64),
    #[error("overlap difference is not holomorphic (residual {0:e})")]
    OverlapNotHolomorphic(f64),
    #[error("homogeneity {ell} too low for degree {degree}")]
    HomogeneityTooLow { ell: i32, degree: u32 },
    #[error("extension near infinity is unbounded (ratio {0:e})")]
    ExtensionUnbounded(f64),
    #[error("support reaches an infinity point")]
    SupportTouchesInfinity,
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
