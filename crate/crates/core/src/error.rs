use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("`{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("refractive index must be >= 1, got {0}")]
    InvalidIndex(f64),
    #[error("an array needs at least one guide")]
    NoGuides,
    #[error("guide {0} does not exist in this array")]
    NoSuchGuide(usize),
    #[error("dx = {dx} nm under-resolves the {slot_width} nm slot (need dx <= w_s / 4)")]
    UnderResolvedSlot { dx: f64, slot_width: f64 },
    #[error("dy = {dy} nm under-resolves the {height} nm rod height (need dy <= h / 4)")]
    UnderResolvedHeight { dy: f64, height: f64 },
    #[error("padding {padding} nm is below the {min} nm minimum")]
    PaddingTooSmall { padding: f64, min: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solve request: {0}")]
    InvalidRequest(String),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error(
        "eigensolver did not converge after {restarts} restarts ({krylov_dim} Krylov vectors): \
         {converged}/{wanted} Ritz pairs below tolerance, worst residual {worst_residual:.3e}"
    )]
    NotConverged {
        restarts: usize,
        krylov_dim: usize,
        converged: usize,
        wanted: usize,
        worst_residual: f64,
    },
    #[error("point ({x}, {y}) nm lies outside the mode grid")]
    OutOfDomain { x: f64, y: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmtError {
    #[error("unable to support {needed} modes: only {found} guided quasi-TE supermodes found")]
    InsufficientModes { needed: usize, found: usize },
    #[error("amplitude matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index maps do not share a grid")]
    GridMismatch,
    #[error("malformed matrix input: {0}")]
    Parse(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("`{name}` out of range: {value} ({reason})")]
    OutOfRange { name: &'static str, value: f64, reason: &'static str },
    #[error("adjusted cavity length is zero; the hopping rate diverges")]
    ZeroLength,
    #[error("mode field is identically zero")]
    ZeroField,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DbrError {
    #[error("number of periods must be a positive multiple of 0.5, got {0}")]
    InvalidPeriods(f64),
    #[error("duty cycle must lie in (0, 1), got {0}")]
    InvalidDuty(f64),
    #[error("`{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("need at least {needed} points with positive rates, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("fit is not decaying (gamma = {0}); separation cannot be inverted")]
    NotDecaying(f64),
    #[error("target rate must be positive, got {0}")]
    InvalidTarget(f64),
    #[error("target {target:.3e} rad/s exceeds the largest rate {bound:.3e} rad/s the grating model supports")]
    TargetTooLarge { target: f64, bound: f64 },
    #[error("target {target:.3e} rad/s not reached within {max_periods} periods")]
    TargetTooSmall { target: f64, max_periods: f64 },
    #[error(transparent)]
    Cmt(#[from] CmtError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Dbr(#[from] DbrError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
