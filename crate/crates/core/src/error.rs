use thiserror::Error;

/// Errors raised by grid construction, solvers and audits.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid coefficient model: {0}")]
    InvalidModel(String),

    #[error("coefficient {value} at {at:?} outside [{lo}, {hi}]")]
    EllipticityViolated {
        value: f64,
        at: [f64; 3],
        lo: f64,
        hi: f64,
    },

    #[error("ball of radius {radius} at {center:?} leaves the domain")]
    BallOutsideDomain { center: [f64; 3], radius: f64 },

    #[error("radius {radius} too small for spacing {h}")]
    RadiusTooSmall { radius: f64, h: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("smoothing width {eps} below floor {floor}")]
    SmoothingBelowFloor { eps: f64, floor: f64 },

    #[error("picard iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    PicardDiverged {
        iterations: usize,
        last_update: f64,
        history: Vec<f64>,
    },

    #[error("linear solver breakdown: {0}")]
    LinearSolverBreakdown(String),

    #[error("continuation stage {stage} failed: {source}")]
    StageFailed {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("supports overlap: u+ * u- = {product:e} at {at:?}")]
    OverlappingSupports { product: f64, at: [f64; 3] },

    #[error("empty positivity set on the circle of radius {radius}")]
    EmptyCap { radius: f64 },

    #[error("operation requires dimension {required}, got {got}")]
    WrongDimension { required: usize, got: usize },

    #[error("point {at:?} is not on the free boundary")]
    NotOnBoundary { at: [f64; 3] },

    #[error("field vanishes identically")]
    ZeroField,

    #[error("matrices not proportional (residual norm {residual:e})")]
    ProportionalityFailure { residual: f64 },

    #[error("matrix model not symmetric")]
    AsymmetricMatrix,

    #[error("io error at {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
