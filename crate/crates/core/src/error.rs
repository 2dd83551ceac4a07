use thiserror::Error;

/// Errors produced by model construction, table precomputation and runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid qubit count n={0}: must satisfy 1 <= n <= {max}", max = crate::model::MAX_QUBITS)]
    BadQubitCount(usize),

    #[error("hamming weight w={w} out of range 0..={n}")]
    BadHammingWeight { w: usize, n: usize },

    #[error("p-spin exponent must be >= 1, got {0}")]
    BadExponent(u32),

    #[error("p-spin problem requires the exponent p")]
    MissingExponent,

    #[error("schedule parameter s={0} outside [0, 1]")]
    SOutOfRange(f64),

    #[error("schedule file {path}: {reason}")]
    ScheduleFormat { path: String, reason: String },

    #[error("schedule file {path}, row {row}: {reason}")]
    ScheduleRow {
        path: String,
        row: usize,
        reason: String,
    },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("gap function is not unimodal on the bracket; local minima near s = {0:?}")]
    NotUnimodal(Vec<f64>),

    #[error("gap minimum sits at the bracket endpoint s={0}; no interior minimum")]
    EndpointMinimum(f64),

    #[error("principal-value quadrature did not converge: estimated error {err:.3e} > tol {tol:.3e}")]
    QuadratureError { err: f64, tol: f64 },

    #[error("bath parameter {name} must be positive, got {value}")]
    BadBathParam { name: &'static str, value: f64 },

    #[error("non-finite state encountered at t={t} ns (bad dt or corrupted tables)")]
    NonFiniteState { t: f64 },

    #[error("all jump weights vanished while the norm was decaying")]
    NoJumpChannel,

    #[error("jump produced a zero-norm state")]
    ZeroNormJump,

    #[error("trajectory records have mismatched shapes")]
    RecordShape,

    #[error("need at least {min} trajectories, got {got}")]
    TooFewTrajectories { min: usize, got: usize },

    #[error("saturation fit needs at least {min} points with l_p >= l0, got {got}")]
    TooFewFitPoints { min: usize, got: usize },

    #[error("saturation fit did not converge after {0} iterations")]
    FitDiverged(usize),

    #[error("density-matrix oracle guard: n={0} exceeds {max}", max = crate::oracle::ORACLE_MAX_QUBITS)]
    OracleGuard(usize),

    #[error("oracle positivity violated: min eigenvalue {0:.3e}")]
    PositivityLost(f64),

    #[error("config: {0}")]
    Config(String),

    #[error("time t={t} outside protocol range [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("toml parse error: {0}")]
    Toml(String),

    #[error("json error: {0}")]
    Json(String),
}
