use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // data ingestion
    #[error("frequency grid is not strictly increasing at index {index}")]
    NonMonotoneGrid { index: usize },
    #[error("frequency {omega} rad/s is outside the admissible range (Nyquist {nyquist})")]
    AboveNyquist { omega: f64, nyquist: f64 },
    #[error("missing sample for omega={omega}, p={p}")]
    MissingCell { omega: f64, p: f64 },
    #[error("non-finite sample at row {row}")]
    NanSample { row: usize },
    #[error("sample arrays have shape {got:?}, expected {expected:?}")]
    ShapeMismatch {
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("factors vanish simultaneously at omega={omega}, p={p}")]
    NotCoprime { omega: f64, p: f64 },
    #[error("invalid operating points: {0}")]
    InvalidPoints(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("weight for channel {channel} is invalid: {reason}")]
    InvalidWeight { channel: String, reason: String },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    // state-space machinery
    #[error("inconsistent state-space dimensions: {0}")]
    Dimension(String),
    #[error("matrix exponential produced non-finite entries")]
    NonFiniteExponential,
    #[error("resolvent is singular at lambda = {re}{im:+}i")]
    SingularResolvent { re: f64, im: f64 },
    #[error("pair (A, B) is not stabilizable")]
    NotStabilizable,
    #[error("pair (C, A) is not detectable")]
    NotDetectable,
    #[error("Bezout residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    // scheduling / parameterization
    #[error("scheduling value {p} outside range [{lo}, {hi}]")]
    OutOfRange { p: f64, lo: f64, hi: f64 },
    #[error("invalid controller parameterization: {0}")]
    InvalidParameterization(String),
    #[error("basis is not supported by this realization: {0}")]
    UnsupportedBasis(String),

    // conic solver
    #[error("ill-formed conic program: {0}")]
    IllFormedProgram(String),
    #[error("numerical breakdown in interior-point iteration {iteration}: {reason}")]
    NumericalBreakdown { iteration: usize, reason: String },

    // synthesis
    #[error("problem is infeasible at the upper gamma bound {gamma} (best slack {slack:e})")]
    InfeasibleAtUpperBound { gamma: f64, slack: f64 },
    #[error("invalid synthesis problem: {0}")]
    InvalidProblem(String),

    // analysis
    #[error("curve passes within {distance:e} of the origin at sample {index}")]
    NearOrigin { index: usize, distance: f64 },
    #[error("phase increment {increment:.3} rad at sample {index} exceeds the coarseness bound")]
    GridTooCoarse { index: usize, increment: f64 },

    // simulation
    #[error("simulation diverged at t = {time} s (|y| = {magnitude:e})")]
    Divergence { time: f64, magnitude: f64 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
