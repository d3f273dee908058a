use thiserror::Error;

/// Errors produced by the library. The CLI maps [`Error::Usage`] to exit
/// status 2 and every other variant to exit status 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate edge: endpoints coincide")]
    DegenerateEdge,

    #[error("arc-length parameter {s} outside [0, {length}]")]
    OutOfRange { s: f64, length: f64 },

    #[error("quadrature did not converge: last estimate {last}, previous {previous}")]
    Accuracy { last: f64, previous: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value at cell {cell}: {what}")]
    NonFinite { cell: usize, what: String },

    #[error("level set is not increasing away from the curve at cell {cell} (dphi/drho = {value})")]
    Monotonicity { cell: usize, value: f64 },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("curve file: {0}")]
    CurveFile(String),

    #[error("usage: {0}")]
    Usage(String),

    /// Help or version text requested on the command line.
    #[error("{0}")]
    Help(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for this error: 2 for bad input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Help(_) => 0,
            Error::Usage(_) | Error::CurveFile(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
