use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is not connected: no path from `{from}` to `{to}`")]
    Disconnected { from: String, to: String },
    #[error("missing values for edges: {}", .0.join(", "))]
    MissingEdges(Vec<String>),
    #[error("walk is not closed: {0}")]
    OpenWalk(String),
    #[error("invalid surface data: {0}")]
    InvalidSurface(String),
    #[error("invalid principal parts: {0}")]
    InvalidPoles(String),
    #[error("singular point {z} ({what})")]
    Singular { what: String, z: Complex64 },
    #[error("point outside chart domain: {0}")]
    Domain(String),
    #[error("edge `{0}` carries a node (t = 0)")]
    DegenerateNode(String),
    #[error("chart inversion did not converge (last residual {residual:e})")]
    InversionFailed { residual: f64 },
    #[error("non-finite integrand sample at angle index {index}")]
    NonFinite { index: usize },
    #[error("enclosure violated: {0}")]
    Enclosure(String),
    #[error(
        "compatibility condition violated at vertex `{vertex}` (|residual| = {residual:e})"
    )]
    Incompatible { vertex: String, residual: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(
        "fixed-point map is not contracting (ratio {factor:.3e} >= 1 for 3 consecutive iterations \
         at iteration {iteration}); use smaller t or larger epsilon"
    )]
    NonContraction { factor: f64, iteration: usize },
    #[error("no convergence after {iterations} iterations (last update norm {update:e})")]
    NoConvergence { iterations: usize, update: f64 },
    #[error("singular linear system (smallest singular value {0:e}); t is probably too large")]
    SingularSystem(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonContraction { .. } | Error::NoConvergence { .. } | Error::SingularSystem(_) => 3,
            Error::Schema(_) | Error::Io(_) => 4,
            _ => 2,
        }
    }
}
