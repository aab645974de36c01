use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ellipticity violated: need mu > 0 and lambda + 2 mu > 0 (got lambda = {lambda}, mu = {mu})")]
    Ellipticity { lambda: f64, mu: f64 },

    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector is not unit length (|v| = {norm})")]
    NotUnit { norm: f64 },

    #[error("direction outside the admissible cap: omega . (sign e1) = {dot} < -1/sqrt(2)")]
    OutsideCap { dot: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("band limit violated: {0}")]
    BandLimit(String),

    #[error("frequency {0:?} is not on the grid lattice")]
    OffLattice(Vec<f64>),

    #[error("time step {dt} exceeds the stability limit {limit}")]
    Unstable { dt: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("point outside the admissible set: {0}")]
    Domain(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
