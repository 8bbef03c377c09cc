use thiserror::Error;

pub type Result<T> = std::result::Result<T, QelError>;

#[derive(Debug, Error)]
pub enum QelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("axis {axis} out of range for {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("derivative order {0} unsupported (supported: 1, 2, 3)")]
    DerivativeOrder(usize),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("empty integration region")]
    EmptyRegion,
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("box touches grid boundary; face interpolation undefined")]
    BoxTouchesBoundary,
    #[error("invalid packet: {0}")]
    InvalidPacket(String),
    #[error("grid contains points inside the excluded ball r < {r_min} around the origin")]
    OriginInGrid { r_min: f64 },
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("too few snapshots: need at least {need}, have {have}")]
    TooFewSnapshots { need: usize, have: usize },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("peak search failed: {0}")]
    PeakSearch(String),
    #[error("invalid search setup: {0}")]
    InvalidSearch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
