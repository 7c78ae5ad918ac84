use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("embedding error: {0}")]
    Embedding(String),
    #[error("surface error: {0}")]
    Surface(String),
    #[error("{what} = {value} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("no dual path from face {0} to face {1}")]
    NoPath(usize, usize),
    #[error("antiparallel directions: the walk backtracks")]
    Backtrack,
    #[error("homology class of genus {class} used on a surface of genus {surface}")]
    GenusMismatch { class: usize, surface: usize },
    #[error("two passes share the edge slot {edge} at vertex {vertex}")]
    SlotClash { vertex: i64, edge: i64 },
    #[error("loops share an edge")]
    NotEdgeDisjoint,
    #[error("piece {0} is not part of the concurrency system")]
    UnknownPiece(usize),
    #[error("heaps belong to different concurrency systems")]
    SystemMismatch,
    #[error("vertex {0} has odd degree in the subgraph")]
    OddDegree(i64),
    #[error("edge subset is not an even subgraph")]
    NotEven,
    #[error("walk is not totally non-backtracking")]
    NotTnb,
    #[error("malformed pyramid: {0}")]
    MalformedPyramid(String),
    #[error("imaginary residue {residue:e} in the trace at length {length}")]
    Residue { length: usize, residue: f64 },
    #[error("turning sum is {0} periods away from an integer")]
    TurningResidue(f64),
    #[error("vertices {0} and {1} are adjacent; adjacent correlations are not supported")]
    AdjacentUnsupported(i64, i64),
    #[error("coupling on edge {0} must be positive")]
    NonpositiveCoupling(i64),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// Short stable tag used in machine-readable error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Schema(_) => "SchemaError",
            Error::Embedding(_) => "EmbeddingError",
            Error::Surface(_) => "SurfaceError",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::NoPath(..) => "NoPath",
            Error::Backtrack => "BacktrackError",
            Error::GenusMismatch { .. } => "GenusMismatch",
            Error::SlotClash { .. } => "SlotClash",
            Error::NotEdgeDisjoint => "NotEdgeDisjoint",
            Error::UnknownPiece(_) => "UnknownPiece",
            Error::SystemMismatch => "SystemMismatch",
            Error::OddDegree(_) => "OddDegree",
            Error::NotEven => "NotEven",
            Error::NotTnb => "NotTNB",
            Error::MalformedPyramid(_) => "MalformedPyramid",
            Error::Residue { .. } => "ResidueError",
            Error::TurningResidue(_) => "TurningResidue",
            Error::AdjacentUnsupported(..) => "AdjacentUnsupported",
            Error::NonpositiveCoupling(_) => "NonpositiveCoupling",
            Error::Precondition(_) => "PreconditionError",
        }
    }
}

pub(crate) fn cap(what: &'static str, value: usize, cap: usize) -> Result<()> {
    if value > cap {
        Err(Error::CapExceeded { what, value, cap })
    } else {
        Ok(())
    }
}
