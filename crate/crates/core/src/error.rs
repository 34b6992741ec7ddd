use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("points must have at least one coordinate")]
    ZeroDimension,

    #[error("box extent {0} is invalid, extents must be at least 1")]
    InvalidExtent(i64),

    #[error("torus dimension {0} is invalid, dimensions must be at least 1")]
    InvalidTorusDim(i64),

    #[error("cyclic modulus {0} is invalid, moduli must be at least 1")]
    InvalidModulus(i64),

    #[error("group element {residues:?} does not belong to a group with moduli {moduli:?}")]
    ElementMismatch {
        residues: Vec<u64>,
        moduli: Vec<u64>,
    },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is singular, the quotient group is infinite")]
    SingularMatrix,

    #[error("group of order {actual} given, order {expected} required")]
    GroupOrderMismatch { expected: u64, actual: u64 },

    #[error("no candidate generator assignment is a bijection for {family} ({params})")]
    Unsupported {
        family: &'static str,
        params: String,
    },

    #[error("invalid construction: {0}")]
    InvalidConstruction(String),

    #[error("homomorphism is not a bijection on the tile: {0}")]
    NotBijective(String),

    #[error("torus dimension {dim} on axis {axis} is not annihilated by the homomorphism")]
    KernelViolation { axis: usize, dim: i64 },

    #[error("group element {0:?} has no preimage in the tile")]
    MissingPreimage(Vec<u64>),

    #[error("torus has {volume} vertices, above the configured limit of {limit}")]
    TorusTooLarge { volume: u128, limit: u64 },

    #[error("instance does not pass verification")]
    NotVerified,

    #[error("unsupported render request: {0}")]
    UnsupportedRender(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, PddsError>;
