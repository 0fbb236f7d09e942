use thiserror::Error;

/// Errors produced anywhere in the capacity and rate analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix needs at least 2 rows and 2 columns, got {rows}x{cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("entry ({row}, {col}) is negative: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("output column {0} is zero in every row")]
    UselessOutputColumn(usize),
    #[error("channel matrix is rank deficient: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },
    #[error("not a probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("output symbol {0} has zero mass but positive transition probability")]
    ZeroOutputMass(usize),
    #[error("initial distribution has a zero at index {0}")]
    NotInterior(usize),
    #[error("logarithm of nonpositive argument at index {0}")]
    DomainError(usize),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("support oscillates between {first:?} and {second:?}")]
    AmbiguousSupport {
        first: Vec<usize>,
        second: Vec<usize>,
    },
    #[error("fewer than two type-I indices ({0})")]
    EmptyTypeI(usize),
    #[error("index {index} violates the optimality inequality by {excess:e}")]
    KktViolation { index: usize, excess: f64 },
    #[error("largest eigenvalue {theta} has multiplicity {multiplicity}")]
    DegenerateSpectrum { theta: f64, multiplicity: usize },
    #[error("wrong shape: {0}")]
    WrongShape(String),
    #[error("index classification is not one type-II index beside two type-I indices")]
    WrongCase,
    #[error("curvature coefficient is not positive: {0}")]
    NonpositiveRho(f64),
    #[error("iterate {0} coincides with the fixed point")]
    ExactConvergence(usize),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("grid scan too large: m = {m}, resolution = {resolution}")]
    TooLarge { m: usize, resolution: usize },
    #[error("characteristic polynomial has complex roots (discriminant {0:e})")]
    ComplexSpectrum(f64),
    #[error("finite-difference step {0} outside [1e-8, 1e-3]")]
    BadStep(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
