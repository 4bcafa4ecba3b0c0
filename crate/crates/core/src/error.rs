use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Variants carry the measured
/// defect or the offending size so callers can print something useful.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^dagger| = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1 (defect {defect:e})")]
    TraceNotOne { trace: f64, defect: f64 },

    #[error("matrix is not square or has non-finite entries: {0}")]
    MalformedMatrix(String),

    #[error("dimension {requested} exceeds cap {cap}")]
    DimensionOverflow { requested: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("support of {size} entries exceeds limit {limit}")]
    SupportTooLarge { size: usize, limit: usize },

    #[error("support size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("epsilon {eps} outside admissible range {range}")]
    EpsOutOfRange { eps: f64, range: String },

    #[error("minimisation grid is empty")]
    EmptyGrid,

    #[error("bit strings differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("enumeration of {size} branches exceeds limit {limit}")]
    EnumerationTooLarge { size: u128, limit: u128 },

    #[error("requested key of {key_bits} bits but only {available} key positions remain after sifting")]
    KeyLongerThanSifted { key_bits: usize, available: usize },

    #[error("hash output of {output} bits is longer than its {input}-bit input")]
    OutputTooLong { output: usize, input: usize },

    #[error("Toeplitz seed has {found} bits, {needed} needed")]
    SeedTooShort { needed: usize, found: usize },

    #[error("constellation of {size} signals exceeds limit {limit}")]
    ConstellationTooLarge { size: usize, limit: usize },

    #[error("constellation of {0} signals cannot be split into key-selected pairs")]
    UnpairedConstellation(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("linear program failed: {0}")]
    Solver(String),
}

impl Error {
    /// True for errors caused by a size cap rather than malformed input.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            Error::DimensionOverflow { .. }
                | Error::SupportTooLarge { .. }
                | Error::EnumerationTooLarge { .. }
                | Error::ConstellationTooLarge { .. }
        )
    }
}
