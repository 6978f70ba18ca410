use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state norm {0:e} below annihilation threshold")]
    NormUnderflow(f64),

    #[error("invalid interval: end {end} precedes start {start}")]
    InvalidInterval { start: f64, end: f64 },

    #[error("jump order {0} not supported (expected 1, 2 or 3)")]
    InvalidOrder(usize),

    #[error("degenerate normalization: jump mass {0:e} with p0 < 1")]
    DegenerateNormalization(f64),

    #[error("all jump channels annihilate the state")]
    AllAnnihilated,

    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("Fock truncation too small: coherent tail mass {0:e}")]
    TruncationTooSmall(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the benchmark binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidOrder(_) | Error::TruncationTooSmall(_) => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}
