use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("vector is not unit norm (squared norm {norm_sq})")]
    NotUnit { norm_sq: f64 },

    #[error("zero desired channel")]
    ZeroChannel,

    #[error("empty user group")]
    EmptyGroup,

    #[error("two-stage split {n1}x{n2} does not factor a group of {group} users")]
    Factorization { n1: usize, n2: usize, group: usize },

    #[error("{users:.3e} users required at {snr_db} dB exceeds the cap of {cap}")]
    CapExceeded { snr_db: f64, users: f64, cap: usize },

    #[error("slope window of {window} points does not fit a curve of {len} points")]
    Window { window: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
