use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular or ill-conditioned ({0})")]
    SingularMatrix(String),
    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:.3e})")]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("training length {n_pilots} is shorter than the number of transmit antennas {n_t}")]
    InvalidLength { n_t: usize, n_pilots: usize },
    #[error("codebook with {0} bits exceeds the 20-bit limit")]
    CodebookTooLarge(u32),
    #[error("cannot quantize an all-zero channel")]
    ZeroChannel,
    #[error("beamformer is orthogonal to the channel range")]
    NullEffectiveChannel,
    #[error("QPSK needs an even number of bits, got {0}")]
    OddBitCount(usize),
    #[error("invalid codebook file: {0}")]
    CodebookFormat(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
