use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} is unusable: need a multiple of 4 that is at least 4")]
    InvalidGridSize(usize),
    #[error("functions live on grids of different sizes ({0} vs {1})")]
    GridMismatch(usize, usize),
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("level {level} is outside 0..={depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("{n_points}^{depth} entries exceed the memory guard of 2^24")]
    TooLarge { n_points: usize, depth: usize },
    #[error("phase is not unimodular (|w| = {modulus})")]
    NotUnimodular { modulus: f64 },
    #[error("phase sequence has depth {phases}, martingale has depth {field}")]
    DepthMismatch { phases: usize, field: usize },
    #[error("function is not real-valued")]
    NotReal,
    #[error("function does not have vanishing mean")]
    NonZeroMean,
    #[error("function carries energy in the Nyquist bucket")]
    NyquistEnergy,
    #[error("function is not in the Hardy space")]
    NotHardy,
    #[error("martingale is not a Hardy martingale")]
    NotHardyMartingale,
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(&'static str),
}
