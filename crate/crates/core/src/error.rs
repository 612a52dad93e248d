use thiserror::Error;

/// Errors raised across the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("matrix is singular or numerically rank deficient: {0}")]
    Singular(String),

    #[error("zero-word infeasible for this matrix: {0}")]
    ZeroWordInfeasible(String),

    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,

    #[error("channel bin at subcarrier {subcarrier} is too weak (|H| = {magnitude:e})")]
    WeakChannelBin { subcarrier: usize, magnitude: f64 },

    #[error("angle undefined: correlation magnitude {0:e} is below threshold")]
    UndefinedAngle(f64),

    #[error("search space of {0} candidates exceeds the enumeration guard")]
    SearchSpaceTooLarge(u128),

    #[error("non-finite cost encountered at iteration {0}")]
    NonFiniteCost(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("archive format error: {0}")]
    Archive(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    ConfigParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
