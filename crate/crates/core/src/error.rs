use thiserror::Error;

/// Errors raised by the model, simulation, estimation and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// A stationary moment was requested whose existence condition fails.
    #[error("moment of order {order} diverges: Psi({order}) = {psi} is not negative")]
    MomentDivergent { order: u32, psi: f64 },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("nonstationary model: {0}")]
    NonstationaryModel(String),

    /// The moment summary lies outside the image of the forward moment map.
    #[error("infeasible moments: {0}")]
    InfeasibleMoments(String),

    #[error("root selection failed: residuals {residuals:?}")]
    RootSelectionFailure { residuals: [f64; 2] },

    #[error("autocorrelation fit failed: {0}")]
    AcfFitFailure(String),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input row {row}: {message}")]
    Ingest { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
