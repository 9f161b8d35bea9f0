use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the inversion toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Simulator, data, and configuration disagree (well count, horizon, dimensions).
    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("step {step} out of range 1..={len}")]
    StepOutOfRange { step: usize, len: usize },

    #[error("component {component} out of range for parameter dimension {dim}")]
    ComponentOutOfRange { component: usize, dim: usize },

    #[error("value {value} outside the prior support of component {component}")]
    OutOfSupport { component: usize, value: f64 },

    #[error("kernel distance must be finite and nonnegative, got {0}")]
    InvalidDistance(f64),

    #[error("kernel bandwidth must be finite and nonnegative, got {0}")]
    InvalidBandwidth(f64),

    /// The trace has been edited at the given step and its suffix not yet recomputed.
    #[error("trace is stale from step {0}; recompute the suffix before scoring")]
    StaleTrace(usize),

    #[error("trace incoherent: {0}")]
    Incoherent(String),

    /// Every particle weight vanished at one step of a conditional SMC sweep.
    #[error("degenerate sweep: all particle log-weights are -inf at step {step}")]
    DegenerateSweep { step: usize },

    #[error("degenerate weights: no finite log-weight in the population")]
    DegenerateWeights,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration refused: {tuples} parameter tuples exceeds the limit of {limit}")]
    EnumerationTooLarge { tuples: u128, limit: u128 },

    #[error("malformed data file: {0}")]
    DataFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for the weight-collapse failures that map to a dedicated exit code.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSweep { .. } | Error::DegenerateWeights
        )
    }
}
