use thiserror::Error;

/// Errors produced by model construction, filtering and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state space must have at least one hidden and one observed label")]
    EmptySpace,

    #[error("duplicate label {label:?} in {which} space")]
    DuplicateLabel { which: &'static str, label: String },

    #[error("state space too large: |E|*|F| = {size} exceeds bound {bound}")]
    SpaceTooLarge { size: usize, bound: usize },

    #[error("kernel dimension mismatch: expected {expected} rows/cols, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row {row} sums to {sum} (must be 1 within tolerance)")]
    NonStochasticRow { row: usize, sum: f64 },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("probability vector sums to {sum} (must be 1 within tolerance)")]
    NonNormalized { sum: f64 },

    #[error("supplied law is not stationary: ||pi P - pi||_1 = {residual}")]
    NotStationary { residual: f64 },

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("observation pair ({y0}, {y1}) has zero probability under the current filter state")]
    ImpossibleObservation { y0: String, y1: String },

    #[error("initial law puts zero mass on observation {y0}; conditional filter state undefined")]
    UndefinedConditional { y0: String },

    #[error("observation path has zero likelihood from initial hidden state {state}")]
    ZeroLikelihood { state: String },

    #[error(
        "initial law charges observation {y0} outside the support of the stationary observation marginal"
    )]
    SupportViolation { y0: String },

    #[error("model is not verified nondegenerate+ergodic ({reason}); pass the override to run anyway")]
    DegenerateModel { reason: String },

    #[error("epsilon {value} out of range (need 0 < epsilon < 1/2)")]
    EpsilonOutOfRange { value: f64 },

    #[error("observation density violates the normalization constraint at ({z}, {w}, {z1}): sum = {sum}")]
    ConstraintViolation { z: usize, w: usize, z1: usize, sum: f64 },

    #[error("observation weight g_Y violates its normalization at hidden state {z}: sum = {sum}")]
    NormalizationViolation { z: usize, sum: f64 },

    #[error("unknown label {label:?}")]
    UnknownLabel { label: String },

    #[error("model file: {0}")]
    ModelFile(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
