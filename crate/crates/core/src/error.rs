//! Error type shared by the whole crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector is not normalized: norm {norm} differs from 1 beyond tolerance")]
    NotNormalized { norm: f64 },

    #[error("matrix is not Hermitian: max asymmetry {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("trace is {trace} instead of 1")]
    BadTrace { trace: f64 },

    #[error("operator is not unitary: max deviation from U\u{2020}U = I is {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("invalid factor index {index} for factorization with {count} factors")]
    InvalidFactorIndex { index: usize, count: usize },

    #[error("factor selection must be nonempty, strictly increasing and in range")]
    BadFactorSelection,

    #[error("empty factorization")]
    EmptyFactorization,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("site {site} out of range for lattice with {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("hypersurface slope violation between sites {site} and {next}: |{a} - {b}| > 1")]
    SlopeViolation {
        site: usize,
        next: usize,
        a: usize,
        b: usize,
    },

    #[error("cut value {value} at site {site} outside [0, {max}]")]
    CutOutOfRange { value: usize, site: usize, max: usize },

    #[error("foliation not pointwise monotone at step {step}, site {site}")]
    NonMonotoneFoliation { step: usize, site: usize },

    #[error("foliation must start at the all-zeros cut and end at the all-{top} cut")]
    BadFoliationEndpoints { top: usize },

    #[error("surface {surface} straddles event `{event}`")]
    StraddledEvent { surface: usize, event: String },

    #[error("event `{id}` invalid: {reason}")]
    BadEvent { id: String, reason: String },

    #[error("unknown payload `{name}` referenced by event `{event}`")]
    UnknownPayload { name: String, event: String },

    #[error("measurement events are not allowed in unitary mode (event `{event}`)")]
    MeasurementInUnitaryMode { event: String },

    #[error("fixed outcome {outcome} of measurement `{event}` has probability {probability:e}; branch annihilated")]
    BranchAnnihilated {
        event: String,
        outcome: usize,
        probability: f64,
    },

    #[error("base cut must lie at or below the target cut (violated at site {site})")]
    BaseCutAboveTarget { site: usize },

    #[error("regions overlap at site {site}")]
    OverlappingRegions { site: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("projector family invalid: {0}")]
    BadProjectorFamily(String),

    #[error("empty layer range")]
    EmptyRange,

    #[error("lattice is not periodic")]
    NotPeriodic,

    #[error("history lengths differ: {left} vs {right}")]
    HistoryLengthMismatch { left: usize, right: usize },
}
