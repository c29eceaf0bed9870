use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("mode index {index} outside 1..={max}")]
    ModeIndexOutOfRange { index: usize, max: usize },

    #[error("field and geometry disagree: {0}")]
    IncompatibleGrid(String),

    #[error("negative propagation distance {0}")]
    NegativeDistance(f64),

    #[error("invalid beam: {0}")]
    InvalidBeam(String),

    #[error("invalid input configuration: {0}")]
    InvalidInput(String),

    #[error("expected {expected} phases, got {got}")]
    PhaseCount { expected: usize, got: usize },

    #[error("unsupported matrix size {0} (permanents are implemented for 1..=3)")]
    UnsupportedSize(usize),

    #[error("unsupported correlation order {0}")]
    UnsupportedOrder(usize),

    #[error("correlation order {order} does not match beam count {beams}")]
    OrderMismatch { order: usize, beams: usize },

    #[error("found {found} resolvable lobes, need {needed}")]
    UnresolvedLobes { found: usize, needed: usize },

    #[error("every photon pair is bunched; the anti-bunched mass is zero")]
    AllBunched,

    #[error("transfer matrix is not unitary: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("mode truncation discards {fraction:.3e} of the input norm")]
    Truncation { fraction: f64 },

    #[error("scan range must cover at least one revival distance")]
    ScanRange,
}

pub type Result<T> = std::result::Result<T, Error>;
