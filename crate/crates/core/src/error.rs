use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid size must be at least 1")]
    EmptyChimera,
    #[error("spin label {label} out of range (graph has {limit} sites)")]
    LabelOutOfRange { label: usize, limit: usize },
    #[error("spin {spin} out of range ({count} active spins)")]
    SpinOutOfRange { spin: usize, count: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("energy scale must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("entries must be exactly +1 or -1")]
    NotNominal,
    #[error("expected a single full unit cell (8 spins, 16 couplers)")]
    NotUnitCell,
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("sector {sector} out of range 0..={max}")]
    SectorOutOfRange { sector: usize, max: usize },
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("{spins} spins exceed the exhaustive enumeration cap of {cap}")]
    TooManySpins { spins: usize, cap: usize },
    #[error("bucket table of 2^{bits} entries exceeds the cap of 2^{cap}")]
    TableTooLarge { bits: usize, cap: usize },
    #[error("invalid elimination order: {0}")]
    InvalidOrder(String),
    #[error("pair ({0}, {1}) is not a graph edge")]
    NotAnEdge(usize, usize),
    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("missing sector {0}")]
    MissingSector(usize),
    #[error("grid does not contain the diagonal point T = {0}")]
    MissingDiagonal(f64),
}

impl Error {
    /// Capacity errors (instance too large for the chosen engine) are reported
    /// separately from bad input by the command line.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::TooManySpins { .. } | Error::TableTooLarge { .. })
    }
}
