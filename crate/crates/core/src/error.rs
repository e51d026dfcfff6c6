use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("depth {depth} exceeds the supported maximum {max}")]
    DepthTooLarge { depth: u32, max: u32 },
    #[error("expected {expected} weights for depth {depth}, got {got}")]
    WeightCount { depth: u32, expected: u64, got: u64 },
    #[error("weight at cell {index} is {value}; weights must be finite and non-negative")]
    InvalidWeight { index: u64, value: f64 },
    #[error("cell index {index} is out of range for depth {depth}")]
    IndexOutOfRange { index: u64, depth: u32 },
    #[error("cylinder cells must be strictly increasing (found {prev} then {next})")]
    UnsortedCells { prev: u64, next: u64 },
    #[error("measure has zero total mass")]
    ZeroMass,
    #[error("cannot refine from depth {from} down to depth {to}")]
    RefineDown { from: u32, to: u32 },
    #[error("pushforward exponent {l} exceeds measure depth {depth}")]
    PushforwardTooDeep { l: u32, depth: u32 },
    #[error("atom at {position} lies outside the support interval [{lo}, {hi}]")]
    AtomOutsideSupport { position: f64, lo: f64, hi: f64 },
    #[error("atom has invalid mass {mass}")]
    InvalidAtomMass { mass: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Riesz exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("LP solver failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Spec(#[from] crate::construction::SpecViolation),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
