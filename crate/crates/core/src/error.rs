use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin count {n} outside supported range 1..={max}")]
    SpinCount { n: usize, max: usize },
    #[error("spin index {spin} out of range for {n} spins (indices are 1-based)")]
    SpinIndex { spin: usize, n: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: |M - M^†|_F = {error:e} (|M|_F = {scale:e})")]
    NotHermitian { error: f64, scale: f64 },
    #[error("matrix is not unitary: |U^†U - I|_F = {error:e}")]
    NotUnitary { error: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid spin system: {0}")]
    InvalidSystem(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("empty or invalid duration range [{lo:e}, {hi:e}]")]
    EmptyRange { lo: f64, hi: f64 },
    #[error("no pi pulse reaching fidelity {threshold} below {t_max:e} s")]
    NoAdequatePulse { threshold: f64, t_max: f64 },
    #[error("invalid target spin set: {0}")]
    InvalidTargetSet(String),
    #[error("spins {i} and {j} have zero coupling")]
    ZeroCoupling { i: usize, j: usize },
    #[error("negative coupling J{i}{j} = {j_hz} Hz not supported here")]
    NegativeCoupling { i: usize, j: usize, j_hz: f64 },
    #[error("spin pairs overlap on spin {0}")]
    OverlappingPairs(usize),
    #[error("invalid rotation axis: {0}")]
    InvalidAxis(String),
    #[error("invalid angle {0}: {1}")]
    InvalidAngle(f64, String),
    #[error("invalid duration {0:e} s")]
    InvalidDuration(f64),
    #[error("sequence contains an ideal gate but ideal gates are not honored")]
    IdealGateNotHonored,
    #[error("{0}")]
    Invalid(String),
}
