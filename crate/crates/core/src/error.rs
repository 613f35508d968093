use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("undefined gcd: both polynomials are zero")]
    UndefinedGcd,
    #[error("polynomial division by zero")]
    DivisionByZero,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("H_X row {x_row} and H_Z row {z_row} are not orthogonal")]
    NotOrthogonal { x_row: usize, z_row: usize },
    #[error("code encodes no logical qubits")]
    NoLogicalQubits,
    #[error("enumeration infeasible for n = {n} (limit is 20)")]
    EnumerationInfeasible { n: usize },
    #[error("inconsistent syndrome subgraph: {0}")]
    InconsistentSubgraph(String),
    #[error("erasure pattern has length {got}, subgraph has {expected} qubits")]
    PatternLength { expected: usize, got: usize },
    #[error("cannot fit zero rate")]
    CannotFitZeroRate,
    #[error("need at least 2 points to fit, got {0}")]
    TooFewPoints(usize),
    #[error("repeater spacing {l0_km} km outside grid range [{min_km}, {max_km}] km")]
    OutsideGrid { l0_km: f64, min_km: f64, max_km: f64 },
    #[error("grid range insufficient")]
    GridRangeInsufficient,
    #[error("at L0 = {l0_km} km: {source}")]
    AtSpacing {
        l0_km: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
