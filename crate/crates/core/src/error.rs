use thiserror::Error;

/// Errors raised by model validation, the grouping solver, the coding layer,
/// the retrieval protocol, and the verification oracles.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("entry at row {row}, column {col} is {value}; communication matrices are binary")]
    NonBinaryEntry { row: usize, col: usize, value: u64 },

    #[error("column {col} has weight 1; security against single databases is implicit and must not be encoded as a column")]
    SingletonLinkColumn { col: usize },

    #[error("column {col} is all zeros")]
    EmptyColumn { col: usize },

    #[error("database index {db} outside 1..={n}")]
    DatabaseOutOfRange { db: usize, n: usize },

    #[error("system needs at least 2 databases, got {n}")]
    TooFewDatabases { n: usize },

    #[error("invalid system parameters: {0}")]
    BadParams(String),

    #[error("no valid grouping with at least one group exists")]
    Infeasible,

    #[error("best grouping has g = {g} groups but the scheme requires g > T = {t}")]
    GNotGreaterThanT { g: usize, t: usize },

    #[error("solver exceeded the node budget of {budget}")]
    NodeBudgetExceeded { budget: u64 },

    #[error("group {group:?} cannot be trimmed to {target} members without being covered by a link")]
    TrimViolatesSecurity { group: Vec<usize>, target: usize },

    #[error("trim requires share count d >= 2 and every group size >= d (d = {d}, offending group size {size})")]
    BadTrimShares { d: usize, size: usize },

    #[error("field F_{q} too small: needs more than {needed} distinct nonzero evaluation points")]
    FieldTooSmall { q: u64, needed: usize },

    #[error("division by zero in F_{q}")]
    DivideByZero { q: u64 },

    #[error("matrix dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("group {group} has {size} members; the protocol needs at least 2")]
    GroupTooSmall { group: usize, size: usize },

    #[error("subpacket length {l} does not match g^K = {expected}")]
    SubpacketMismatch { l: usize, expected: usize },

    #[error("subpacketization g^K = {g}^{k} exceeds the supported size")]
    SubpacketTooLarge { g: usize, k: usize },

    #[error("collusion threshold T = {t} outside the supported range for g = {g} groups")]
    TRangeViolation { t: usize, g: usize },

    #[error("database {db} belongs to no group and must not be queried")]
    UngroupedDatabaseQueried { db: usize },

    #[error("answers are inconsistent: {0}")]
    InconsistentAnswers(String),

    #[error("noise cancellation needs gcd(m - 1, q) = 1; group of {m} members over F_{q}")]
    NoiseCancellationUnsolvable { m: usize, q: u64 },

    #[error("enumeration needs {needed} states, above the budget of {budget}")]
    StateSpaceTooLarge { needed: u128, budget: u128 },

    #[error("beneficial range is empty: lo = {lo} > hi = {hi}")]
    EmptyRange { lo: i64, hi: i64 },

    #[error("converse bound needs X + T <= N (X = {x}, T = {t}, N = {n})")]
    XTTooLarge { x: usize, t: usize, n: usize },

    #[error("{0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
