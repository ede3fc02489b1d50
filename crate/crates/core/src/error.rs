use crate::scale::ConsistencyReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("scale needs at least two levels, got {0}")]
    TooFewLevels(usize),
    #[error("expected {expected} adjacent card counts, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("negative card count {value} at adjacency {index}")]
    NegativeCardCount { index: usize, value: i64 },
    #[error("duplicate level id {0:?}")]
    DuplicateLevel(String),
    #[error("criterion {criterion}: unknown level {level:?}")]
    UnknownLevel { criterion: String, level: String },
    #[error("reference levels must differ")]
    IdenticalReferences,
    #[error("low reference {low:?} must precede high reference {high:?} in preference order")]
    ReferenceOrder { low: String, high: String },
    #[error("reference low value must be below the high value")]
    ReferenceValues,
    #[error("criterion {criterion}: comparison table is inconsistent ({} violations)", report.violations.len() + report.conflicts.len())]
    InconsistentTable {
        criterion: String,
        report: ConsistencyReport,
    },
    #[error("criterion {criterion}: level {level:?} has no anchor")]
    MissingAnchor { criterion: String, level: String },
    #[error("criterion {0}: anchors must be strictly monotone in preference order")]
    AnchorsNotMonotone(String),
    #[error("criterion {criterion}: value {value} is below the domain minimum {min}")]
    BelowDomain {
        criterion: String,
        value: String,
        min: String,
    },
    #[error("criterion {0}: discrete value function needs a level, not a number")]
    NumericOnDiscrete(String),

    #[error("criterion {0} has no reference levels for weighting")]
    MissingReference(String),
    #[error("indifference value must lie strictly above the worst reference and not above the best reference")]
    IndifferenceOutOfRange,
    #[error("swing ranking is invalid: {0}")]
    InvalidRanking(String),
    #[error("closeness judgments are inconsistent")]
    InconsistentCloseness(ConsistencyReport),
    #[error("closeness card missing for criterion {0}")]
    MissingCloseness(String),
    #[error("z = {0} is not admissible for these closeness judgments")]
    InvalidZ(String),

    #[error("no value function for valued criterion {0}")]
    MissingValueFunction(String),
    #[error("no weight for valued criterion {0}")]
    MissingWeight(String),
    #[error("unknown criterion {0:?}")]
    UnknownCriterion(String),
    #[error("ship {ship}: {list} has no entry for {key:?}")]
    MissingListEntry {
        ship: String,
        list: &'static str,
        key: String,
    },
    #[error("ship {ship}: no performance on criterion {criterion}")]
    MissingPerformance { ship: String, criterion: String },
    #[error("invalid classification policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid scenario grid: {0}")]
    InvalidGrid(String),
    #[error("ship {0} missing from baseline")]
    MissingBaseline(String),

    #[error("line {line}, column {column:?}: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },
    #[error("document error: {0}")]
    Document(String),
    #[error("{list}: duplicate key {key:?}")]
    DuplicateKey { list: String, key: String },
    #[error("unsupported session version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
