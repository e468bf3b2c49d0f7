use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // frame and set algebra
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("unknown outcome label `{0}`")]
    UnknownOutcome(String),
    #[error("outcome set {0:#b} lies outside a frame of {1} outcomes")]
    SetOutsideFrame(u32, usize),
    #[error("frame mismatch between operands")]
    FrameMismatch,
    #[error("empty outcome set is not allowed here")]
    EmptySet,

    // mass functions
    #[error("invalid mass: {0}")]
    InvalidMass(String),
    #[error("fully conflicting evidence (K = {conflict})")]
    TotalConflict { conflict: f64 },
    #[error("fully conflicting evidence at item {index}")]
    TotalConflictAt { index: usize },
    #[error("cannot combine an empty list of mass functions")]
    NothingToCombine,

    // estimation
    #[error("no frequency row for `{0}`")]
    MissingRow(String),
    #[error("row `{key}` has total count {total}, below the floor of {floor}")]
    RowBelowFloor { key: String, total: u64, floor: u64 },
    #[error("row `{key}` has {got} counts, frame has {expected} outcomes")]
    RowLength { key: String, got: usize, expected: usize },
    #[error("frame of {size} outcomes exceeds the subset-enumeration limit of {limit}")]
    FrameTooLarge { size: usize, limit: usize },
    #[error("all subset scores are zero for row `{0}`")]
    AllScoresZero(String),
    #[error("{} row(s) failed: {}", .0.len(), summarize_rows(.0))]
    Rows(Vec<(String, Error)>),
    #[error("invalid override: {0}")]
    InvalidOverride(String),

    // weights of evidence
    #[error("invalid membership function: {0}")]
    InvalidMembership(String),
    #[error("alpha must lie in [0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("empty sample list")]
    EmptySamples,
    #[error("no sample falls inside the support of the membership function")]
    NoSupport,
    #[error("prior odds must be positive, got {0}")]
    InvalidPriorOdds(f64),

    // statistics
    #[error("contingency table has a zero marginal")]
    ZeroMarginal,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    // logistic regression
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("response has a single class")]
    SingleClass,
    #[error("separation detected: coefficient `{0}` diverges")]
    Separation(String),
    #[error("case is undiagnosable: predictor `{0}` is missing")]
    Undiagnosable(String),

    // data and evaluation
    #[error("variable `{0}` is not covered by the discretization")]
    UnknownVariable(String),
    #[error("value {value} of `{variable}` falls outside every bin")]
    OutOfRange { variable: String, value: f64 },
    #[error("case `{0}` has no expected outcome")]
    MissingOutcome(String),
    #[error("duplicate case id `{0}`")]
    DuplicateId(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSynthetic(String),
    #[error("labels contain a single class; rates are undefined")]
    SingleClassLabels,
    #[error("nothing to tally")]
    EmptyTally,
    #[error("train and test share {} case id(s): {}", .0.len(), .0.join(", "))]
    OverlappingIds(Vec<String>),
    #[error("hypothesis column is not binary: {0}")]
    NonBinaryHypothesis(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn summarize_rows(rows: &[(String, Error)]) -> String {
    rows.iter()
        .map(|(k, e)| format!("`{k}`: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
