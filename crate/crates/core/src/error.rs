use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("header has no columns")]
    EmptyHeader,
    #[error("column {0} has an empty name")]
    EmptyName(usize),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("goal column `{0}` must be numeric (names of numeric columns start uppercase)")]
    SymbolicGoal(String),
    #[error("row has {found} cells but the header has {expected}")]
    Arity { expected: usize, found: usize },
    #[error("dataset has no independent columns")]
    NoIndependentColumns,
    #[error("dataset has no goal columns")]
    NoGoals,
    #[error("row {0} has missing goal values")]
    Unlabeled(usize),
    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("invalid budget {budget}: {reason}")]
    Budget { budget: usize, reason: &'static str },
    #[error("invalid config: {0}")]
    Config(&'static str),
    #[error("row {found} is not the pending candidate (expected {expected:?})")]
    NotPending { expected: Option<usize>, found: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("run aborted after {labels_used} labels: {source}")]
    Aborted {
        source: OracleError,
        labels_used: usize,
        trajectory: Vec<(usize, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle has no goals for row {0}")]
    UnknownRow(usize),
    #[error("labeling session terminated")]
    SessionTerminated,
    #[error("expected {expected} goal values, got {found}")]
    GoalArity { expected: usize, found: usize },
}
