use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Syntax error in formula text, positioned at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub found: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: found {}", self.line, self.column, self.found)?;
        if !self.expected.is_empty() {
            write!(f, ", expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at {0}")]
    Parse(ParseError),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("time index {index} outside [1, {len}]")]
    TimeOutOfRange { index: usize, len: usize },
    #[error("missing value for parameter `{0}`")]
    MissingParameter(String),
    #[error("parameter `{name}` sits in an integer position but has value {value}")]
    NonIntegral { name: String, value: f64 },
    #[error("parameter `{0}` occurs more than once")]
    DuplicateParameter(String),
    #[error("formula still contains parameter `{0}`")]
    Parameterized(String),
    #[error("formula is outside the supported fragment: {0}")]
    OutOfFragment(String),
    #[error("too many atomic predicates ({0}); at most {max} are supported", max = crate::automata::MAX_PREDICATES)]
    TooManyPredicates(usize),
    #[error("automaton construction exceeded {0} states")]
    StateLimit(usize),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("trajectory {0} has no classification label")]
    MissingLabel(usize),
    #[error("trajectories do not share one graph")]
    GraphMismatch,
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid parameter box: {0}")]
    InvalidBox(String),
    #[error("parameter `{name}` has {polarity:?} polarity; identification needs + or -")]
    BadPolarity {
        name: String,
        polarity: crate::formula::Polarity,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty point set")]
    EmptySet,
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}
