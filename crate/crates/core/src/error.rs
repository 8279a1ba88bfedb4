use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rule number {0} is outside 0..=255")]
    RuleNumberOutOfRange(u32),
    #[error("canonical rule numbers need a binary alphabet, got q = {0}")]
    NonBinaryAlphabet(usize),
    #[error("invalid rule table: {0}")]
    InvalidTable(String),
    #[error("letter {letter} is outside the alphabet of size {q}")]
    LetterOutOfAlphabet { letter: u8, q: usize },
    #[error("word on [{start}..{end}] is too short (needs at least {needed} letters)")]
    WordTooShort { start: i64, end: i64, needed: usize },
    #[error("word on [{start}..{end}] is not centered on an odd interval [-n..n]")]
    NotCentered { start: i64, end: i64 },
    #[error("interval [{i}..{j}] is not inside [{lo}..{hi}]")]
    IntervalOutOfRange { i: i64, j: i64, lo: i64, hi: i64 },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{what} needs {needed} items, over the budget of {budget} (set TRACECC_BUDGET to raise it)")]
    BudgetExceeded { what: &'static str, needed: u128, budget: u64 },
    #[error("letter subset must be nonempty")]
    EmptySubset,
    #[error("letter subset must be a proper nonempty subset of the alphabet")]
    DegenerateSubset,
    #[error("protocol {protocol} is not applicable: {reason}")]
    Inapplicable { protocol: String, reason: String },
    #[error("fooling set rejected: {0}")]
    InvalidFoolingSet(String),
    #[error("{0}")]
    DivisionByZero(String),
    #[error("interval wider than the working width {width} of the forbidden family: {len}")]
    WidthExceeded { width: usize, len: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
