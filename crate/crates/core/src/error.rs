use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: cannot parse {token:?} as a decimal number")]
    Parse { line: usize, token: String },

    #[error("entry {index} ({value}) does not exceed its predecessor ({previous})")]
    Order {
        index: usize,
        previous: f64,
        value: f64,
    },

    #[error("need at least {needed} entries, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("asymptote {v_infinity} must exceed the largest eigenvalue {max_eigenvalue}")]
    Asymptote {
        v_infinity: f64,
        max_eigenvalue: f64,
    },

    #[error("degenerate eigenvalue {value} at index {index}")]
    Degenerate { index: usize, value: f64 },

    #[error("precision exhausted at x = {x}: error estimate {estimate:e} at {bits} bits")]
    Precision { x: f64, bits: u32, estimate: f64 },

    #[error("series does not converge: {0}")]
    Convergence(String),

    #[error("grid under-resolved at level {level}: {detail}")]
    Grid { level: usize, detail: String },

    #[error("auxiliary solution acquires a node near x = {x} at level {level}")]
    Node { level: usize, x: f64 },

    #[error("only {found} bound states below the asymptote, {requested} requested")]
    InsufficientStates { found: usize, requested: usize },

    #[error("level {level}: step-halving discrepancy {discrepancy:e} exceeds {limit:e}")]
    GridTooCoarse {
        level: usize,
        discrepancy: f64,
        limit: f64,
    },

    #[error("length mismatch: {expected} targets, {found} recovered")]
    LengthMismatch { expected: usize, found: usize },

    #[error("grid [{lo}, {hi}] does not cover the required range [{need_lo}, {need_hi}]")]
    Coverage {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("signal is constant; no dimension can be estimated")]
    DegenerateSignal,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unknown {family} {name:?}; available: {available}")]
    UnknownStrategy {
        family: &'static str,
        name: String,
        available: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Precision { .. }
                | Error::Convergence(_)
                | Error::Grid { .. }
                | Error::Node { .. }
                | Error::InsufficientStates { .. }
                | Error::GridTooCoarse { .. }
        )
    }
}
