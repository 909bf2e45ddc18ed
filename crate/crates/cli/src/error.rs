use carleson_core::Verdict;
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// Spec rejected by the schema, anchored at `origin:line:column`.
    #[error("{origin}:{line}:{column}: {message}")]
    Schema {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] carleson_core::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// Invalid input exits 3; numerical breakdowns (a sparse covering net,
    /// an untrustworthy integral) are inconclusive rather than failures.
    pub fn exit_code(&self) -> i32 {
        use carleson_core::Error as E;
        match self {
            CliError::Core(E::Analysis(_) | E::Integration(_)) => EXIT_INCONCLUSIVE,
            _ => EXIT_USAGE,
        }
    }
}

pub fn verdict_exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}
