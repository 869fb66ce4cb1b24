use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("relation `{name}` has arity {expected} but is used with {found} argument(s)")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("relation `{0}` is not declared in the vocabulary")]
    UndeclaredSymbol(String),

    #[error("formula has free variable(s): {}", .0.join(", "))]
    FreeVariables(Vec<String>),

    #[error("{what} needs {actual} but the configured cap is {limit}")]
    ResourceCap {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    /// The input lies outside the fragment handled by the chosen method.
    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(
        "soft constraint `{0}` has weight 1; such a constraint multiplies every world by the \
         same factor and is vacuous, drop it from the model"
    )]
    VacuousSoftConstraint(String),

    #[error("inconsistent MLN: no world satisfies the hard constraints")]
    InconsistentMln,

    #[error("query is not gamma-acyclic; stalled at {0}")]
    NotGammaAcyclic(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
