use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsafe variable {var} in {location}")]
    Unsafe { location: String, var: String },
    #[error("predicate {predicate} used with arity {first} and {second}")]
    ArityClash {
        predicate: String,
        first: usize,
        second: usize,
    },
    #[error("{what} has {size} atoms, above the limit of {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("constant {0} is not in the Herbrand universe")]
    NotInUniverse(String),
    #[error("rule {0} is not normal (disjunctive head)")]
    NonNormal(String),
    #[error("program is not positive: {0}")]
    NotPositive(String),
    #[error("guard placement violates condition {condition}: {detail}")]
    InvalidGuard { condition: u8, detail: String },
    #[error("heuristic {mode} does not apply to family {family}")]
    IncompatibleHeuristic { mode: String, family: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
