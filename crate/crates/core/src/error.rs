use std::fmt;

use thiserror::Error;

use crate::syntax::Pos;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError { pos, msg: msg.into() }
    }
}

/// Structural problems detected after a file parsed successfully.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{name}` has arity {expected}, got {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("duplicate relation `{0}` in schema")]
    DuplicateRelation(String),
    #[error("relation `{0}` must have at least one column")]
    EmptyRelation(String),
    #[error("duplicate column `{column}` in relation `{relation}`")]
    DuplicateColumn { relation: String, column: String },
    #[error("function symbol `{symbol}` used with arities {first} and {second}")]
    SymbolArity { symbol: String, first: usize, second: usize },
    #[error("unsafe variable `?{0}`: it does not occur in any atom")]
    UnsafeVariable(String),
    #[error("mapping `{mapping}`: target variable `?{var}` is not a source output")]
    TargetVariable { mapping: String, var: String },
    #[error("duplicate mapping id `{0}`")]
    DuplicateMapping(String),
    #[error("mapping `{0}` has an empty target")]
    EmptyTarget(String),
    #[error("predicate `{name}` used as both a concept and a role")]
    PredicateKind { name: String },
    #[error("mapping target predicate `{0}` is not in the TBox vocabulary")]
    OutsideVocabulary(String),
    #[error("action `{action}`: `?{var}` is not a declared parameter")]
    UndeclaredParam { action: String, var: String },
    #[error("action `{action}`: parameter `?{param}` refers to unknown pool `{pool}`")]
    UnknownPool { action: String, param: String, pool: String },
    #[error("schema mismatch between the action system and the mappings: {0}")]
    SchemaMismatch(String),
    #[error("object term in relational position: {0}")]
    ObjectTermInInstance(String),
}

/// Runtime failure while evaluating a query.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot compare {left} with {right} using `{op}`")]
    Incomparable { left: String, right: String, op: String },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("state cap of {cap} exceeded while building the transition system")]
    StateCapExceeded { cap: usize },
    #[error("{0}")]
    Inconsistent(Box<Inconsistency>),
    #[error("unknown state id {0}")]
    UnknownState(usize),
    #[error("property is not valid:\n{}", .0.iter().map(|d| format!("  - {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<crate::temporal::Diagnostic>),
}

/// A reached instance whose virtual ABox violates a disjointness assertion.
#[derive(Clone, Debug)]
pub struct Inconsistency {
    pub instance: crate::kb::DatabaseInstance,
    pub violated: String,
}

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inconsistent state (violates {}):\n{}", self.violated, self.instance)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
