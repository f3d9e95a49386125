//! Verification of temporal properties stated over an ontology against
//! the runs of a relational artifact system.
//!
//! The pipeline: a property over a DL-Lite_R TBox is rewritten against the
//! TBox ([`rewrite`]), unfolded through the mapping assertions
//! ([`mapping`]) into a property over the relational schema, and checked
//! over the finite transition system generated by a guarded-action system
//! ([`lifecycle`], [`temporal`]). A reference checker evaluates the
//! original property directly over the virtual ABoxes of the same states,
//! so the two verdicts can be compared.

pub mod error;
pub mod kb;
pub mod lifecycle;
pub mod mapping;
pub mod ontology;
pub mod query;
pub mod rewrite;
pub mod syntax;
pub mod temporal;

pub use error::{Error, EvalError, Inconsistency, ModelError, ParseError, Result};
pub use kb::{ABox, Constant, DatabaseInstance, ObjectTerm, Relation, Schema, Value};
pub use lifecycle::{build_rts, ActionSystem, Governance, SasSystem, Sts, TransitionSystem};
pub use mapping::{materialize, MappingSet, ObdaSystem};
pub use ontology::{TBox, Vocabulary};
pub use query::{Ecq, FoQuery, Ucq};
pub use rewrite::{is_satisfiable, perfect_ref, rewrite_ecq, unsat_query};
pub use temporal::{check_rts, check_sts, compile, cross_check, CtlAFormula, CtlEqlFormula, Verdict};
