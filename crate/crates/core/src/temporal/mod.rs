//! Temporal properties at both levels: the ontology-level language with
//! local ECQs, its compilation into relational properties, and an
//! explicit-state CTL checker for each level.
//!
//! ```text
//! AG (FORALL ?x . [PublishedCPReport(?x)] -> EF [FinishedReport(?x)])
//! ```
//!
//! A quantifier ending in a bare guard (`FORALL ?x . [Q]`) has body `true`.

mod ast;
mod check;
mod compile;
mod validate;

pub use ast::{Ctl, CtlAFormula, CtlEqlFormula, Quant, QuantBlock, QuantBranch, Skeleton};
pub use check::{check_rts, check_rts_with, check_sts, check_sts_with, cross_check, cross_check_on, label_rts, CheckOptions, CrossCheck, Verdict};
pub use compile::{compile, property_vocabulary, rewrite_property, unfold_property};
pub use validate::{validate, Diagnostic};

pub fn parse_property(text: &str) -> Result<CtlEqlFormula, crate::error::ParseError> {
    CtlEqlFormula::parse(text)
}
