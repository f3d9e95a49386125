//! Query languages of both levels and their plain (reasoning-free)
//! evaluation under active-domain semantics.
//!
//! Ontology level: conjunctive queries, unions of them, and ECQs that
//! combine embedded UCQs with `not`, `and`, `exists`. Relational level:
//! conjunctive source queries with comparison filters and first-order
//! combinations of their unions.

mod algebra;
mod ast;
mod eval;
mod source;

pub use algebra::Rel;
pub use ast::{Atom, Cq, Ecq, Term, Ucq, Var};
pub use eval::{eval_cq, eval_ecq, eval_ecq_plain, eval_ecq_vars, eval_fo, eval_fo_vars, eval_source, eval_ucq, Env, FoEnv};
pub(crate) use eval::eval_source_with;
pub use source::{CmpOp, Filter, FoQuery, RelAtom, SourceLeaf, SourceQuery, SrcTerm};

pub(crate) use ast::{parse_ecq, parse_ucq_body};
pub(crate) use source::parse_source_items;
