use std::collections::BTreeSet;
use std::fmt;

use crate::ontology::Vocabulary;
use crate::query::{Ecq, Term, Var};
use crate::temporal::ast::{Ctl, CtlEqlFormula};

/// A reason a property cannot be verified.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Diagnostic {
    /// A variable used outside the scope of any quantifier.
    Open { var: Var },
    /// A quantified variable that its guard does not mention.
    Unguarded { var: Var },
    /// A value variable not preceded by the object it is an attribute of.
    ValueOrdering { var: Var },
    UnknownPredicate { name: String },
    WrongKind { name: String, expected: usize, found: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Open { var } => write!(f, "`?{var}` is free; only closed properties can be checked"),
            Diagnostic::Unguarded { var } => write!(f, "quantified `?{var}` does not occur free in its guard"),
            Diagnostic::ValueOrdering { var } => write!(
                f,
                "`?{var}` only occurs as an attribute value; quantify the attribute's subject before it"
            ),
            Diagnostic::UnknownPredicate { name } => write!(f, "predicate `{name}` is not in the vocabulary"),
            Diagnostic::WrongKind { name, expected, found } => {
                let kind = |n: usize| if n == 1 { "concept" } else { "role" };
                write!(f, "`{name}` is a {} but is used as a {}", kind(*expected), kind(*found))
            }
        }
    }
}

/// Check closedness, guardedness, value-variable ordering and vocabulary
/// membership. An empty result means the property can be compiled.
pub fn validate(f: &CtlEqlFormula, vocab: &Vocabulary) -> Vec<Diagnostic> {
    let mut out = BTreeSet::new();
    walk(f, &mut Vec::new(), vocab, &mut out);
    out.into_iter().collect()
}

fn walk(f: &CtlEqlFormula, scope: &mut Vec<Var>, vocab: &Vocabulary, out: &mut BTreeSet<Diagnostic>) {
    match f {
        Ctl::Local(q) => {
            open_vars(q, scope, out);
            check_vocab(q, vocab, out);
        }
        Ctl::Forall(q) | Ctl::Exists(q) => {
            let fv = q.guard.free_vars();
            for v in &fv {
                if !scope.contains(v) && !q.vars.contains(v) {
                    out.insert(Diagnostic::Open { var: v.clone() });
                }
            }
            for v in &q.vars {
                if !fv.contains(v) {
                    out.insert(Diagnostic::Unguarded { var: v.clone() });
                }
            }
            check_vocab(&q.guard, vocab, out);
            let before = scope.len();
            for (j, y) in q.vars.iter().enumerate() {
                let earlier: Vec<&Var> = scope[..before].iter().chain(&q.vars[..j]).collect();
                if !ordered(&q.guard, y, &earlier) {
                    out.insert(Diagnostic::ValueOrdering { var: y.clone() });
                }
            }
            scope.extend(q.vars.iter().cloned());
            if let Some(b) = &q.body {
                walk(b, scope, vocab, out);
            }
            scope.truncate(before);
        }
        op => {
            for k in op.operator().unwrap().1 {
                walk(k, scope, vocab, out);
            }
        }
    }
}

fn open_vars(q: &Ecq, scope: &[Var], out: &mut BTreeSet<Diagnostic>) {
    for v in q.free_vars() {
        if !scope.contains(&v) {
            out.insert(Diagnostic::Open { var: v });
        }
    }
}

fn check_vocab(q: &Ecq, vocab: &Vocabulary, out: &mut BTreeSet<Diagnostic>) {
    for u in q.leaves() {
        for d in &u.disjuncts {
            for a in &d.atoms {
                match vocab.arity(&a.predicate) {
                    None => {
                        out.insert(Diagnostic::UnknownPredicate { name: a.predicate.clone() });
                    }
                    Some(k) if k != a.args.len() => {
                        out.insert(Diagnostic::WrongKind { name: a.predicate.clone(), expected: k, found: a.args.len() });
                    }
                    _ => {}
                }
            }
        }
    }
}

/// A variable whose guard occurrences are all second components of roles
/// must, in every disjunct mentioning it, be the value of a role whose
/// subject is a variable quantified earlier.
fn ordered(guard: &Ecq, y: &Var, earlier: &[&Var]) -> bool {
    let mut value_only = true;
    let mut seen = false;
    let mut supported = true;
    for u in guard.leaves() {
        let Some(yi) = u.answer_vars.iter().position(|v| v == y) else { continue };
        for d in &u.disjuncts {
            let Term::Var(ty) = &d.head[yi] else { continue };
            let mut here = false;
            let mut support = false;
            for a in &d.atoms {
                for (k, t) in a.args.iter().enumerate() {
                    if t.as_var() != Some(ty) {
                        continue;
                    }
                    here = true;
                    if !(a.args.len() == 2 && k == 1) {
                        value_only = false;
                    } else {
                        let subject = &a.args[0];
                        support |= u
                            .answer_vars
                            .iter()
                            .zip(&d.head)
                            .any(|(x, tx)| tx == subject && x != y && earlier.contains(&x));
                    }
                }
            }
            seen |= here;
            if here && !support {
                supported = false;
            }
        }
    }
    !(seen && value_only) || supported
}
