//! Compiling the TBox away: PerfectRef reformulation of UCQs, its lifting
//! to ECQs, and the boolean query that detects inconsistency.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::kb::ABox;
use crate::ontology::{BasicConcept, GeneralConcept, RoleExpr, TBox};
use crate::query::{eval_ucq, Atom, Cq, Ecq, Env, Term, Ucq, Var};

const FRESH: &str = "\u{1}n";

/// Positive inclusions in the shape the rewriting steps consume.
struct Inclusions<'t> {
    /// `B <= A`, keyed by `A`.
    into_concept: BTreeMap<&'t str, Vec<&'t BasicConcept>>,
    /// `B <= exists(U)`, keyed by `U`.
    into_exists: BTreeMap<RoleExpr, Vec<&'t BasicConcept>>,
    /// `U1 <= P` for a plain role `P`, closed under inversion.
    into_role: BTreeMap<String, Vec<RoleExpr>>,
}

impl<'t> Inclusions<'t> {
    fn new(t: &'t TBox) -> Self {
        let mut into_concept: BTreeMap<&str, Vec<&BasicConcept>> = BTreeMap::new();
        let mut into_exists: BTreeMap<RoleExpr, Vec<&BasicConcept>> = BTreeMap::new();
        for (lhs, rhs) in &t.concept_inclusions {
            match rhs {
                GeneralConcept::Basic(BasicConcept::Named(a)) => into_concept.entry(a).or_default().push(lhs),
                GeneralConcept::Basic(BasicConcept::Exists(u)) => into_exists.entry(u.clone()).or_default().push(lhs),
                GeneralConcept::QualifiedExists(..) => unreachable!("normalized TBox"),
            }
        }
        let mut into_role: BTreeMap<String, Vec<RoleExpr>> = BTreeMap::new();
        for (u1, u2) in &t.role_inclusions {
            let (sub, sup) = if u2.inverse { (u1.inverted(), u2.inverted()) } else { (u1.clone(), u2.clone()) };
            let entry = into_role.entry(sup.name).or_default();
            if !entry.contains(&sub) {
                entry.push(sub);
            }
        }
        Inclusions { into_concept, into_exists, into_role }
    }
}

struct Fresh(usize);

impl Fresh {
    fn next(&mut self) -> Term {
        self.0 += 1;
        Term::Var(format!("{FRESH}{}", self.0))
    }
}

/// The atom asserting membership of `x` in `b`.
fn concept_atom(b: &BasicConcept, x: Term, fresh: &mut Fresh) -> Atom {
    match b {
        BasicConcept::Named(n) => Atom::concept(n, x),
        BasicConcept::Exists(r) => role_atom(r, x, fresh.next()),
    }
}

/// `U(x, y)` written over the underlying role name.
fn role_atom(u: &RoleExpr, x: Term, y: Term) -> Atom {
    if u.inverse {
        Atom::role(&u.name, y, x)
    } else {
        Atom::role(&u.name, x, y)
    }
}

fn rewrite_atom(cq: &Cq, i: usize, inc: &Inclusions, fresh: &mut Fresh) -> Vec<Atom> {
    let g = &cq.atoms[i];
    let mut out = Vec::new();
    match g.args.as_slice() {
        [x] => {
            for b in inc.into_concept.get(g.predicate.as_str()).into_iter().flatten() {
                out.push(concept_atom(b, x.clone(), fresh));
            }
        }
        [x, y] => {
            if cq.is_unbound(y) {
                for b in inc.into_exists.get(&RoleExpr::named(&g.predicate)).into_iter().flatten() {
                    out.push(concept_atom(b, x.clone(), fresh));
                }
            }
            if cq.is_unbound(x) {
                for b in inc.into_exists.get(&RoleExpr::inv(&g.predicate)).into_iter().flatten() {
                    out.push(concept_atom(b, y.clone(), fresh));
                }
            }
            for sub in inc.into_role.get(&g.predicate).into_iter().flatten() {
                out.push(role_atom(sub, x.clone(), y.clone()));
            }
        }
        _ => {}
    }
    out
}

fn walk(t: &Term, sub: &BTreeMap<Var, Term>) -> Term {
    let mut t = t.clone();
    while let Term::Var(v) = &t {
        match sub.get(v) {
            Some(next) => t = next.clone(),
            None => break,
        }
    }
    t
}

/// Most general unifier of two atoms with the same predicate. Head
/// variables are kept as representatives where possible.
fn mgu(a: &Atom, b: &Atom, head: &BTreeSet<&Var>) -> Option<BTreeMap<Var, Term>> {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return None;
    }
    let mut sub: BTreeMap<Var, Term> = BTreeMap::new();
    for (s, t) in a.args.iter().zip(&b.args) {
        let (s, t) = (walk(s, &sub), walk(t, &sub));
        if s == t {
            continue;
        }
        match (&s, &t) {
            (Term::Const(_), Term::Const(_)) => return None,
            (Term::Var(v), Term::Const(_)) => {
                sub.insert(v.clone(), t.clone());
            }
            (Term::Const(_), Term::Var(w)) => {
                sub.insert(w.clone(), s.clone());
            }
            (Term::Var(v), Term::Var(w)) => {
                if head.contains(v) && !head.contains(w) {
                    sub.insert(w.clone(), s.clone());
                } else {
                    sub.insert(v.clone(), t.clone());
                }
            }
        }
    }
    let keys: Vec<Var> = sub.keys().cloned().collect();
    Some(keys.into_iter().map(|k| (k.clone(), walk(&Term::Var(k), &sub))).collect())
}

/// PerfectRef: saturate the disjuncts of `q` under atom rewriting and
/// reduction, then drop every CQ over an auxiliary role.
///
/// The TBox is normalized first if it still has qualified existentials.
/// The original disjuncts come first in the output, the rest follow in
/// discovery order.
pub fn perfect_ref(q: &Ucq, t: &TBox) -> Ucq {
    if !t.is_normalized() {
        return perfect_ref(q, &t.normalize());
    }
    let inc = Inclusions::new(t);
    let av = &q.answer_vars;
    let mut seen: HashSet<Cq> = HashSet::new();
    let mut order: Vec<Cq> = Vec::new();
    for d in &q.disjuncts {
        let c = d.canonical(av);
        if seen.insert(c.clone()) {
            order.push(c);
        }
    }
    let mut fresh = Fresh(0);
    let mut next = 0;
    while next < order.len() {
        let cq = order[next].clone();
        next += 1;
        let mut produced = Vec::new();
        for i in 0..cq.atoms.len() {
            for atom in rewrite_atom(&cq, i, &inc, &mut fresh) {
                let mut atoms = cq.atoms.clone();
                atoms[i] = atom;
                produced.push(Cq { head: cq.head.clone(), atoms });
            }
        }
        let head = cq.head_vars();
        for i in 0..cq.atoms.len() {
            for j in i + 1..cq.atoms.len() {
                if let Some(sub) = mgu(&cq.atoms[i], &cq.atoms[j], &head) {
                    produced.push(cq.substitute(&sub));
                }
            }
        }
        for p in produced {
            let c = p.canonical(av);
            if seen.insert(c.clone()) {
                order.push(c);
            }
        }
    }
    order.retain(|cq| !cq.atoms.iter().any(|a| t.auxiliary_roles.contains(&a.predicate)));
    Ucq { answer_vars: av.clone(), disjuncts: order }
}

/// Replace every embedded UCQ by its PerfectRef reformulation.
pub fn rewrite_ecq(q: &Ecq, t: &TBox) -> Ecq {
    if !t.is_normalized() {
        return rewrite_ecq(q, &t.normalize());
    }
    q.map_leaves(&mut |u| perfect_ref(u, t))
}

/// One disjointness assertion and the boolean query detecting its violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnsatComponent {
    pub assertion: String,
    pub query: Ucq,
}

/// Per-assertion parts of [`unsat_query`], each already reformulated.
pub fn unsat_components(t: &TBox) -> Vec<UnsatComponent> {
    let t = if t.is_normalized() { t.clone() } else { t.normalize() };
    let mut out = Vec::new();
    let mut fresh = Fresh(0);
    for (b1, b2) in &t.concept_disjointness {
        let x = Term::var("x");
        let atoms = vec![concept_atom(b1, x.clone(), &mut fresh), concept_atom(b2, x, &mut fresh)];
        let q = Ucq::single(Vec::new(), atoms);
        out.push(UnsatComponent { assertion: format!("disjoint({b1}, {b2})"), query: perfect_ref(&q, &t) });
    }
    for (u1, u2) in &t.role_disjointness {
        let (x, y) = (Term::var("x"), Term::var("y"));
        let atoms = vec![role_atom(u1, x.clone(), y.clone()), role_atom(u2, x, y)];
        let q = Ucq::single(Vec::new(), atoms);
        out.push(UnsatComponent { assertion: format!("role-disjoint({u1}, {u2})"), query: perfect_ref(&q, &t) });
    }
    out
}

/// The boolean UCQ that has an answer exactly over ABoxes inconsistent
/// with `t`. Empty (always false) when `t` has no disjointness.
pub fn unsat_query(t: &TBox) -> Ucq {
    let mut disjuncts: Vec<Cq> = Vec::new();
    for c in unsat_components(t) {
        for d in c.query.disjuncts {
            if !disjuncts.contains(&d) {
                disjuncts.push(d);
            }
        }
    }
    Ucq::new(Vec::new(), disjuncts)
}

pub fn is_satisfiable(t: &TBox, a: &ABox) -> bool {
    eval_ucq(&unsat_query(t), a, &Env::new()).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn energy() -> TBox {
        TBox::parse(
            "exists(contains) <= PublishedCPReportColl\nexists(inv(contains)) <= PublishedCPReport\n\
             exists(controlPointID) <= PublishedCPReport\nexists(inv(controlPointID)) <= String\n\
             FinishedReport <= PublishedCPReport\nReviewedReport <= PublishedCPReport\n\
             AcceptedReport <= PublishedCPReport\nObjectedReport <= PublishedCPReport",
        )
        .unwrap()
    }

    #[test]
    fn published_report_has_seven_disjuncts() {
        let q = Ucq::parse("[ PublishedCPReport(?x) ]").unwrap();
        let r = perfect_ref(&q, &energy());
        let expected = Ucq::parse(
            "[ PublishedCPReport(?x) | FinishedReport(?x) | ObjectedReport(?x) | AcceptedReport(?x) \
             | ReviewedReport(?x) | controlPointID(?x, _) | contains(_, ?x) ]",
        )
        .unwrap();
        let got: BTreeSet<&Cq> = r.disjuncts.iter().collect();
        let want: BTreeSet<&Cq> = expected.disjuncts.iter().collect();
        assert_eq!(got, want);
        assert_eq!(r.disjuncts.len(), 7);
        assert_eq!(r.disjuncts[0], q.disjuncts[0]);
    }

    #[test]
    fn empty_tbox_is_identity() {
        let q = Ucq::parse("[ P(?x, ?y), C(?y) | D(?x), ?y = ?x ]").unwrap();
        assert_eq!(perfect_ref(&q, &TBox::new()), q);
    }

    #[test]
    fn reduce_enables_existential_rewriting() {
        let t = TBox::parse("A <= exists(P)\nexists(inv(P)) <= B").unwrap();
        let q = Ucq::parse("[ select : P(?x, ?y), B(?y) ]").unwrap();
        let r = perfect_ref(&q, &t);
        let a = Ucq::parse("[ select : A(_) ]").unwrap();
        assert!(r.disjuncts.contains(&a.disjuncts[0]), "{r}");
        let abox = ABox::parse(r#"A("a")"#).unwrap();
        assert_eq!(eval_ucq(&r, &abox, &Env::new()).len(), 1);
    }

    #[test]
    fn qualified_existential_through_auxiliary_role() {
        let t = TBox::parse("A <= exists(P, B)").unwrap();
        let q = Ucq::parse("[ select ?x : P(?x, ?y), B(?y) ]").unwrap();
        let r = perfect_ref(&q, &t);
        assert!(r.disjuncts.contains(&Ucq::parse("[ A(?x) ]").unwrap().disjuncts[0]), "{r}");
        assert!(r.predicates().iter().all(|p| !p.starts_with("aux")));
    }

    #[test]
    fn role_inclusion_with_inverse() {
        let t = TBox::parse("role Q <= inv(P)").unwrap();
        let q = Ucq::parse("[ P(?x, ?y) ]").unwrap();
        let r = perfect_ref(&q, &t);
        assert!(r.disjuncts.contains(&Ucq::parse("[ select ?x, ?y : Q(?y, ?x) ]").unwrap().disjuncts[0]), "{r}");
    }

    #[test]
    fn rewrite_ecq_substitutes_leaves() {
        let t = TBox::parse("B <= A").unwrap();
        let q = Ecq::parse("not [A(?x)]").unwrap();
        assert_eq!(rewrite_ecq(&q, &t), Ecq::parse("not [A(?x) | B(?x)]").unwrap());
    }

    #[test]
    fn unsat_without_disjointness_is_empty() {
        assert!(unsat_query(&energy()).disjuncts.is_empty());
        assert!(is_satisfiable(&energy(), &ABox::parse(r#"FinishedReport("a")"#).unwrap()));
    }

    #[test]
    fn disjointness_clash_through_inclusion() {
        let t = TBox::parse("disjoint(A, B)\nC <= A").unwrap();
        assert!(!is_satisfiable(&t, &ABox::parse(r#"A("a") B("a")"#).unwrap()));
        assert!(!is_satisfiable(&t, &ABox::parse(r#"C("a") B("a")"#).unwrap()));
        assert!(is_satisfiable(&t, &ABox::parse(r#"C("a") B("b")"#).unwrap()));
        assert!(is_satisfiable(&t, &ABox::new()));
    }

    #[test]
    fn role_disjointness() {
        let t = TBox::parse("role-disjoint(P, inv(Q))").unwrap();
        assert!(!is_satisfiable(&t, &ABox::parse(r#"P("a", "b") Q("b", "a")"#).unwrap()));
        assert!(is_satisfiable(&t, &ABox::parse(r#"P("a", "b") Q("a", "b")"#).unwrap()));
    }
}
