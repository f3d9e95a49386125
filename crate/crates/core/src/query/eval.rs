use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::EvalError;
use crate::kb::{ABox, Constant, DatabaseInstance, Value};
use crate::ontology::TBox;
use crate::query::algebra::Rel;
use crate::query::{Atom, CmpOp, Cq, Ecq, Filter, FoQuery, RelAtom, SourceLeaf, SourceQuery, SrcTerm, Term, Ucq, Var};
use crate::rewrite::rewrite_ecq;

/// Partial assignment of ontology-level variables.
pub type Env = BTreeMap<Var, Constant>;
/// Partial assignment of relational-level variables.
pub type FoEnv = BTreeMap<Var, Value>;

type Binding<'q, C> = HashMap<&'q str, C>;

fn resolve<'q>(t: &'q Term, b: &Binding<'q, Constant>) -> Option<Constant> {
    match t {
        Term::Const(c) => Some(c.clone()),
        Term::Var(v) => b.get(v.as_str()).cloned(),
    }
}

/// Bind `t` to `c`, reporting whether that is consistent with `b`.
fn bind<'q, C: PartialEq + Clone>(b: &mut Binding<'q, C>, t: &'q str, c: &C, trail: &mut Vec<&'q str>) -> bool {
    match b.get(t) {
        Some(old) => old == c,
        None => {
            b.insert(t, c.clone());
            trail.push(t);
            true
        }
    }
}

fn unify_term<'q>(t: &'q Term, c: &Constant, b: &mut Binding<'q, Constant>, trail: &mut Vec<&'q str>) -> bool {
    match t {
        Term::Const(k) => k == c,
        Term::Var(v) => bind(b, v, c, trail),
    }
}

fn match_atoms<'q>(atoms: &[&'q Atom], abox: &ABox, b: &mut Binding<'q, Constant>, emit: &mut dyn FnMut(&Binding<'q, Constant>)) {
    if atoms.is_empty() {
        emit(b);
        return;
    }
    // Most constrained atom first.
    let (pick, _) = atoms
        .iter()
        .enumerate()
        .max_by_key(|(_, a)| a.args.iter().filter(|t| resolve(t, b).is_some()).count())
        .expect("nonempty");
    let atom = atoms[pick];
    let rest: Vec<&Atom> = atoms.iter().enumerate().filter(|(i, _)| *i != pick).map(|(_, a)| *a).collect();
    let mut trail = Vec::new();
    let mut attempt = |cs: &[&Constant], b: &mut Binding<'q, Constant>| {
        trail.clear();
        if atom.args.iter().zip(cs).all(|(t, c)| unify_term(t, c, b, &mut trail)) {
            match_atoms(&rest, abox, b, emit);
        }
        for v in trail.drain(..) {
            b.remove(v);
        }
    };
    match atom.args.as_slice() {
        [t] => match resolve(t, b) {
            Some(c) => {
                if abox.has_concept(&atom.predicate, &c) {
                    match_atoms(&rest, abox, b, emit);
                }
            }
            None => {
                for c in abox.concept(&atom.predicate) {
                    attempt(&[c], b);
                }
            }
        },
        [t1, t2] => match (resolve(t1, b), resolve(t2, b)) {
            (Some(c1), Some(c2)) => {
                if abox.has_role(&atom.predicate, &c1, &c2) {
                    match_atoms(&rest, abox, b, emit);
                }
            }
            (Some(c1), None) => {
                let pairs: Vec<&(Constant, Constant)> = abox.role_from(&atom.predicate, &c1).collect();
                for (x, y) in pairs {
                    attempt(&[x, y], b);
                }
            }
            _ => {
                for (x, y) in abox.role(&atom.predicate) {
                    attempt(&[x, y], b);
                }
            }
        },
        _ => {}
    }
}

/// Answers of one CQ (tuples over `answer_vars`) by homomorphism search.
pub fn eval_cq(cq: &Cq, answer_vars: &[Var], abox: &ABox, env: &Env) -> BTreeSet<Vec<Constant>> {
    let mut out = BTreeSet::new();
    let mut b: Binding<Constant> = HashMap::new();
    let mut trail = Vec::new();
    for (t, av) in cq.head.iter().zip(answer_vars) {
        if let Some(c) = env.get(av) {
            if !unify_term(t, c, &mut b, &mut trail) {
                return out;
            }
        }
    }
    let atoms: Vec<&Atom> = cq.atoms.iter().collect();
    match_atoms(&atoms, abox, &mut b, &mut |b| {
        if let Some(row) = cq.head.iter().map(|t| resolve(t, b)).collect::<Option<Vec<_>>>() {
            out.insert(row);
        }
    });
    out
}

/// Plain evaluation of a UCQ over an ABox read as a database.
pub fn eval_ucq(q: &Ucq, abox: &ABox, env: &Env) -> BTreeSet<Vec<Constant>> {
    let mut out = BTreeSet::new();
    for d in &q.disjuncts {
        out.extend(eval_cq(d, &q.answer_vars, abox, env));
    }
    out
}

fn ucq_rel(q: &Ucq, abox: &ABox, env: &Env) -> Rel<Constant> {
    let keep: Vec<usize> = (0..q.answer_vars.len()).filter(|&i| !env.contains_key(&q.answer_vars[i])).collect();
    let vars = keep.iter().map(|&i| q.answer_vars[i].clone()).collect();
    let rows = eval_ucq(q, abox, env).into_iter().map(|r| keep.iter().map(|&i| r[i].clone()).collect()).collect();
    Rel { vars, rows }
}

fn ecq_rel(q: &Ecq, abox: &ABox, adom: &BTreeSet<Constant>, env: &Env) -> Rel<Constant> {
    match q {
        Ecq::Embedded(u) => ucq_rel(u, abox, env),
        Ecq::Not(q) => ecq_rel(q, abox, adom, env).complement(adom),
        Ecq::And(a, b) => {
            let l = ecq_rel(a, abox, adom, env);
            if l.rows.is_empty() {
                let mut vars = l.vars;
                vars.extend(b.free_vars().into_iter().filter(|v| !env.contains_key(v)));
                vars.dedup();
                return Rel { vars: dedup(vars), rows: BTreeSet::new() };
            }
            l.join(&ecq_rel(b, abox, adom, env))
        }
        Ecq::Exists(v, q) => {
            let mut inner = env.clone();
            inner.remove(v);
            let r = ecq_rel(q, abox, adom, &inner);
            if r.vars.contains(v) {
                r.project_out(v)
            } else if adom.is_empty() {
                Rel { vars: r.vars, rows: BTreeSet::new() }
            } else {
                r
            }
        }
    }
}

/// Project away columns outside `vars`, pad missing ones, and reorder.
fn fit<C: Ord + Clone>(mut r: Rel<C>, vars: &[Var], adom: &BTreeSet<C>) -> Rel<C> {
    for v in r.vars.clone() {
        if !vars.contains(&v) {
            r = r.project_out(&v);
        }
    }
    r.pad(vars, adom).reorder(vars)
}

fn dedup(vars: Vec<Var>) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for v in vars {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Evaluate an ECQ whose embedded UCQs are taken as they are (no TBox).
///
/// Rows range over the free variables of `q` not bound by `env`, in
/// first-occurrence order.
pub fn eval_ecq_plain(q: &Ecq, abox: &ABox, env: &Env) -> BTreeSet<Vec<Constant>> {
    let adom = abox.adom();
    let order: Vec<Var> = q.free_vars().into_iter().filter(|v| !env.contains_key(v)).collect();
    ecq_rel(q, abox, &adom, env).reorder(&order).rows
}

/// Like [`eval_ecq_plain`], with rows laid out over `vars`. Variables of
/// `vars` that are not free in `q` range over the whole active domain.
pub fn eval_ecq_vars(q: &Ecq, abox: &ABox, env: &Env, vars: &[Var]) -> BTreeSet<Vec<Constant>> {
    let adom = abox.adom();
    fit(ecq_rel(q, abox, &adom, env), vars, &adom).rows
}

/// Answers of an ECQ over `(tbox, abox)`: every embedded UCQ is answered
/// under certain-answer semantics (rewrite, then evaluate), and the
/// connectives range over the ABox's active domain.
pub fn eval_ecq(q: &Ecq, abox: &ABox, tbox: &TBox, env: &Env) -> BTreeSet<Vec<Constant>> {
    eval_ecq_plain(&rewrite_ecq(q, tbox), abox, env)
}

fn compare(l: &Value, op: CmpOp, r: &Value) -> Result<bool, EvalError> {
    if !op.is_equality() && !l.same_type(r) {
        return Err(EvalError::Incomparable {
            left: l.type_name().to_string(),
            right: r.type_name().to_string(),
            op: op.symbol().to_string(),
        });
    }
    let ord = l.cmp(r);
    Ok(match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    })
}

fn src_resolve<'q>(t: &'q SrcTerm, b: &Binding<'q, Value>) -> Option<Value> {
    match t {
        SrcTerm::Val(v) => Some(v.clone()),
        SrcTerm::Var(v) => b.get(v.as_str()).cloned(),
    }
}

fn src_unify<'q>(t: &'q SrcTerm, c: &Value, b: &mut Binding<'q, Value>, trail: &mut Vec<&'q str>) -> bool {
    match t {
        SrcTerm::Val(k) => k == c,
        SrcTerm::Var(v) => bind(b, v, c, trail),
    }
}

/// Filters that became fully bound must hold.
fn filters_ok<'q>(filters: &'q [Filter], b: &Binding<'q, Value>) -> Result<bool, EvalError> {
    for f in filters {
        if let (Some(l), Some(r)) = (src_resolve(&f.left, b), src_resolve(&f.right, b)) {
            if !compare(&l, f.op, &r)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn match_rel<'q>(
    atoms: &[&'q RelAtom],
    filters: &'q [Filter],
    inst: &DatabaseInstance,
    b: &mut Binding<'q, Value>,
    emit: &mut dyn FnMut(&Binding<'q, Value>),
) -> Result<(), EvalError> {
    if atoms.is_empty() {
        emit(b);
        return Ok(());
    }
    let (pick, _) = atoms
        .iter()
        .enumerate()
        .max_by_key(|(_, a)| a.args.iter().filter(|t| src_resolve(t, b).is_some()).count())
        .expect("nonempty");
    let atom = atoms[pick];
    let rest: Vec<&RelAtom> = atoms.iter().enumerate().filter(|(i, _)| *i != pick).map(|(_, a)| *a).collect();
    let mut trail = Vec::new();
    for tuple in inst.tuples(&atom.relation) {
        if tuple.len() != atom.args.len() {
            continue;
        }
        trail.clear();
        let ok = atom.args.iter().zip(tuple).all(|(t, v)| src_unify(t, v, b, &mut trail));
        let res = if ok && filters_ok(filters, b)? { match_rel(&rest, filters, inst, b, emit) } else { Ok(()) };
        for v in trail.drain(..) {
            b.remove(v);
        }
        res?;
    }
    Ok(())
}

/// Answers of a source query: one row per distinct output tuple.
pub fn eval_source(q: &SourceQuery, inst: &DatabaseInstance) -> Result<BTreeSet<Vec<Value>>, EvalError> {
    eval_source_with(q, &[], inst, &FoEnv::new())
}

/// Evaluate `q` with the output positions named `vars` pre-bound from `env`.
pub(crate) fn eval_source_with(q: &SourceQuery, vars: &[Var], inst: &DatabaseInstance, env: &FoEnv) -> Result<BTreeSet<Vec<Value>>, EvalError> {
    let mut out = BTreeSet::new();
    let mut b: Binding<Value> = HashMap::new();
    let mut trail = Vec::new();
    for (t, v) in q.output.iter().zip(vars) {
        if let Some(c) = env.get(v) {
            if !src_unify(t, c, &mut b, &mut trail) {
                return Ok(out);
            }
        }
    }
    if !filters_ok(&q.filters, &b)? {
        return Ok(out);
    }
    let atoms: Vec<&RelAtom> = q.atoms.iter().collect();
    match_rel(&atoms, &q.filters, inst, &mut b, &mut |b| {
        if let Some(row) = q.output.iter().map(|t| src_resolve(t, b)).collect::<Option<Vec<_>>>() {
            out.insert(row);
        }
    })?;
    Ok(out)
}

fn leaf_rel(l: &SourceLeaf, inst: &DatabaseInstance, env: &FoEnv) -> Result<Rel<Value>, EvalError> {
    let keep: Vec<usize> = (0..l.vars.len()).filter(|&i| !env.contains_key(&l.vars[i])).collect();
    let vars = keep.iter().map(|&i| l.vars[i].clone()).collect();
    let mut rows = BTreeSet::new();
    for d in &l.disjuncts {
        for r in eval_source_with(d, &l.vars, inst, env)? {
            rows.insert(keep.iter().map(|&i| r[i].clone()).collect());
        }
    }
    Ok(Rel { vars, rows })
}

fn fo_rel(q: &FoQuery, inst: &DatabaseInstance, adom: &BTreeSet<Value>, env: &FoEnv) -> Result<Rel<Value>, EvalError> {
    Ok(match q {
        FoQuery::Leaf(l) => leaf_rel(l, inst, env)?,
        FoQuery::Not(q) => fo_rel(q, inst, adom, env)?.complement(adom),
        FoQuery::And(a, b) => {
            let l = fo_rel(a, inst, adom, env)?;
            if l.rows.is_empty() {
                let mut vars = l.vars;
                vars.extend(b.free_vars().into_iter().filter(|v| !env.contains_key(v)));
                return Ok(Rel { vars: dedup(vars), rows: BTreeSet::new() });
            }
            l.join(&fo_rel(b, inst, adom, env)?)
        }
        FoQuery::Or(a, b) => {
            let l = fo_rel(a, inst, adom, env)?;
            l.union(&fo_rel(b, inst, adom, env)?, adom)
        }
        FoQuery::Exists(v, q) => {
            let mut inner = env.clone();
            inner.remove(v);
            let r = fo_rel(q, inst, adom, &inner)?;
            if r.vars.contains(v) {
                r.project_out(v)
            } else if adom.is_empty() {
                Rel { vars: r.vars, rows: BTreeSet::new() }
            } else {
                r
            }
        }
    })
}

/// Evaluate a first-order source-level query over an instance.
///
/// Rows range over the free variables of `q` not bound by `env`, in
/// first-occurrence order; quantifiers and negation range over the
/// instance's active domain.
pub fn eval_fo(q: &FoQuery, inst: &DatabaseInstance, env: &FoEnv) -> Result<BTreeSet<Vec<Value>>, EvalError> {
    let adom = inst.adom();
    let order: Vec<Var> = q.free_vars().into_iter().filter(|v| !env.contains_key(v)).collect();
    Ok(fo_rel(q, inst, &adom, env)?.reorder(&order).rows)
}

/// Like [`eval_fo`], with rows laid out over `vars`. Variables of `vars`
/// that are not free in `q` range over the whole active domain.
pub fn eval_fo_vars(q: &FoQuery, inst: &DatabaseInstance, env: &FoEnv, vars: &[Var]) -> Result<BTreeSet<Vec<Value>>, EvalError> {
    let adom = inst.adom();
    Ok(fit(fo_rel(q, inst, &adom, env)?, vars, &adom).rows)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::kb::{Relation, Schema};

    fn c(s: &str) -> Constant {
        Constant::Value(Value::Str(s.to_string()))
    }

    #[test]
    fn concept_answers() {
        let a = ABox::parse(r#"C("a") C("b")"#).unwrap();
        let q = Ucq::parse("[ C(?x) ]").unwrap();
        assert_eq!(eval_ucq(&q, &a, &Env::new()), [vec![c("a")], vec![c("b")]].into());
    }

    #[test]
    fn boolean_projection() {
        let a = ABox::parse(r#"P("a", "b")"#).unwrap();
        let q = Ucq::parse("[ P(?x, _) ]").unwrap();
        let boolean = Ucq { answer_vars: vec![], disjuncts: vec![Cq { head: vec![], atoms: q.disjuncts[0].atoms.clone() }] };
        assert_eq!(eval_ucq(&boolean, &a, &Env::new()), [vec![]].into());
    }

    #[test]
    fn env_binds_answer_variables() {
        let a = ABox::parse(r#"P("a", "b") P("c", "d")"#).unwrap();
        let q = Ucq::parse("[ P(?x, ?y) ]").unwrap();
        let env = Env::from([("x".to_string(), c("c"))]);
        assert_eq!(eval_ucq(&q, &a, &env), [vec![c("c"), c("d")]].into());
    }

    #[test]
    fn empty_union_never_answers() {
        let a = ABox::parse(r#"C("a")"#).unwrap();
        assert!(eval_ucq(&Ucq::parse("[ false ]").unwrap(), &a, &Env::new()).is_empty());
    }

    #[test]
    fn ecq_complement_over_adom() {
        let t = TBox::parse("A <= B").unwrap();
        let a = ABox::parse(r#"A("a") B("b")"#).unwrap();
        let q = Ecq::parse("not [A(?x)]").unwrap();
        assert_eq!(eval_ecq(&q, &a, &t, &Env::new()), [vec![c("b")]].into());
        let b = Ecq::parse("[B(?x)]").unwrap();
        assert_eq!(eval_ecq(&b, &ABox::parse(r#"A("a")"#).unwrap(), &t, &Env::new()), [vec![c("a")]].into());
    }

    #[test]
    fn ecq_boolean_exists() {
        let a = ABox::parse(r#"C("a")"#).unwrap();
        let q = Ecq::parse("exists ?x . [C(?x)]").unwrap();
        assert_eq!(eval_ecq(&q, &a, &TBox::new(), &Env::new()), [vec![]].into());
        assert!(eval_ecq(&q, &ABox::new(), &TBox::new(), &Env::new()).is_empty());
    }

    #[test]
    fn double_negation() {
        let a = ABox::parse(r#"C("a") D("b") P("a", "b")"#).unwrap();
        for s in ["[C(?x)]", "exists ?y . [P(?x, ?y)]", "[C(?x)] and not [D(?x)]"] {
            let q = Ecq::parse(s).unwrap();
            let nn = Ecq::not(Ecq::not(q.clone()));
            assert_eq!(eval_ecq_plain(&q, &a, &Env::new()), eval_ecq_plain(&nn, &a, &Env::new()));
        }
    }

    fn inst(text: &str) -> DatabaseInstance {
        let s = Schema::new(vec![
            Relation { name: "R".into(), columns: vec!["a".into(), "b".into()] },
            Relation { name: "S".into(), columns: vec!["a".into()] },
        ])
        .unwrap();
        DatabaseInstance::parse(Arc::new(s), text).unwrap()
    }

    fn leaf(text: &str, vars: &[&str]) -> FoQuery {
        let mut cur = crate::syntax::Cursor::new(text).unwrap();
        let (atoms, filters) = crate::query::parse_source_items(&mut cur).unwrap();
        let vars: Vec<Var> = vars.iter().map(|v| v.to_string()).collect();
        let output = vars.iter().map(|v| SrcTerm::Var(v.clone())).collect();
        FoQuery::Leaf(SourceLeaf { vars, disjuncts: vec![SourceQuery { atoms, filters, output }] })
    }

    #[test]
    fn fo_select_with_filter() {
        let i = inst("R(1, 2) R(3, 4)");
        let q = leaf("R(?x, ?y), ?y = 2", &["x", "y"]);
        assert_eq!(eval_fo(&q, &i, &FoEnv::new()).unwrap(), [vec![Value::Int(1), Value::Int(2)]].into());
    }

    #[test]
    fn fo_not_is_complement() {
        let i = inst("S(1) R(2, 3)");
        let q = FoQuery::not(leaf("S(?x)", &["x"]));
        assert_eq!(eval_fo(&q, &i, &FoEnv::new()).unwrap(), [vec![Value::Int(2)], vec![Value::Int(3)]].into());
    }

    #[test]
    fn fo_incomparable_types() {
        let i = inst(r#"R(1, "a")"#);
        let q = leaf("R(?x, ?y), ?x < ?y", &["x"]);
        assert!(matches!(eval_fo(&q, &i, &FoEnv::new()), Err(EvalError::Incomparable { .. })));
        let ok = leaf("R(?x, ?y), ?x != ?y", &["x"]);
        assert_eq!(eval_fo(&ok, &i, &FoEnv::new()).unwrap().len(), 1);
    }

    #[test]
    fn fo_exists_and_or() {
        let i = inst("R(1, 2) S(3)");
        let q = FoQuery::or(FoQuery::exists("y", leaf("R(?x, ?y)", &["x", "y"])), leaf("S(?x)", &["x"]));
        assert_eq!(eval_fo(&q, &i, &FoEnv::new()).unwrap(), [vec![Value::Int(1)], vec![Value::Int(3)]].into());
    }
}
