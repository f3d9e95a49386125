//! Exhaustive evaluators: naive backtracking for conjunctive queries and
//! plain assignment enumeration for everything first-order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use sasv::mapping::TargetTerm;
use sasv::query::{CmpOp, Filter, SourceQuery, SrcTerm, Term, Var};
use sasv::{ABox, Constant, DatabaseInstance, Ecq, FoQuery, MappingSet, Ucq, Value};

type Fact = (String, Vec<Constant>);

fn facts(a: &ABox) -> Vec<Fact> {
    let mut out: Vec<Fact> = a.concept_facts().map(|(n, c)| (n.to_string(), vec![c.clone()])).collect();
    out.extend(a.role_facts().map(|(n, x, y)| (n.to_string(), vec![x.clone(), y.clone()])));
    out
}

fn unify(t: &Term, c: &Constant, asg: &mut HashMap<Var, Constant>, trail: &mut Vec<Var>) -> bool {
    match t {
        Term::Const(k) => k == c,
        Term::Var(v) => match asg.get(v) {
            Some(b) => b == c,
            None => {
                asg.insert(v.clone(), c.clone());
                trail.push(v.clone());
                true
            }
        },
    }
}

fn search(atoms: &[sasv::query::Atom], facts: &[Fact], asg: &mut HashMap<Var, Constant>, emit: &mut dyn FnMut(&HashMap<Var, Constant>)) {
    let Some((first, rest)) = atoms.split_first() else {
        emit(asg);
        return;
    };
    for (name, args) in facts {
        if *name != first.predicate || args.len() != first.args.len() {
            continue;
        }
        let mut trail = Vec::new();
        if first.args.iter().zip(args).all(|(t, c)| unify(t, c, asg, &mut trail)) {
            search(rest, facts, asg, emit);
        }
        for v in trail {
            asg.remove(&v);
        }
    }
}

/// Answers of a UCQ read over the ABox as a plain database.
pub fn ucq_answers(q: &Ucq, a: &ABox) -> BTreeSet<Vec<Constant>> {
    let facts = facts(a);
    let mut out = BTreeSet::new();
    for d in &q.disjuncts {
        search(&d.atoms, &facts, &mut HashMap::new(), &mut |asg| {
            let row: Option<Vec<Constant>> = d
                .head
                .iter()
                .map(|t| match t {
                    Term::Const(c) => Some(c.clone()),
                    Term::Var(v) => asg.get(v).cloned(),
                })
                .collect();
            if let Some(row) = row {
                out.insert(row);
            }
        });
    }
    out
}

fn ucq_holds(q: &Ucq, facts: &[Fact], env: &BTreeMap<Var, Constant>) -> bool {
    q.disjuncts.iter().any(|d| {
        let mut asg = HashMap::new();
        let mut trail = Vec::new();
        for (t, v) in d.head.iter().zip(&q.answer_vars) {
            if !unify(t, &env[v], &mut asg, &mut trail) {
                return false;
            }
        }
        let mut found = false;
        search(&d.atoms, facts, &mut asg, &mut |_| found = true);
        found
    })
}

fn ecq_holds_in(q: &Ecq, facts: &[Fact], adom: &BTreeSet<Constant>, env: &mut BTreeMap<Var, Constant>) -> bool {
    match q {
        Ecq::Embedded(u) => ucq_holds(u, facts, env),
        Ecq::Not(q) => !ecq_holds_in(q, facts, adom, env),
        Ecq::And(a, b) => ecq_holds_in(a, facts, adom, env) && ecq_holds_in(b, facts, adom, env),
        Ecq::Exists(v, q) => {
            let saved = env.remove(v);
            let mut any = false;
            for c in adom {
                env.insert(v.clone(), c.clone());
                if ecq_holds_in(q, facts, adom, env) {
                    any = true;
                    break;
                }
            }
            env.remove(v);
            if let Some(s) = saved {
                env.insert(v.clone(), s);
            }
            any
        }
    }
}

/// Truth of `q` over `a` under a total assignment of its free variables.
pub fn ecq_holds(q: &Ecq, a: &ABox, env: &BTreeMap<Var, Constant>) -> bool {
    ecq_holds_in(q, &facts(a), &a.adom(), &mut env.clone())
}

fn assignments<C: Clone + Ord>(vars: &[Var], dom: &BTreeSet<C>) -> Vec<BTreeMap<Var, C>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|m| {
                dom.iter().map(move |c| {
                    let mut m = m.clone();
                    m.insert(v.clone(), c.clone());
                    m
                })
            })
            .collect();
    }
    out
}

/// Answers of an ECQ over its free variables, in first-occurrence order,
/// by trying every assignment from the active domain.
pub fn ecq_answers(q: &Ecq, a: &ABox) -> BTreeSet<Vec<Constant>> {
    let facts = facts(a);
    let adom = a.adom();
    let fv = q.free_vars();
    assignments(&fv, &adom)
        .into_iter()
        .filter_map(|mut env| ecq_holds_in(q, &facts, &adom, &mut env).then(|| fv.iter().map(|v| env[v].clone()).collect()))
        .collect()
}

fn compare(l: &Value, op: CmpOp, r: &Value) -> bool {
    let ord = match (l, r) {
        (Value::Int(a), Value::Int(b)) => a.cmp(b),
        (Value::Str(a), Value::Str(b)) => a.cmp(b),
        (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
        _ => return matches!(op, CmpOp::Ne),
    };
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

fn src_value(t: &SrcTerm, asg: &HashMap<Var, Value>) -> Option<Value> {
    match t {
        SrcTerm::Val(v) => Some(v.clone()),
        SrcTerm::Var(v) => asg.get(v).cloned(),
    }
}

fn src_unify(t: &SrcTerm, c: &Value, asg: &mut HashMap<Var, Value>, trail: &mut Vec<Var>) -> bool {
    match t {
        SrcTerm::Val(k) => k == c,
        SrcTerm::Var(v) => match asg.get(v) {
            Some(b) => b == c,
            None => {
                asg.insert(v.clone(), c.clone());
                trail.push(v.clone());
                true
            }
        },
    }
}

fn filters_hold(filters: &[Filter], asg: &HashMap<Var, Value>) -> bool {
    filters.iter().all(|f| match (src_value(&f.left, asg), src_value(&f.right, asg)) {
        (Some(l), Some(r)) => compare(&l, f.op, &r),
        _ => false,
    })
}

fn src_search(q: &SourceQuery, k: usize, i: &DatabaseInstance, asg: &mut HashMap<Var, Value>, emit: &mut dyn FnMut(&HashMap<Var, Value>)) {
    let Some(atom) = q.atoms.get(k) else {
        if filters_hold(&q.filters, asg) {
            emit(asg);
        }
        return;
    };
    for tuple in i.tuples(&atom.relation) {
        let mut trail = Vec::new();
        if atom.args.iter().zip(tuple).all(|(t, c)| src_unify(t, c, asg, &mut trail)) {
            src_search(q, k + 1, i, asg, emit);
        }
        for v in trail {
            asg.remove(&v);
        }
    }
}

/// Rows of a select-project-join query.
pub fn source_rows(q: &SourceQuery, i: &DatabaseInstance) -> BTreeSet<Vec<Value>> {
    let mut out = BTreeSet::new();
    src_search(q, 0, i, &mut HashMap::new(), &mut |asg| {
        if let Some(row) = q.output.iter().map(|t| src_value(t, asg)).collect::<Option<Vec<_>>>() {
            out.insert(row);
        }
    });
    out
}

fn source_holds(q: &SourceQuery, vars: &[Var], i: &DatabaseInstance, env: &BTreeMap<Var, Value>) -> bool {
    let mut asg = HashMap::new();
    let mut trail = Vec::new();
    for (t, v) in q.output.iter().zip(vars) {
        if !src_unify(t, &env[v], &mut asg, &mut trail) {
            return false;
        }
    }
    let mut found = false;
    src_search(q, 0, i, &mut asg, &mut |_| found = true);
    found
}

/// Truth of a relational query under a total assignment of its free
/// variables; quantifiers range over `adom`.
pub fn fo_holds(q: &FoQuery, i: &DatabaseInstance, adom: &BTreeSet<Value>, env: &BTreeMap<Var, Value>) -> bool {
    match q {
        FoQuery::Leaf(l) => l.disjuncts.iter().any(|d| source_holds(d, &l.vars, i, env)),
        FoQuery::Not(q) => !fo_holds(q, i, adom, env),
        FoQuery::And(a, b) => fo_holds(a, i, adom, env) && fo_holds(b, i, adom, env),
        FoQuery::Or(a, b) => fo_holds(a, i, adom, env) || fo_holds(b, i, adom, env),
        FoQuery::Exists(v, q) => adom.iter().any(|c| {
            let mut inner = env.clone();
            inner.insert(v.clone(), c.clone());
            fo_holds(q, i, adom, &inner)
        }),
    }
}

/// Every assignment of `vars` over the instance's active domain that makes
/// `q` true.
pub fn fo_answers(q: &FoQuery, i: &DatabaseInstance, vars: &[Var]) -> BTreeSet<Vec<Value>> {
    let adom = i.adom();
    assignments(vars, &adom)
        .into_iter()
        .filter(|env| fo_holds(q, i, &adom, env))
        .map(|env| vars.iter().map(|v| env[v].clone()).collect())
        .collect()
}

pub(crate) fn value_assignments(vars: &[Var], dom: &BTreeSet<Value>) -> Vec<BTreeMap<Var, Value>> {
    assignments(vars, dom)
}

/// The virtual ABox, recomputed mapping by mapping from source rows.
pub fn materialize(m: &MappingSet, i: &DatabaseInstance) -> ABox {
    let mut a = ABox::new();
    for ma in m.assertions() {
        let vars: Vec<&Var> = ma.source.output.iter().filter_map(SrcTerm::as_var).collect();
        for row in source_rows(&ma.source, i) {
            let val: HashMap<&Var, &Value> = vars.iter().copied().zip(&row).collect();
            let build = |t: &TargetTerm| match t {
                TargetTerm::Var(v) => Constant::Value(val[v].clone()),
                TargetTerm::Template { symbol, args } => Constant::term(symbol, args.iter().map(|v| val[v].clone()).collect()),
            };
            for t in &ma.target {
                match t.args.as_slice() {
                    [x] => {
                        a.add_concept(&t.predicate, build(x));
                    }
                    [x, y] => {
                        a.add_role(&t.predicate, build(x), build(y));
                    }
                    _ => unreachable!("targets are concepts or roles"),
                }
            }
        }
    }
    a
}
