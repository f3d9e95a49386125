//! Successors by exhaustive grounding: every parameter over its domain and
//! every other precondition variable over the active domain.

use std::collections::{BTreeMap, BTreeSet};

use sasv::lifecycle::{Action, ParamDomain};
use sasv::query::{SrcTerm, Var};
use sasv::{ActionSystem, DatabaseInstance, Value};

fn ground(t: &SrcTerm, g: &BTreeMap<Var, Value>) -> Value {
    match t {
        SrcTerm::Val(v) => v.clone(),
        SrcTerm::Var(v) => g[v].clone(),
    }
}

/// Parameter assignments of `a` enabled in `i`.
pub fn groundings(sys: &ActionSystem, a: &Action, i: &DatabaseInstance) -> BTreeSet<BTreeMap<Var, Value>> {
    let adom = i.adom();
    let mut domains: Vec<(Var, BTreeSet<Value>)> = a
        .params
        .iter()
        .map(|p| {
            let d = match &p.domain {
                ParamDomain::Pool(name) => sys.pools[name].clone(),
                ParamDomain::Adom => adom.clone(),
            };
            (p.name.clone(), d)
        })
        .collect();
    for atom in &a.pre_atoms {
        for v in atom.vars() {
            if !domains.iter().any(|(n, _)| n == v) {
                domains.push((v.clone(), adom.clone()));
            }
        }
    }
    let mut envs = vec![BTreeMap::new()];
    for (v, dom) in &domains {
        envs = envs
            .into_iter()
            .flat_map(|e: BTreeMap<Var, Value>| {
                dom.iter().map(move |c| {
                    let mut e = e.clone();
                    e.insert(v.clone(), c.clone());
                    e
                })
            })
            .collect();
    }
    envs.into_iter()
        .filter(|g| {
            a.pre_atoms.iter().all(|at| i.contains(&at.relation, &at.args.iter().map(|t| ground(t, g)).collect::<Vec<_>>()))
                && a.pre_filters.iter().all(|f| {
                    let (l, r) = (ground(&f.left, g), ground(&f.right, g));
                    match f.op {
                        sasv::query::CmpOp::Eq => l == r,
                        sasv::query::CmpOp::Ne => l != r,
                        sasv::query::CmpOp::Lt => l < r,
                        sasv::query::CmpOp::Le => l <= r,
                        sasv::query::CmpOp::Gt => l > r,
                        sasv::query::CmpOp::Ge => l >= r,
                    }
                })
        })
        .map(|g| a.params.iter().map(|p| (p.name.clone(), g[&p.name].clone())).collect())
        .collect()
}

/// Canonical forms of all one-step successors of `i`.
pub fn successors(sys: &ActionSystem, i: &DatabaseInstance) -> BTreeSet<Vec<u8>> {
    let mut out = BTreeSet::new();
    for a in &sys.actions {
        for g in groundings(sys, a, i) {
            let mut next = i.clone();
            for t in &a.del {
                next.remove(&t.relation, &t.args.iter().map(|x| ground(x, &g)).collect::<Vec<_>>());
            }
            for t in &a.add {
                next.insert(&t.relation, t.args.iter().map(|x| ground(x, &g)).collect()).expect("templates fit the schema");
            }
            out.insert(next.canonical_form());
        }
    }
    out
}
