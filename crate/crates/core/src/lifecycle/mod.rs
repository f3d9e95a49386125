//! The dynamic side: a guarded add/delete action system over a relational
//! schema, and the transition systems it generates.
//!
//! ```text
//! schema F(flag)
//! pool flag { 0, 1 }
//! init { F(0) }
//! action toggle(?v: flag, ?w: flag)
//!   pre: F(?v), ?v != ?w
//!   del: F(?v)
//!   add: F(?w)
//! ```

mod rts;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, EvalError, ModelError, ParseError};
use crate::kb::{join, parse_fact, parse_value, DatabaseInstance, Schema, Value};
use crate::mapping::{parse_relation_decl, ObdaSystem};
use crate::query::{eval_source_with, parse_source_items, Filter, FoEnv, RelAtom, SourceQuery, SrcTerm, Var};
use crate::syntax::{Cursor, Tok};

pub use rts::{build_rts, sts_abox, Governance, Sts, TransitionSystem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamDomain {
    /// Values of a declared pool.
    Pool(String),
    /// Values of the current instance.
    Adom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: Var,
    pub domain: ParamDomain,
}

/// `R(t1, ..., tn)` with parameters or literals as terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactTemplate {
    pub relation: String,
    pub args: Vec<SrcTerm>,
}

impl FactTemplate {
    fn ground(&self, g: &BTreeMap<Var, Value>) -> Vec<Value> {
        self.args
            .iter()
            .map(|t| match t {
                SrcTerm::Var(v) => g[v].clone(),
                SrcTerm::Val(x) => x.clone(),
            })
            .collect()
    }
}

impl fmt::Display for FactTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.relation, join(&self.args))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub params: Vec<Param>,
    pub pre_atoms: Vec<RelAtom>,
    pub pre_filters: Vec<Filter>,
    pub del: Vec<FactTemplate>,
    pub add: Vec<FactTemplate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSystem {
    pub schema: Arc<Schema>,
    pub pools: BTreeMap<String, BTreeSet<Value>>,
    pub init: DatabaseInstance,
    pub actions: Vec<Action>,
}

impl ActionSystem {
    /// Check parameters, templates and preconditions against the schema.
    pub fn validate(&self) -> Result<(), ModelError> {
        for a in &self.actions {
            let params: BTreeSet<&Var> = a.params.iter().map(|p| &p.name).collect();
            for p in &a.params {
                if let ParamDomain::Pool(pool) = &p.domain {
                    if !self.pools.contains_key(pool) {
                        return Err(ModelError::UnknownPool { action: a.name.clone(), param: p.name.clone(), pool: pool.clone() });
                    }
                }
            }
            for atom in &a.pre_atoms {
                self.schema.check_atom(&atom.relation, atom.args.len())?;
            }
            let bound: BTreeSet<&Var> = a.pre_atoms.iter().flat_map(RelAtom::vars).chain(params.iter().copied()).collect();
            for f in &a.pre_filters {
                if let Some(v) = f.vars().find(|v| !bound.contains(v)) {
                    return Err(ModelError::UnsafeVariable(v.clone()));
                }
            }
            for t in a.del.iter().chain(&a.add) {
                self.schema.check_atom(&t.relation, t.args.len())?;
                if let Some(v) = t.args.iter().filter_map(SrcTerm::as_var).find(|v| !params.contains(v)) {
                    return Err(ModelError::UndeclaredParam { action: a.name.clone(), var: v.clone() });
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        parse_system(text)
    }

    /// Every parameter assignment of `a` enabled in `i`.
    pub fn groundings(&self, a: &Action, i: &DatabaseInstance) -> Result<Vec<BTreeMap<Var, Value>>, EvalError> {
        let in_atoms: BTreeSet<&Var> = a.pre_atoms.iter().flat_map(RelAtom::vars).collect();
        let adom = i.adom();
        let domain = |p: &Param| -> Vec<Value> {
            match &p.domain {
                ParamDomain::Pool(pool) => self.pools[pool].iter().cloned().collect(),
                ParamDomain::Adom => adom.iter().cloned().collect(),
            }
        };
        let free: Vec<(&Var, Vec<Value>)> =
            a.params.iter().filter(|p| !in_atoms.contains(&p.name)).map(|p| (&p.name, domain(p))).collect();
        let names: Vec<Var> = a.params.iter().map(|p| p.name.clone()).collect();
        let query = SourceQuery {
            atoms: a.pre_atoms.clone(),
            filters: a.pre_filters.clone(),
            output: names.iter().map(|n| SrcTerm::Var(n.clone())).collect(),
        };
        let mut out = Vec::new();
        let mut env = FoEnv::new();
        self.ground_free(&free, 0, &mut env, &mut |env| {
            for row in eval_source_with(&query, &names, i, env)? {
                let pooled_ok = a.params.iter().zip(&row).all(|(p, v)| match &p.domain {
                    ParamDomain::Pool(pool) => self.pools[pool].contains(v),
                    ParamDomain::Adom => true,
                });
                if pooled_ok {
                    out.push(names.iter().cloned().zip(row).collect());
                }
            }
            Ok(())
        })?;
        Ok(out)
    }

    fn ground_free(
        &self,
        free: &[(&Var, Vec<Value>)],
        k: usize,
        env: &mut FoEnv,
        f: &mut dyn FnMut(&FoEnv) -> Result<(), EvalError>,
    ) -> Result<(), EvalError> {
        if k == free.len() {
            return f(env);
        }
        let (name, values) = &free[k];
        for v in values {
            env.insert((*name).clone(), v.clone());
            self.ground_free(free, k + 1, env, f)?;
        }
        env.remove(*name);
        Ok(())
    }

    /// All instances reachable from `i` by one grounded action, sorted by
    /// canonical form.
    pub fn successors(&self, i: &DatabaseInstance) -> Result<Vec<DatabaseInstance>, EvalError> {
        let mut out: BTreeMap<Vec<u8>, DatabaseInstance> = BTreeMap::new();
        for a in &self.actions {
            for g in self.groundings(a, i)? {
                let mut next = i.clone();
                for t in &a.del {
                    next.remove(&t.relation, &t.ground(&g));
                }
                for t in &a.add {
                    next.insert(&t.relation, t.ground(&g)).expect("templates are checked against the schema");
                }
                out.entry(next.canonical_form()).or_insert(next);
            }
        }
        Ok(out.into_values().collect())
    }
}

pub fn successors(sys: &ActionSystem, i: &DatabaseInstance) -> Result<Vec<DatabaseInstance>, EvalError> {
    sys.successors(i)
}

/// An action system together with the OBDA specification of its states.
#[derive(Clone, Debug)]
pub struct SasSystem {
    pub actions: ActionSystem,
    pub obda: ObdaSystem,
}

impl SasSystem {
    pub fn new(actions: ActionSystem, obda: ObdaSystem) -> Result<Self, ModelError> {
        if **obda.schema() != *actions.schema {
            return Err(ModelError::SchemaMismatch(format!(
                "mappings use\n{}but the system declares\n{}",
                obda.schema(),
                actions.schema
            )));
        }
        Ok(SasSystem { actions, obda })
    }
}

fn parse_system(text: &str) -> Result<ActionSystem, Error> {
    let mut cur = Cursor::new(text)?;
    let mut schema = Schema::default();
    let mut pools: BTreeMap<String, BTreeSet<Value>> = BTreeMap::new();
    let mut init_facts: Vec<(String, Vec<Value>)> = Vec::new();
    let mut actions = Vec::new();
    while !cur.at_eof() {
        if cur.eat_kw("schema") {
            schema.add(parse_relation_decl(&mut cur)?)?;
        } else if cur.eat_kw("pool") {
            let name = cur.ident()?;
            cur.expect(&Tok::LBrace)?;
            let mut values = BTreeSet::new();
            if !cur.eat(&Tok::RBrace) {
                loop {
                    values.insert(parse_value(&mut cur)?);
                    if cur.eat(&Tok::RBrace) {
                        break;
                    }
                    cur.expect(&Tok::Comma)?;
                }
            }
            pools.entry(name).or_default().extend(values);
        } else if cur.eat_kw("init") {
            cur.expect(&Tok::LBrace)?;
            while !cur.eat(&Tok::RBrace) {
                init_facts.push(parse_fact(&mut cur)?);
                cur.eat(&Tok::Comma);
            }
        } else if cur.eat_kw("action") {
            actions.push(parse_action(&mut cur)?);
        } else {
            return Err(cur.unexpected("`schema`, `pool`, `init` or `action`").into());
        }
    }
    let schema = Arc::new(schema);
    let mut init = DatabaseInstance::empty(schema.clone());
    for (rel, tuple) in init_facts {
        init.insert(&rel, tuple)?;
    }
    let sys = ActionSystem { schema, pools, init, actions };
    sys.validate()?;
    Ok(sys)
}

fn parse_action(cur: &mut Cursor) -> Result<Action, ParseError> {
    let name = cur.ident()?;
    cur.expect(&Tok::LParen)?;
    let mut params = Vec::new();
    if !cur.eat(&Tok::RParen) {
        loop {
            let pname = cur.var()?;
            cur.expect(&Tok::Colon)?;
            let d = cur.ident()?;
            let domain = if d == "adom" { ParamDomain::Adom } else { ParamDomain::Pool(d) };
            params.push(Param { name: pname, domain });
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma)?;
        }
    }
    let (pre_atoms, pre_filters) = if section(cur, "pre")? { parse_source_items(cur)? } else { (Vec::new(), Vec::new()) };
    let del = if section(cur, "del")? { parse_templates(cur)? } else { Vec::new() };
    let add = if section(cur, "add")? { parse_templates(cur)? } else { Vec::new() };
    Ok(Action { name, params, pre_atoms, pre_filters, del, add })
}

/// `kw:` opening an optional action section.
fn section(cur: &mut Cursor, kw: &str) -> Result<bool, ParseError> {
    if *cur.peek_at(1) != Tok::Colon || !cur.eat_kw(kw) {
        return Ok(false);
    }
    cur.expect(&Tok::Colon)?;
    Ok(true)
}

/// Comma-separated fact templates; possibly none.
fn parse_templates(cur: &mut Cursor) -> Result<Vec<FactTemplate>, ParseError> {
    let mut out = Vec::new();
    while matches!(cur.peek(), Tok::Ident(_)) && *cur.peek_at(1) == Tok::LParen {
        let relation = cur.ident()?;
        cur.next();
        let mut args = Vec::new();
        if !cur.eat(&Tok::RParen) {
            loop {
                args.push(match cur.peek().clone() {
                    Tok::Var(v) => {
                        cur.next();
                        SrcTerm::Var(v)
                    }
                    _ => SrcTerm::Val(parse_value(cur)?),
                });
                if cur.eat(&Tok::RParen) {
                    break;
                }
                cur.expect(&Tok::Comma)?;
            }
        }
        out.push(FactTemplate { relation, args });
        if !cur.eat(&Tok::Comma) {
            break;
        }
    }
    Ok(out)
}

impl fmt::Display for ActionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.schema.fmt(f)?;
        for (name, values) in &self.pools {
            let vs: Vec<String> = values.iter().map(ToString::to_string).collect();
            writeln!(f, "pool {name} {{ {} }}", vs.join(", "))?;
        }
        writeln!(f, "init {{")?;
        for (rel, t) in self.init.facts() {
            writeln!(f, "  {rel}({})", join(t))?;
        }
        writeln!(f, "}}")?;
        for a in &self.actions {
            let params: Vec<String> = a
                .params
                .iter()
                .map(|p| match &p.domain {
                    ParamDomain::Pool(pool) => format!("?{}: {pool}", p.name),
                    ParamDomain::Adom => format!("?{}: adom", p.name),
                })
                .collect();
            writeln!(f, "action {}({})", a.name, params.join(", "))?;
            let mut pre: Vec<String> = a.pre_atoms.iter().map(|x| format!("{}({})", x.relation, join(&x.args))).collect();
            pre.extend(a.pre_filters.iter().map(ToString::to_string));
            if pre.is_empty() {
                pre.push("true".to_string());
            }
            writeln!(f, "  pre: {}", pre.join(", "))?;
            writeln!(f, "  del: {}", join(&a.del))?;
            writeln!(f, "  add: {}", join(&a.add))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TOGGLE: &str = "
        schema F(flag)
        pool flag { 0, 1 }
        init { F(0) }
        action toggle(?v: flag, ?w: flag)
          pre: F(?v), ?v != ?w
          del: F(?v)
          add: F(?w)
    ";

    #[test]
    fn parses_toggle() {
        let s = ActionSystem::parse(TOGGLE).unwrap();
        assert_eq!(s.actions.len(), 1);
        assert_eq!(s.init.len(), 1);
        assert_eq!(ActionSystem::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn toggle_successor() {
        let s = ActionSystem::parse(TOGGLE).unwrap();
        let next = s.successors(&s.init).unwrap();
        assert_eq!(next.len(), 1);
        assert!(next[0].contains("F", &[Value::Int(1)]));
        assert_eq!(next[0].len(), 1);
    }

    #[test]
    fn no_actions_no_successors() {
        let s = ActionSystem::parse("schema F(flag) init { F(0) }").unwrap();
        assert!(s.successors(&s.init).unwrap().is_empty());
    }

    #[test]
    fn undeclared_template_variable() {
        let err = ActionSystem::parse("schema F(a) action bad(?x: adom) pre: F(?x) del: add: F(?y)").unwrap_err();
        assert!(matches!(err, Error::Model(ModelError::UndeclaredParam { .. })), "{err}");
    }

    #[test]
    fn init_arity_checked() {
        assert!(matches!(ActionSystem::parse("schema F(a) init { F(1, 2) }"), Err(Error::Model(ModelError::ArityMismatch { .. }))));
    }

    #[test]
    fn pooled_params_outside_atoms_and_filters() {
        let s = ActionSystem::parse(
            "schema R(a) pool p { 1, 2, 3 } init { R(1) }
             action grow(?x: adom, ?y: p) pre: R(?x), ?y > ?x del: add: R(?y)",
        )
        .unwrap();
        let g = s.groundings(&s.actions[0], &s.init).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(s.successors(&s.init).unwrap().len(), 2);
    }

    #[test]
    fn unchanged_instance_only_when_produced() {
        let s = ActionSystem::parse("schema R(a) init { R(1) } action noop(?x: adom) pre: R(?x) del: R(?x) add: R(?x)").unwrap();
        let next = s.successors(&s.init).unwrap();
        assert_eq!(next, vec![s.init.clone()]);
    }
}
