//! Seeded random generators for every artifact of the pipeline.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng as _;

use sasv::lifecycle::{Action, FactTemplate, Param, ParamDomain};
use sasv::mapping::{MappingAssertion, TargetAtom, TargetTerm};
use sasv::ontology::{BasicConcept, GeneralConcept, RoleExpr};
use sasv::query::{Atom, CmpOp, Cq, Filter, RelAtom, SourceLeaf, SourceQuery, SrcTerm, Term, Var};
use sasv::temporal::{property_vocabulary, validate, Ctl, CtlAFormula, CtlEqlFormula, Quant, QuantBranch};
use sasv::{
    build_rts, ABox, ActionSystem, Constant, DatabaseInstance, Ecq, FoQuery, Governance, MappingSet, ObdaSystem,
    Relation, SasSystem, Schema, TBox, TransitionSystem, Ucq, Value, Vocabulary,
};

use crate::Rng;

pub const CONCEPTS: [&str; 5] = ["C0", "C1", "C2", "C3", "C4"];
pub const ROLES: [&str; 3] = ["P0", "P1", "P2"];
pub const INDIVIDUALS: [&str; 5] = ["a", "b", "c", "d", "e"];
const SOURCE_VARS: [&str; 4] = ["x", "y", "z", "w"];

fn pick<T: Clone>(rng: &mut Rng, xs: &[T]) -> T {
    xs.choose(rng).expect("nonempty choice").clone()
}

fn role(rng: &mut Rng) -> RoleExpr {
    let name = pick(rng, &ROLES);
    if rng.gen_bool(0.3) {
        RoleExpr::inv(name)
    } else {
        RoleExpr::named(name)
    }
}

fn basic(rng: &mut Rng) -> BasicConcept {
    if rng.gen_bool(0.65) {
        BasicConcept::named(pick(rng, &CONCEPTS))
    } else {
        BasicConcept::Exists(role(rng))
    }
}

/// A TBox over [`CONCEPTS`] and [`ROLES`] with at most `max` assertions,
/// one or two of them disjointness assertions when `disjoint` is set.
pub fn tbox(rng: &mut Rng, max: usize, disjoint: bool) -> TBox {
    let mut t = TBox::new();
    let extra = if disjoint { rng.gen_range(1..=2) } else { 0 };
    let n = rng.gen_range(1..=max.saturating_sub(extra).max(1));
    for _ in 0..n {
        match rng.gen_range(0..10) {
            0..=5 => t.add_concept_inclusion(basic(rng), GeneralConcept::Basic(basic(rng))),
            6..=7 => t.add_concept_inclusion(basic(rng), GeneralConcept::QualifiedExists(role(rng), basic(rng))),
            _ => t.add_role_inclusion(role(rng), role(rng)),
        }
    }
    for _ in 0..extra {
        if rng.gen_bool(0.75) {
            t.add_disjoint(basic(rng), basic(rng));
        } else {
            t.add_role_disjoint(role(rng), role(rng));
        }
    }
    t
}

pub fn individual(rng: &mut Rng) -> Constant {
    Constant::from(pick(rng, &INDIVIDUALS))
}

pub fn abox(rng: &mut Rng, max_facts: usize) -> ABox {
    let mut a = ABox::new();
    for _ in 0..rng.gen_range(max_facts.div_ceil(2)..=max_facts) {
        if rng.gen_bool(0.5) {
            let c = individual(rng);
            a.add_concept(pick(rng, &CONCEPTS), c);
        } else {
            let (x, y) = (individual(rng), individual(rng));
            a.add_role(pick(rng, &ROLES), x, y);
        }
    }
    a
}

/// Predicate names a generated query may use.
#[derive(Clone, Copy)]
pub struct Names<'a> {
    pub concepts: &'a [&'a str],
    pub roles: &'a [&'a str],
}

pub const ALL_NAMES: Names<'static> = Names { concepts: &CONCEPTS, roles: &ROLES };

/// Concept and role names of a vocabulary, borrowed for [`Names`].
pub fn names_of(v: &Vocabulary) -> (Vec<&str>, Vec<&str>) {
    (v.concepts.iter().map(String::as_str).collect(), v.roles.iter().map(String::as_str).collect())
}

/// Mostly the names `v` uses, sometimes all of them.
pub fn names_in<'a>(rng: &mut Rng, v: &'a (Vec<&'a str>, Vec<&'a str>)) -> Names<'a> {
    if rng.gen_bool(0.2) || (v.0.is_empty() && v.1.is_empty()) {
        ALL_NAMES
    } else {
        Names { concepts: &v.0, roles: &v.1 }
    }
}

fn oriented_role(rng: &mut Rng, names: Names, a: &str, b: &str) -> Atom {
    let p = pick(rng, names.roles);
    if rng.gen_bool(0.5) {
        Atom::role(p, Term::var(a), Term::var(b))
    } else {
        Atom::role(p, Term::var(b), Term::var(a))
    }
}

/// Atoms of a connected CQ over `x0, x1, ...`. The first `answers`
/// variables (at most two) occur in the result.
fn connected_atoms(rng: &mut Rng, names: Names, atoms: usize, answers: usize) -> Vec<Atom> {
    let mut vars = vec!["x0".to_string()];
    let mut out = Vec::new();
    if answers >= 2 && !names.roles.is_empty() {
        vars.push("x1".into());
        out.push(oriented_role(rng, names, "x0", "x1"));
    }
    while out.len() < atoms {
        let anchor = pick(rng, &vars);
        if names.roles.is_empty() || (!names.concepts.is_empty() && rng.gen_bool(0.4)) {
            out.push(Atom::concept(pick(rng, names.concepts), Term::Var(anchor)));
        } else {
            let other = if rng.gen_bool(0.3) {
                pick(rng, &vars)
            } else {
                let v = format!("x{}", vars.len());
                vars.push(v.clone());
                v
            };
            out.push(oriented_role(rng, names, &anchor, &other));
        }
    }
    out
}

fn replace_var(atoms: &mut [Atom], v: &str, t: &Term) {
    for a in atoms {
        for arg in &mut a.args {
            if arg.as_var().is_some_and(|x| x == v) {
                *arg = t.clone();
            }
        }
    }
}

/// A connected CQ with at most `max_atoms` atoms whose every match touches
/// an answer variable or an individual. A chase of depth equal to the atom
/// count is complete for such queries.
pub fn anchored_cq(rng: &mut Rng, max_atoms: usize) -> Ucq {
    let n = rng.gen_range(1..=max_atoms);
    let answers = rng.gen_range(0..=2);
    let mut atoms = connected_atoms(rng, ALL_NAMES, n, answers);
    if answers == 0 {
        let c = Term::Const(individual(rng));
        replace_var(&mut atoms, "x0", &c);
        return Ucq::single(vec![], atoms);
    }
    Ucq::single((0..answers).map(|i| format!("x{i}")).collect(), atoms)
}

fn target_constant(rng: &mut Rng) -> Constant {
    match rng.gen_range(0..3) {
        0 => Constant::term("f", vec![Value::Int(rng.gen_range(0..3))]),
        _ => Constant::Value(Value::Int(rng.gen_range(0..3))),
    }
}

/// A UCQ over `names` with up to two answer variables (one when there
/// are no roles) and occasional constants.
pub fn ucq(rng: &mut Rng, names: Names, max_atoms: usize, max_disjuncts: usize) -> Ucq {
    let answers = rng.gen_range(0..=if names.roles.is_empty() { 1 } else { 2 });
    let answer_vars: Vec<Var> = (0..answers).map(|i| format!("x{i}")).collect();
    let disjuncts = (0..rng.gen_range(1..=max_disjuncts))
        .map(|_| {
            let n = rng.gen_range(1..=max_atoms);
            let mut atoms = connected_atoms(rng, names, n, answers);
            let vars: BTreeSet<Var> = atoms.iter().flat_map(Atom::vars).cloned().collect();
            let inner: Vec<&Var> = vars.iter().filter(|v| !answer_vars.contains(v)).collect();
            if !inner.is_empty() && rng.gen_bool(0.2) {
                let v = pick(rng, &inner).clone();
                replace_var(&mut atoms, &v, &Term::Const(target_constant(rng)));
            }
            Cq::new(&answer_vars, atoms)
        })
        .collect();
    Ucq::new(answer_vars, disjuncts)
}

/// An ECQ whose free variables come from `scope`. Nested existentials bind
/// `v{n}` names, so `scope` should use that naming too.
pub fn ecq(rng: &mut Rng, names: Names, depth: usize, scope: &[Var]) -> Ecq {
    if depth == 0 || rng.gen_bool(0.3) {
        let cap = if names.roles.is_empty() { 1 } else { 2 };
        let k = rng.gen_range(0..=scope.len().min(cap));
        let chosen: Vec<Var> = scope.choose_multiple(rng, k).cloned().collect();
        let n = rng.gen_range(1..=2);
        let mut atoms = connected_atoms(rng, names, n, k);
        for (i, v) in chosen.iter().enumerate() {
            replace_var(&mut atoms, &format!("x{i}"), &Term::Var(v.clone()));
        }
        return Ecq::Embedded(Ucq::single(chosen, atoms));
    }
    match rng.gen_range(0..3) {
        0 => Ecq::not(ecq(rng, names, depth - 1, scope)),
        1 => Ecq::and(ecq(rng, names, depth - 1, scope), ecq(rng, names, depth - 1, scope)),
        _ => {
            let v = format!("v{}", scope.len());
            let mut inner = scope.to_vec();
            inner.push(v.clone());
            Ecq::exists(&v, ecq(rng, names, depth - 1, &inner))
        }
    }
}

pub fn int_values(n: i64) -> Vec<Value> {
    (0..n).map(Value::Int).collect()
}

/// Relations `T0, T1, ...` with arities drawn from `arities`.
pub fn schema(rng: &mut Rng, max_relations: usize, arities: &[usize]) -> Arc<Schema> {
    let rels = (0..rng.gen_range(1..=max_relations))
        .map(|i| Relation {
            name: format!("T{i}"),
            columns: (1..=pick(rng, arities)).map(|c| format!("c{c}")).collect(),
        })
        .collect();
    Arc::new(Schema::new(rels).expect("distinct names"))
}

pub fn instance(rng: &mut Rng, schema: &Arc<Schema>, values: &[Value], max_facts: usize) -> DatabaseInstance {
    let mut i = DatabaseInstance::empty(schema.clone());
    for _ in 0..rng.gen_range(0..=max_facts) {
        let r = pick(rng, schema.relations());
        let t = (0..r.arity()).map(|_| pick(rng, values)).collect();
        i.insert(&r.name, t).expect("arity matches");
    }
    i
}

fn target_term(rng: &mut Rng, vars: &[Var]) -> TargetTerm {
    match rng.gen_range(0..10) {
        0..=4 => TargetTerm::Var(pick(rng, vars)),
        5..=7 => TargetTerm::Template { symbol: "f".into(), args: vec![pick(rng, vars)] },
        _ => TargetTerm::Template { symbol: "g".into(), args: vec![pick(rng, vars), pick(rng, vars)] },
    }
}

/// Mapping assertions over `schema` with integer literals, targeting
/// [`CONCEPTS`] and [`ROLES`] through the templates `f/1` and `g/2`.
pub fn mappings(rng: &mut Rng, schema: &Arc<Schema>, max: usize) -> MappingSet {
    let vals = int_values(3);
    let mut out = Vec::new();
    for k in 0..rng.gen_range(1..=max) {
        let mut atoms: Vec<RelAtom> = (0..rng.gen_range(1..=2))
            .map(|_| {
                let r = pick(rng, schema.relations());
                let args = (0..r.arity())
                    .map(|_| if rng.gen_bool(0.85) { SrcTerm::var(pick(rng, &SOURCE_VARS)) } else { SrcTerm::Val(pick(rng, &vals)) })
                    .collect();
                RelAtom { relation: r.name, args }
            })
            .collect();
        let mut vars: Vec<Var> = Vec::new();
        for v in atoms.iter().flat_map(RelAtom::vars) {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        if vars.is_empty() {
            atoms[0].args[0] = SrcTerm::var("x");
            vars.push("x".into());
        }
        let mut filters = Vec::new();
        if rng.gen_bool(0.3) {
            let left = SrcTerm::Var(pick(rng, &vars));
            let right = if rng.gen_bool(0.5) { SrcTerm::Var(pick(rng, &vars)) } else { SrcTerm::Val(pick(rng, &vals)) };
            filters.push(Filter { left, op: pick(rng, &CmpOp::ALL), right });
        }
        let target = (0..rng.gen_range(1..=2))
            .map(|_| {
                if rng.gen_bool(0.5) {
                    TargetAtom { predicate: pick(rng, &CONCEPTS).into(), args: vec![target_term(rng, &vars)] }
                } else {
                    TargetAtom { predicate: pick(rng, &ROLES).into(), args: vec![target_term(rng, &vars), target_term(rng, &vars)] }
                }
            })
            .collect();
        out.push(MappingAssertion::new(&format!("m{k}"), atoms, filters, target));
    }
    MappingSet::new(schema.clone(), out).expect("generated mappings are well formed")
}

fn action(rng: &mut Rng, k: usize, schema: &Arc<Schema>, pools: &[String], values: &[Value]) -> Action {
    let params: Vec<Param> = (0..rng.gen_range(1..=2))
        .map(|i| Param {
            name: format!("u{i}"),
            domain: if rng.gen_bool(0.8) { ParamDomain::Pool(pick(rng, pools)) } else { ParamDomain::Adom },
        })
        .collect();
    let names: Vec<Var> = params.iter().map(|p| p.name.clone()).collect();
    let param_or_value = |rng: &mut Rng| {
        if rng.gen_bool(0.75) {
            SrcTerm::Var(pick(rng, &names))
        } else {
            SrcTerm::Val(pick(rng, values))
        }
    };
    let pre_atoms: Vec<RelAtom> = (0..*[0, 0, 1, 1, 2].choose(rng).unwrap())
        .map(|_| {
            let r = pick(rng, schema.relations());
            let args = (0..r.arity())
                .map(|_| match rng.gen_range(0..20) {
                    0..=10 => SrcTerm::Var(pick(rng, &names)),
                    11..=15 => SrcTerm::var(pick(rng, &["e0", "e1"])),
                    _ => SrcTerm::Val(pick(rng, values)),
                })
                .collect();
            RelAtom { relation: r.name, args }
        })
        .collect();
    let mut pre_filters = Vec::new();
    if rng.gen_bool(0.2) {
        let op = pick(rng, &[CmpOp::Ne, CmpOp::Lt, CmpOp::Eq]);
        pre_filters.push(Filter { left: SrcTerm::Var(pick(rng, &names)), op, right: param_or_value(rng) });
    }
    let template = |rng: &mut Rng| {
        let r = pick(rng, schema.relations());
        FactTemplate { relation: r.name.clone(), args: (0..r.arity()).map(|_| param_or_value(rng)).collect() }
    };
    let mut del = Vec::new();
    if rng.gen_bool(0.5) {
        let ground: Vec<&RelAtom> = pre_atoms.iter().filter(|a| a.args.iter().all(|t| !matches!(t, SrcTerm::Var(v) if v.starts_with('e')))).collect();
        match ground.choose(rng) {
            Some(a) if rng.gen_bool(0.7) => del.push(FactTemplate { relation: a.relation.clone(), args: a.args.clone() }),
            _ => del.push(template(rng)),
        }
    }
    let mut add: Vec<FactTemplate> = (0..rng.gen_range(0..=2)).map(|_| template(rng)).collect();
    if del.is_empty() && add.is_empty() {
        add.push(template(rng));
    }
    Action { name: format!("act{k}"), params, pre_atoms, pre_filters, del, add }
}

/// A random action system: at most 3 relations of arity at most 3,
/// integer pools of at most 3 values, at most 4 actions.
pub fn action_system(rng: &mut Rng) -> ActionSystem {
    let schema = schema(rng, 3, &[1, 1, 2, 2, 3]);
    let values = int_values(3);
    let pools = (0..rng.gen_range(1..=2))
        .map(|i| {
            let n = rng.gen_range(2..=3);
            (format!("p{i}"), values.choose_multiple(rng, n).cloned().collect::<BTreeSet<_>>())
        })
        .collect::<std::collections::BTreeMap<_, _>>();
    let pool_names: Vec<String> = pools.keys().cloned().collect();
    let init = instance(rng, &schema, &values, 4);
    let actions = (0..rng.gen_range(2..=4)).map(|k| action(rng, k, &schema, &pool_names, &values)).collect();
    let sys = ActionSystem { schema, pools, init, actions };
    sys.validate().expect("generated systems are well formed");
    sys
}

/// A random SAS: an action system, a TBox (with disjointness in about a
/// third of the cases) and mappings over the system's schema.
pub fn sas(rng: &mut Rng) -> SasSystem {
    let actions = action_system(rng);
    let disjoint = rng.gen_bool(0.3);
    let t = tbox(rng, 8, disjoint);
    let m = mappings(rng, &actions.schema, 3);
    SasSystem::new(actions, ObdaSystem::new(t, m).expect("fixed predicate kinds")).expect("shared schema")
}

/// Draw systems until one has a consistent initial state and a pruned
/// transition system of at most `cap` states. Single-state systems are
/// mostly redrawn.
pub fn sas_with_rts(rng: &mut Rng, cap: usize) -> (SasSystem, TransitionSystem) {
    loop {
        let s = sas(rng);
        if let Ok(rts) = build_rts(&s, Governance::Prune, cap) {
            if rts.len() > 1 || rng.gen_bool(0.1) {
                return (s, rts);
            }
        }
    }
}

fn temporal<L, Q>(rng: &mut Rng, mut kid: impl FnMut(&mut Rng) -> Ctl<L, Q>) -> Ctl<L, Q> {
    let mut b = |rng: &mut Rng| Box::new(kid(rng));
    match rng.gen_range(0..12) {
        0 => Ctl::Not(b(rng)),
        1 => Ctl::And(b(rng), b(rng)),
        2 => Ctl::Or(b(rng), b(rng)),
        3 => Ctl::Implies(b(rng), b(rng)),
        4 => Ctl::AX(b(rng)),
        5 => Ctl::EX(b(rng)),
        6 => Ctl::AF(b(rng)),
        7 => Ctl::EF(b(rng)),
        8 => Ctl::AG(b(rng)),
        9 => Ctl::EG(b(rng)),
        10 => Ctl::AU(b(rng), b(rng)),
        _ => Ctl::EU(b(rng), b(rng)),
    }
}

struct PropGen<'a> {
    concepts: Vec<&'a str>,
    roles: Vec<&'a str>,
    next: usize,
}

impl PropGen<'_> {
    /// `N(x)` or a role atom with `x` on a random side and a fresh
    /// existential on the other.
    fn atom_on(&self, rng: &mut Rng, x: &str) -> Atom {
        if !self.concepts.is_empty() && (self.roles.is_empty() || rng.gen_bool(0.5)) {
            Atom::concept(pick(rng, &self.concepts), Term::var(x))
        } else {
            let p = pick(rng, &self.roles);
            if rng.gen_bool(0.5) {
                Atom::role(p, Term::var(x), Term::var("z"))
            } else {
                Atom::role(p, Term::var("z"), Term::var(x))
            }
        }
    }

    fn empty(&self) -> bool {
        self.concepts.is_empty() && self.roles.is_empty()
    }

    fn local(&self, rng: &mut Rng, scope: &[Var]) -> Ecq {
        if self.empty() {
            return Ecq::Embedded(Ucq::single(vec![], vec![]));
        }
        if !scope.is_empty() && rng.gen_bool(0.8) {
            let x = pick(rng, scope);
            let q = Ecq::Embedded(Ucq::single(vec![x.clone()], vec![self.atom_on(rng, &x)]));
            return match rng.gen_range(0..10) {
                0..=1 => Ecq::not(q),
                2 => {
                    let y = Ecq::Embedded(Ucq::single(vec![x.clone(), "y".into()], vec![self.atom_on(rng, "y"), self.link(rng, &x, "y")]));
                    Ecq::exists("y", y)
                }
                _ => q,
            };
        }
        Ecq::Embedded(Ucq::single(vec![], vec![self.atom_on(rng, "w")]))
    }

    fn link(&self, rng: &mut Rng, x: &str, y: &str) -> Atom {
        match self.roles.choose(rng) {
            Some(p) => Atom::role(p, Term::var(x), Term::var(y)),
            None => Atom::concept(pick(rng, &self.concepts), Term::var(y)),
        }
    }

    fn guard(&self, rng: &mut Rng, x: &str, scope: &[Var]) -> Ecq {
        if !scope.is_empty() && !self.roles.is_empty() && rng.gen_bool(0.3) {
            let s = pick(rng, scope);
            let p = pick(rng, &self.roles);
            return Ecq::Embedded(Ucq::single(vec![s.clone(), x.to_string()], vec![Atom::role(p, Term::var(&s), Term::var(x))]));
        }
        let base = Ecq::Embedded(Ucq::single(vec![x.to_string()], vec![self.atom_on(rng, x)]));
        if rng.gen_bool(0.15) {
            let other = Ecq::Embedded(Ucq::single(vec![x.to_string()], vec![self.atom_on(rng, x)]));
            return Ecq::and(base, Ecq::not(other));
        }
        base
    }

    fn formula(&mut self, rng: &mut Rng, depth: usize, scope: &mut Vec<Var>) -> CtlEqlFormula {
        if depth == 0 || rng.gen_bool(0.15) {
            return Ctl::Local(self.local(rng, scope));
        }
        if !self.empty() && rng.gen_bool(0.35) {
            let x = format!("x{}", self.next);
            self.next += 1;
            let guard = self.guard(rng, &x, scope);
            scope.push(x.clone());
            let body = if rng.gen_bool(0.9) { Some(Box::new(self.formula(rng, depth - 1, scope))) } else { None };
            scope.pop();
            let q = Quant { vars: vec![x], guard, body };
            return if rng.gen_bool(0.5) { Ctl::Forall(q) } else { Ctl::Exists(q) };
        }
        temporal(rng, |rng| self.formula(rng, depth - 1, scope))
    }
}

/// A closed property over `vocab` that passes validation.
pub fn property(rng: &mut Rng, vocab: &Vocabulary, depth: usize) -> CtlEqlFormula {
    let mut g = PropGen { concepts: vocab.concepts.iter().map(String::as_str).collect(), roles: vocab.roles.iter().map(String::as_str).collect(), next: 0 };
    loop {
        g.next = 0;
        let f = g.formula(rng, depth, &mut Vec::new());
        if validate(&f, vocab).is_empty() {
            return f;
        }
    }
}

/// A random validated property for a SAS.
pub fn property_for(rng: &mut Rng, sas: &SasSystem, depth: usize) -> CtlEqlFormula {
    property(rng, &property_vocabulary(&sas.obda.tbox, &sas.obda.mappings), depth)
}

/// The fixed two-relation schema of [`rts`].
pub fn rts_schema() -> Arc<Schema> {
    Arc::new(
        Schema::new(vec![
            Relation { name: "U".into(), columns: vec!["a".into()] },
            Relation { name: "V".into(), columns: vec!["a".into(), "b".into()] },
        ])
        .expect("distinct names"),
    )
}

/// A transition system over [`rts_schema`] with at most `max_states`
/// distinct states; some states are deadlocks.
pub fn rts(rng: &mut Rng, max_states: usize) -> TransitionSystem {
    let schema = rts_schema();
    let values = int_values(4);
    let n = rng.gen_range(1..=max_states);
    let mut seen = BTreeSet::new();
    let mut states = Vec::new();
    while states.len() < n {
        let i = instance(rng, &schema, &values, 4);
        if seen.insert(i.canonical_form()) {
            states.push(i);
        }
    }
    let succ = (0..n)
        .map(|_| {
            let d = if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..=3) };
            (0..d).map(|_| rng.gen_range(0..n)).collect()
        })
        .collect();
    TransitionSystem::from_parts(states, succ)
}

fn fo_leaf(rng: &mut Rng, schema: &Schema, vars: &[Var]) -> FoQuery {
    let vals = int_values(4);
    let mut disjuncts = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let mut atoms = Vec::new();
        for v in vars {
            let r = pick(rng, schema.relations());
            let at = rng.gen_range(0..r.arity());
            let args = (0..r.arity())
                .map(|k| {
                    if k == at {
                        SrcTerm::Var(v.clone())
                    } else if rng.gen_bool(0.7) {
                        SrcTerm::var(&format!("w{k}"))
                    } else {
                        SrcTerm::Val(pick(rng, &vals))
                    }
                })
                .collect();
            atoms.push(RelAtom { relation: r.name.clone(), args });
        }
        if atoms.is_empty() {
            let r = pick(rng, schema.relations());
            let args = (0..r.arity()).map(|k| if rng.gen_bool(0.7) { SrcTerm::var(&format!("w{k}")) } else { SrcTerm::Val(pick(rng, &vals)) }).collect();
            atoms.push(RelAtom { relation: r.name.clone(), args });
        }
        let mut filters = Vec::new();
        if let Some(v) = vars.first() {
            if rng.gen_bool(0.25) {
                filters.push(Filter { left: SrcTerm::Var(v.clone()), op: pick(rng, &CmpOp::ALL), right: SrcTerm::Val(pick(rng, &vals)) });
            }
        }
        disjuncts.push(SourceQuery { atoms, filters, output: vars.iter().cloned().map(SrcTerm::Var).collect() });
    }
    FoQuery::Leaf(SourceLeaf { vars: vars.to_vec(), disjuncts })
}

fn fo_local(rng: &mut Rng, schema: &Schema, scope: &[Var]) -> FoQuery {
    let vars: Vec<Var> = match scope.choose(rng) {
        Some(x) if rng.gen_bool(0.8) => vec![x.clone()],
        _ => vec![],
    };
    match rng.gen_range(0..10) {
        0..=1 => FoQuery::not(fo_leaf(rng, schema, &vars)),
        2 => {
            let mut inner = vars.clone();
            inner.push("q".into());
            let body = FoQuery::and(fo_leaf(rng, schema, &inner), FoQuery::not(fo_leaf(rng, schema, &["q".to_string()])));
            FoQuery::exists("q", body)
        }
        3 => FoQuery::or(fo_leaf(rng, schema, &vars), fo_leaf(rng, schema, &[])),
        _ => fo_leaf(rng, schema, &vars),
    }
}

fn ctla_formula(rng: &mut Rng, schema: &Schema, depth: usize, scope: &mut Vec<Var>, next: &mut usize) -> CtlAFormula {
    if depth == 0 || rng.gen_bool(0.15) {
        return Ctl::Local(fo_local(rng, schema, scope));
    }
    if rng.gen_bool(0.3) {
        let mut branches = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let x = format!("x{next}");
            *next += 1;
            let mut vars = vec![x];
            if rng.gen_bool(0.2) {
                vars.push(format!("x{next}"));
                *next += 1;
            }
            let guard = fo_leaf(rng, schema, &vars);
            let before = scope.len();
            scope.extend(vars.iter().cloned());
            let body = if rng.gen_bool(0.9) { Some(Box::new(ctla_formula(rng, schema, depth - 1, scope, next))) } else { None };
            scope.truncate(before);
            branches.push(QuantBranch { vars, guard, body });
        }
        return if rng.gen_bool(0.5) { Ctl::Forall(branches) } else { Ctl::Exists(branches) };
    }
    temporal(rng, |rng| ctla_formula(rng, schema, depth - 1, scope, next))
}

/// A closed relational property over `schema`.
pub fn ctla(rng: &mut Rng, schema: &Schema, depth: usize) -> CtlAFormula {
    ctla_formula(rng, schema, depth, &mut Vec::new(), &mut 0)
}

/// Two counters modulo `n` stepped independently, giving `n * n` states,
/// with a property that holds: `AG (EF xmax AND AF xat)`.
pub fn grid(n: usize) -> (SasSystem, CtlEqlFormula) {
    let mut s = format!("schema X(v)\nschema Y(v)\nschema Next(a, b)\nschema Last(v)\ninit {{ X(0), Y(0), Last({})", n - 1);
    for k in 0..n {
        s.push_str(&format!(", Next({k}, {})", (k + 1) % n));
    }
    s.push_str(" }\n");
    for r in ["X", "Y"] {
        s.push_str(&format!("action inc{r}(?v: adom, ?w: adom)\n  pre: {r}(?v), Next(?v, ?w)\n  del: {r}(?v)\n  add: {r}(?w)\n"));
    }
    let actions = ActionSystem::parse(&s).expect("grid system parses");
    let m = MappingSet::parse(
        "mapping xmax source: X(?v), Last(?v) target: XMax(pos(?v))\nmapping xat source: X(?v) target: XAt(pos(?v))",
        &actions.schema,
    )
    .expect("grid mappings parse");
    let sas = SasSystem::new(actions, ObdaSystem::new(TBox::new(), m).expect("no TBox")).expect("shared schema");
    let f = CtlEqlFormula::parse("AG (EF (EXISTS ?p . [XMax(?p)]) AND AF (EXISTS ?p . [XAt(?p)]))").expect("grid property parses");
    (sas, f)
}
