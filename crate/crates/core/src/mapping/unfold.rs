use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::EvalError;
use crate::kb::{Constant, DatabaseInstance, Value};
use crate::mapping::{live_for, MappingSet, TargetTerm};
use crate::ontology::Vocabulary;
use crate::query::{eval_fo_vars, Cq, Ecq, Filter, FoEnv, FoQuery, RelAtom, SourceLeaf, SourceQuery, SrcTerm, Term, Ucq, Var};

/// How an ontology-level variable is carried at the relational level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shape {
    /// A plain value, carried by one value variable.
    Value,
    /// An object term `f(v1..vk)`, carried by its k argument values.
    Term(String, usize),
    /// A fixed constant, carried by nothing.
    Const(Constant),
}

/// A substitution target for an ontology-level variable: a value variable
/// or an object-term template over value variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Binding {
    Value(Var),
    Term(String, Vec<Var>),
}

impl Binding {
    pub fn vars(&self) -> &[Var] {
        match self {
            Binding::Value(v) => std::slice::from_ref(v),
            Binding::Term(_, vs) => vs,
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            Binding::Value(_) => Shape::Value,
            Binding::Term(f, vs) => Shape::Term(f.clone(), vs.len()),
        }
    }

    /// The constant this binding denotes once its variables get `values`.
    pub fn build(&self, values: &[Value]) -> Constant {
        match self {
            Binding::Value(_) => Constant::Value(values[0].clone()),
            Binding::Term(f, _) => Constant::term(f, values.to_vec()),
        }
    }
}

/// Generator of value-variable names that are unique within one
/// compilation.
#[derive(Clone, Debug, Default)]
pub struct NameGen {
    used: BTreeSet<Var>,
}

impl NameGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reserve(&mut self, v: &str) {
        self.used.insert(v.to_string());
    }

    pub fn fresh(&mut self, base: &str) -> Var {
        let mut cand = base.to_string();
        let mut n = 2;
        while self.used.contains(&cand) {
            cand = format!("{base}_{n}");
            n += 1;
        }
        self.used.insert(cand.clone());
        cand
    }

    /// Fresh variables carrying `x` in the given shape.
    pub fn binding(&mut self, x: &str, shape: &Shape) -> Binding {
        match shape {
            Shape::Term(f, k) => Binding::Term(f.clone(), (1..=*k).map(|i| self.fresh(&format!("{x}_{f}{i}"))).collect()),
            _ => Binding::Value(self.fresh(x)),
        }
    }
}

/// The shapes a quantified variable can take: one per function symbol,
/// then plain values.
pub fn shape_options(m: &MappingSet) -> Vec<Shape> {
    let mut out: Vec<Shape> = m.function_symbols().into_iter().map(|(f, k)| Shape::Term(f, k)).collect();
    out.push(Shape::Value);
    out
}

/// One group of unfolded answers sharing their shapes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnfoldedBranch {
    pub shapes: Vec<Shape>,
    /// Free value variables of `query`, in answer-variable order.
    pub vars: Vec<Var>,
    pub query: FoQuery,
}

/// An unfolded query: a union of relational queries, each tagged with the
/// shapes of the answer variables it produces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unfolded {
    pub answer_vars: Vec<Var>,
    pub branches: Vec<UnfoldedBranch>,
}

impl Unfolded {
    pub fn is_false(&self) -> bool {
        self.branches.iter().all(|b| b.query.is_false())
    }

    /// Evaluate over `i` and rebuild ontology-level answers from the tags.
    pub fn eval(&self, i: &DatabaseInstance) -> Result<BTreeSet<Vec<Constant>>, EvalError> {
        let mut out = BTreeSet::new();
        for b in &self.branches {
            for row in eval_fo_vars(&b.query, i, &FoEnv::new(), &b.vars)? {
                let mut rest = row.as_slice();
                let mut tuple = Vec::with_capacity(b.shapes.len());
                for s in &b.shapes {
                    match s {
                        Shape::Value => {
                            tuple.push(Constant::Value(rest[0].clone()));
                            rest = &rest[1..];
                        }
                        Shape::Term(f, k) => {
                            tuple.push(Constant::term(f, rest[..*k].to_vec()));
                            rest = &rest[*k..];
                        }
                        Shape::Const(c) => tuple.push(c.clone()),
                    }
                }
                out.insert(tuple);
            }
        }
        Ok(out)
    }

    /// The single query of a boolean unfolding.
    pub fn boolean(&self) -> FoQuery {
        self.branches.iter().fold(FoQuery::falsum(), |acc, b| FoQuery::or_simplified(acc, b.query.clone()))
    }
}

/// What an ontology-level variable has been unified with.
#[derive(Clone, Debug)]
enum Bound {
    Val(String),
    Obj(String, Vec<String>),
}

#[derive(Clone, Debug, Default)]
struct State {
    parent: HashMap<String, String>,
    lit: HashMap<String, Value>,
    protected: BTreeSet<String>,
    qmap: BTreeMap<Var, Bound>,
    atoms: Vec<RelAtom>,
    filters: Vec<Filter>,
}

impl State {
    fn find(&self, v: &str) -> String {
        let mut v = v.to_string();
        while let Some(p) = self.parent.get(&v) {
            v = p.clone();
        }
        v
    }

    fn union(&mut self, a: &str, b: &str) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return true;
        }
        let (root, child) = if self.protected.contains(&rb) && !self.protected.contains(&ra) { (rb, ra) } else { (ra, rb) };
        match (self.lit.get(&root).cloned(), self.lit.remove(&child)) {
            (Some(x), Some(y)) if x != y => return false,
            (None, Some(y)) => {
                self.lit.insert(root.clone(), y);
            }
            _ => {}
        }
        self.parent.insert(child, root);
        true
    }

    fn set_lit(&mut self, v: &str, value: &Value) -> bool {
        let r = self.find(v);
        match self.lit.get(&r) {
            Some(old) => old == value,
            None => {
                self.lit.insert(r, value.clone());
                true
            }
        }
    }

    fn resolve(&self, v: &str) -> SrcTerm {
        let r = self.find(v);
        match self.lit.get(&r) {
            Some(val) => SrcTerm::Val(val.clone()),
            None => SrcTerm::Var(r),
        }
    }

    fn unify_bound(&mut self, a: &Bound, b: &Bound) -> bool {
        match (a, b) {
            (Bound::Val(x), Bound::Val(y)) => self.union(x, y),
            (Bound::Obj(f, xs), Bound::Obj(g, ys)) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| self.union(x, y))
            }
            _ => false,
        }
    }

    fn unify_term(&mut self, t: &Term, b: Bound) -> bool {
        match t {
            Term::Const(Constant::Value(v)) => match &b {
                Bound::Val(x) => self.set_lit(x, v),
                Bound::Obj(..) => false,
            },
            Term::Const(Constant::Term(ot)) => match &b {
                Bound::Obj(f, xs) if *f == ot.symbol && xs.len() == ot.args.len() => {
                    xs.iter().zip(&ot.args).all(|(x, v)| self.set_lit(x, v))
                }
                _ => false,
            },
            Term::Var(v) => match self.qmap.get(v).cloned() {
                None => {
                    self.qmap.insert(v.clone(), b);
                    true
                }
                Some(old) => self.unify_bound(&old, &b),
            },
        }
    }
}

fn bound_of(b: &Binding) -> Bound {
    match b {
        Binding::Value(v) => Bound::Val(v.clone()),
        Binding::Term(f, vs) => Bound::Obj(f.clone(), vs.clone()),
    }
}

enum Resolved {
    Val(SrcTerm),
    Obj(String, Vec<SrcTerm>),
    Const(Constant),
}

struct Unified {
    query: SourceQuery,
    heads: Vec<Resolved>,
    bound: Vec<SrcTerm>,
}

/// Every way of matching the atoms of `cq` against mapping targets.
fn unify_cq(cq: &Cq, av: &[Var], m: &MappingSet, seed: &BTreeMap<Var, Binding>, protected: &[Var]) -> Vec<Unified> {
    let mut init = State { protected: protected.iter().cloned().collect(), ..State::default() };
    for (t, x) in cq.head.iter().zip(av) {
        if let Some(b) = seed.get(x) {
            if !init.unify_term(t, bound_of(b)) {
                return Vec::new();
            }
        }
    }
    let mut out = Vec::new();
    choose(cq, 0, m, init, &mut |st| {
        let Some(query) = assemble(st) else { return };
        let heads = cq
            .head
            .iter()
            .map(|t| match t {
                Term::Const(c) => Resolved::Const(c.clone()),
                Term::Var(v) => match &st.qmap[v] {
                    Bound::Val(x) => Resolved::Val(st.resolve(x)),
                    Bound::Obj(f, xs) => Resolved::Obj(f.clone(), xs.iter().map(|x| st.resolve(x)).collect()),
                },
            })
            .collect();
        let bound = protected.iter().map(|p| st.resolve(p)).collect();
        out.push(Unified { query, heads, bound });
    });
    out
}

fn choose(cq: &Cq, i: usize, m: &MappingSet, st: State, emit: &mut dyn FnMut(&State)) {
    if i == cq.atoms.len() {
        emit(&st);
        return;
    }
    let atom = &cq.atoms[i];
    for (k, ma) in m.assertions().iter().enumerate() {
        for ta in &ma.target {
            if ta.predicate != atom.predicate || ta.args.len() != atom.args.len() {
                continue;
            }
            let rn = |v: &Var| format!("\u{2}{i}.{k}.{v}");
            let mut next = st.clone();
            let ok = atom.args.iter().zip(&ta.args).all(|(qt, tt)| {
                let b = match tt {
                    TargetTerm::Var(v) => Bound::Val(rn(v)),
                    TargetTerm::Template { symbol, args } => Bound::Obj(symbol.clone(), args.iter().map(rn).collect()),
                };
                next.unify_term(qt, b)
            });
            if !ok {
                continue;
            }
            let sub = |t: &SrcTerm| match t {
                SrcTerm::Var(v) => SrcTerm::Var(rn(v)),
                t => t.clone(),
            };
            for a in &ma.source.atoms {
                next.atoms.push(RelAtom { relation: a.relation.clone(), args: a.args.iter().map(sub).collect() });
            }
            for f in &ma.source.filters {
                next.filters.push(Filter { left: sub(&f.left), op: f.op, right: sub(&f.right) });
            }
            choose(cq, i + 1, m, next, emit);
        }
    }
}

/// Apply the unifier to the collected source atoms and filters. `None` if
/// a filter between two literals is statically false.
fn assemble(st: &State) -> Option<SourceQuery> {
    let res = |t: &SrcTerm| match t {
        SrcTerm::Var(v) => st.resolve(v),
        t => t.clone(),
    };
    let mut atoms: Vec<RelAtom> = Vec::new();
    for a in &st.atoms {
        let a = RelAtom { relation: a.relation.clone(), args: a.args.iter().map(res).collect() };
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
    let mut filters: Vec<Filter> = Vec::new();
    for f in &st.filters {
        let f = Filter { left: res(&f.left), op: f.op, right: res(&f.right) };
        if let (SrcTerm::Val(l), SrcTerm::Val(r)) = (&f.left, &f.right) {
            if l.same_type(r) || f.op.is_equality() {
                if !static_cmp(l, f.op, r) {
                    return None;
                }
                continue;
            }
        }
        if !filters.contains(&f) {
            filters.push(f);
        }
    }
    Some(SourceQuery { atoms, filters, output: Vec::new() })
}

fn static_cmp(l: &Value, op: crate::query::CmpOp, r: &Value) -> bool {
    use crate::query::CmpOp::*;
    match op {
        Eq => l == r,
        Ne => l != r,
        Lt => l < r,
        Le => l <= r,
        Gt => l > r,
        Ge => l >= r,
    }
}

/// Give the internal variables of `q` readable names: output variables
/// take the leaf variable they are reported as, the rest `v0, v1, ...`.
fn tidy(mut q: SourceQuery, vars: &[Var]) -> SourceQuery {
    let mut names: BTreeMap<Var, Var> = BTreeMap::new();
    let mut taken: BTreeSet<Var> = BTreeSet::new();
    for (t, v) in q.output.iter().zip(vars) {
        if let SrcTerm::Var(x) = t {
            if !names.contains_key(x) && !taken.contains(v) {
                names.insert(x.clone(), v.clone());
                taken.insert(v.clone());
            }
        }
    }
    let mut n = 0;
    let all: Vec<Var> = q.atom_vars();
    for x in all {
        if let std::collections::btree_map::Entry::Vacant(e) = names.entry(x) {
            let name = loop {
                let cand = format!("v{n}");
                n += 1;
                if !taken.contains(&cand) && !vars.contains(&cand) {
                    break cand;
                }
            };
            taken.insert(name.clone());
            e.insert(name);
        }
    }
    let ren = |t: &mut SrcTerm| {
        if let SrcTerm::Var(x) = t {
            if let Some(n) = names.get(x) {
                *x = n.clone();
            }
        }
    };
    for a in &mut q.atoms {
        a.args.iter_mut().for_each(ren);
    }
    for f in &mut q.filters {
        ren(&mut f.left);
        ren(&mut f.right);
    }
    q.output.iter_mut().for_each(ren);
    q
}

fn push_unique(v: &mut Vec<SourceQuery>, q: SourceQuery) {
    if !v.contains(&q) {
        v.push(q);
    }
}

/// Unfold a UCQ whose answer variables are all substituted by `sub`. The
/// resulting leaf ranges over the bindings' value variables.
pub fn unfold_ucq_under(q: &Ucq, m: &MappingSet, sub: &BTreeMap<Var, Binding>) -> SourceLeaf {
    let mut vars: Vec<Var> = Vec::new();
    for x in &q.answer_vars {
        for v in sub[x].vars() {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
    }
    let seed: BTreeMap<Var, Binding> = q.answer_vars.iter().map(|x| (x.clone(), sub[x].clone())).collect();
    let mut disjuncts = Vec::new();
    for cq in &q.disjuncts {
        for u in unify_cq(cq, &q.answer_vars, m, &seed, &vars) {
            let mut sq = u.query;
            sq.output = u.bound;
            push_unique(&mut disjuncts, tidy(sq, &vars));
        }
    }
    SourceLeaf { vars, disjuncts }
}

/// Unfold a UCQ through the mappings. Answers are grouped by the shape
/// they take; within a group each answer variable is reported through
/// value variables named after it.
pub fn unfold_ucq(q: &Ucq, m: &MappingSet) -> Unfolded {
    let mut groups: Vec<(Vec<Shape>, Vec<Var>, Vec<SourceQuery>)> = Vec::new();
    for cq in &q.disjuncts {
        for u in unify_cq(cq, &q.answer_vars, m, &BTreeMap::new(), &[]) {
            let mut shapes = Vec::new();
            let mut output = Vec::new();
            for h in u.heads {
                match h {
                    Resolved::Val(t) => {
                        shapes.push(Shape::Value);
                        output.push(t);
                    }
                    Resolved::Obj(f, ts) => {
                        shapes.push(Shape::Term(f, ts.len()));
                        output.extend(ts);
                    }
                    Resolved::Const(c) => shapes.push(Shape::Const(c)),
                }
            }
            let idx = match groups.iter().position(|g| g.0 == shapes) {
                Some(i) => i,
                None => {
                    let mut gen = NameGen::new();
                    let mut vars = Vec::new();
                    for (x, s) in q.answer_vars.iter().zip(&shapes) {
                        match s {
                            Shape::Value => vars.push(gen.fresh(x)),
                            Shape::Term(_, k) => vars.extend((1..=*k).map(|i| gen.fresh(&format!("{x}_{i}")))),
                            Shape::Const(_) => {}
                        }
                    }
                    groups.push((shapes, vars, Vec::new()));
                    groups.len() - 1
                }
            };
            let mut sq = u.query;
            sq.output = output;
            let vars = groups[idx].1.clone();
            push_unique(&mut groups[idx].2, tidy(sq, &vars));
        }
    }
    let branches = groups
        .into_iter()
        .map(|(shapes, vars, disjuncts)| UnfoldedBranch {
            shapes,
            vars: vars.clone(),
            query: FoQuery::Leaf(SourceLeaf { vars, disjuncts }),
        })
        .collect();
    Unfolded { answer_vars: q.answer_vars.clone(), branches }
}

/// The unfolded boolean query: true over an instance iff `q` holds in its
/// virtual ABox.
pub fn unfold_boolean(q: &Ucq, m: &MappingSet) -> FoQuery {
    unfold_ucq(q, m).boolean()
}

/// `live(b)` for a binding `b`, over the given vocabulary.
pub fn unfold_live(b: &Binding, m: &MappingSet, vocab: &Vocabulary) -> FoQuery {
    let live = live_for(vocab);
    let sub = BTreeMap::from([(live.answer_vars[0].clone(), b.clone())]);
    FoQuery::Leaf(unfold_ucq_under(&live, m, &sub))
}

/// Unfold an ECQ whose free variables are all substituted by `sub`.
/// Existentials expand into one branch per shape, each guarded by `live`.
pub fn unfold_ecq_under(
    q: &Ecq,
    m: &MappingSet,
    vocab: &Vocabulary,
    sub: &BTreeMap<Var, Binding>,
    gen: &mut NameGen,
) -> FoQuery {
    match q {
        Ecq::Embedded(u) => FoQuery::Leaf(unfold_ucq_under(u, m, sub)),
        Ecq::Not(q) => FoQuery::not(unfold_ecq_under(q, m, vocab, sub, gen)),
        Ecq::And(a, b) => {
            let a = unfold_ecq_under(a, m, vocab, sub, gen);
            if a.is_false() {
                return a;
            }
            FoQuery::and_simplified(a, unfold_ecq_under(b, m, vocab, sub, gen))
        }
        Ecq::Exists(x, body) => {
            let mut out = FoQuery::falsum();
            for shape in shape_options(m) {
                let b = gen.binding(x, &shape);
                let live = unfold_live(&b, m, vocab);
                if live.is_false() {
                    continue;
                }
                let mut inner = sub.clone();
                inner.insert(x.clone(), b.clone());
                let mut branch = FoQuery::and_simplified(live, unfold_ecq_under(body, m, vocab, &inner, gen));
                for v in b.vars().iter().rev() {
                    branch = FoQuery::exists(v, branch);
                }
                out = FoQuery::or_simplified(out, branch);
            }
            out
        }
    }
}

/// Unfold an open or closed ECQ. Every free variable is expanded over the
/// shapes of the mappings and, unless `q` is a single embedded UCQ,
/// guarded by `live` so that answers stay in the active domain.
pub fn unfold_ecq(q: &Ecq, m: &MappingSet, vocab: &Vocabulary) -> Unfolded {
    if let Ecq::Embedded(u) = q {
        return unfold_ucq(u, m);
    }
    let fv = q.free_vars();
    let options = shape_options(m);
    let mut branches = Vec::new();
    let mut choice = vec![0usize; fv.len()];
    loop {
        let mut gen = NameGen::new();
        let mut sub = BTreeMap::new();
        let mut guard = FoQuery::verum();
        let mut vars = Vec::new();
        let mut shapes = Vec::new();
        for (x, &c) in fv.iter().zip(&choice) {
            let b = gen.binding(x, &options[c]);
            guard = FoQuery::and_simplified(guard, unfold_live(&b, m, vocab));
            vars.extend(b.vars().iter().cloned());
            shapes.push(b.shape());
            sub.insert(x.clone(), b);
        }
        let body = unfold_ecq_under(q, m, vocab, &sub, &mut gen);
        let query = if fv.is_empty() { body } else { FoQuery::and_simplified(guard, body) };
        if !query.is_false() || fv.is_empty() {
            branches.push(UnfoldedBranch { shapes, vars, query });
        }
        // Next shape assignment, odometer style.
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Unfolded { answer_vars: fv, branches };
            }
            choice[i] += 1;
            if choice[i] < options.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::kb::{Relation, Schema};
    use crate::mapping::materialize;
    use crate::query::{eval_ecq_plain, eval_ucq, Env};

    fn schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(vec![
                Relation { name: "CPMR".into(), columns: vec!["id".into(), "accepting".into(), "moreview".into(), "ecdreview".into()] },
                Relation { name: "R".into(), columns: vec!["a".into(), "b".into()] },
            ])
            .unwrap(),
        )
    }

    fn reviewed() -> MappingSet {
        MappingSet::parse(
            "mapping a source: CPMR(?x, ?a, _, _), ?a = 1 target: ReviewedReport(cpmr(?x))
             mapping m source: CPMR(?x, _, ?m, _), ?m = 1 target: ReviewedReport(cpmr(?x))
             mapping e source: CPMR(?x, _, _, ?e), ?e = 1 target: ReviewedReport(cpmr(?x))
             mapping r source: R(?x, ?y) target: P(cpmr(?x), ?y), ReviewedReport(cpmr(?x))",
            &schema(),
        )
        .unwrap()
    }

    fn vocab(m: &MappingSet) -> Vocabulary {
        m.target_vocabulary()
    }

    #[test]
    fn three_milestone_sources() {
        let m = MappingSet::parse(
            "mapping a source: CPMR(?x, ?a, _, _), ?a = 1 target: ReviewedReport(cpmr(?x))
             mapping m source: CPMR(?x, _, ?m, _), ?m = 1 target: ReviewedReport(cpmr(?x))
             mapping e source: CPMR(?x, _, _, ?e), ?e = 1 target: ReviewedReport(cpmr(?x))",
            &schema(),
        )
        .unwrap();
        let u = unfold_ucq(&Ucq::parse("[ ReviewedReport(?x) ]").unwrap(), &m);
        assert_eq!(u.branches.len(), 1);
        assert_eq!(u.branches[0].shapes, vec![Shape::Term("cpmr".into(), 1)]);
        let FoQuery::Leaf(l) = &u.branches[0].query else { panic!() };
        assert_eq!(l.disjuncts.len(), 3);
    }

    #[test]
    fn empty_mapping_gives_empty_union() {
        let m = MappingSet::empty(schema());
        assert!(unfold_ucq(&Ucq::parse("[ C(?x) ]").unwrap(), &m).is_false());
        assert!(unfold_boolean(&Ucq::parse("[ select : C(?x) ]").unwrap(), &m).is_false());
    }

    #[test]
    fn agrees_with_virtual_abox() {
        let m = reviewed();
        let i = DatabaseInstance::parse(schema(), "CPMR(1, 1, 0, 0) CPMR(2, 0, 0, 0) R(2, 5) R(3, 3)").unwrap();
        let abox = materialize(&m, &i).unwrap();
        for text in [
            "[ ReviewedReport(?x) ]",
            "[ P(?x, ?y) ]",
            "[ P(?x, ?y), ReviewedReport(?x) ]",
            "[ select ?y : P(?x, ?y), ReviewedReport(?x) ]",
            "[ P(?x, 3) ]",
            "[ ReviewedReport(cpmr(2)) , ?x = cpmr(2) ]",
            "[ P(?x, ?x) ]",
        ] {
            let q = Ucq::parse(text).unwrap();
            assert_eq!(unfold_ucq(&q, &m).eval(&i).unwrap(), eval_ucq(&q, &abox, &Env::new()), "{text}");
        }
    }

    #[test]
    fn ecq_with_negation_and_exists() {
        let m = reviewed();
        let v = vocab(&m);
        let i = DatabaseInstance::parse(schema(), "CPMR(1, 1, 0, 0) CPMR(2, 0, 0, 0) R(2, 5) R(4, 1)").unwrap();
        let abox = materialize(&m, &i).unwrap();
        for text in [
            "not [ ReviewedReport(?x) ]",
            "exists ?y . [ P(?x, ?y) ]",
            "not exists ?y . [ P(?x, ?y) ]",
            "exists ?x . not [ ReviewedReport(?x) ]",
            "[ ReviewedReport(?x) ] and not exists ?y . [ P(?x, ?y) ]",
        ] {
            let q = Ecq::parse(text).unwrap();
            assert_eq!(unfold_ecq(&q, &m, &v).eval(&i).unwrap(), eval_ecq_plain(&q, &abox, &Env::new()), "{text}");
        }
    }

    #[test]
    fn live_answers_are_adom() {
        let m = reviewed();
        let i = DatabaseInstance::parse(schema(), "CPMR(1, 1, 0, 0) R(2, 5)").unwrap();
        let abox = materialize(&m, &i).unwrap();
        let live = live_for(&vocab(&m));
        let got: BTreeSet<Constant> = unfold_ucq(&live, &m).eval(&i).unwrap().into_iter().map(|r| r[0].clone()).collect();
        assert_eq!(got, abox.adom());
    }

    #[test]
    fn exists_branches_per_symbol() {
        let m = MappingSet::parse("mapping a source: R(?x, ?y) target: C(cpmr(?x))", &schema()).unwrap();
        let q = Ecq::parse("exists ?z . [ C(?z) ]").unwrap();
        let u = unfold_ecq(&q, &m, &vocab(&m));
        let FoQuery::Exists(v, _) = &u.branches[0].query else { panic!("{:?}", u.branches[0].query) };
        assert_eq!(v, "z_cpmr1");
    }
}
