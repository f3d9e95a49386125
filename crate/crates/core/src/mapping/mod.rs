//! Mapping assertions from the relational schema to the ontology, the
//! virtual ABox they induce, and unfolding of ontology queries into
//! source queries.
//!
//! ```text
//! schema CPMR(id, accepting)        # optional when a schema is supplied
//! mapping reviewed_accepting
//! source: CPMR(?x, ?a), ?a = 1
//! target: ReviewedReport(cpmr(?x))
//! ```

mod unfold;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, EvalError, ModelError, ParseError};
use crate::kb::{ABox, Constant, DatabaseInstance, Relation, Schema, Value};
use crate::ontology::{TBox, Vocabulary};
use crate::query::{eval_source, parse_source_items, Atom, Cq, Filter, RelAtom, SourceQuery, SrcTerm, Term, Ucq, Var};
use crate::syntax::{Cursor, Tok};

pub use unfold::{
    shape_options, unfold_boolean, unfold_ecq, unfold_ecq_under, unfold_live, unfold_ucq, unfold_ucq_under, Binding,
    NameGen, Shape, Unfolded, UnfoldedBranch,
};

/// A target position: a source variable (a plain value) or an object-term
/// template `f(?x, ...)` over source variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TargetTerm {
    Var(Var),
    Template { symbol: String, args: Vec<Var> },
}

impl TargetTerm {
    pub fn vars(&self) -> Vec<&Var> {
        match self {
            TargetTerm::Var(v) => vec![v],
            TargetTerm::Template { args, .. } => args.iter().collect(),
        }
    }
}

impl fmt::Display for TargetTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetTerm::Var(v) => write!(f, "?{v}"),
            TargetTerm::Template { symbol, args } => {
                let args: Vec<String> = args.iter().map(|a| format!("?{a}")).collect();
                write!(f, "{symbol}({})", args.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TargetAtom {
    pub predicate: String,
    pub args: Vec<TargetTerm>,
}

impl fmt::Display for TargetAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(ToString::to_string).collect();
        write!(f, "{}({})", self.predicate, args.join(", "))
    }
}

/// `source ~> target`. The source outputs every variable of its atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingAssertion {
    pub id: String,
    pub source: SourceQuery,
    pub target: Vec<TargetAtom>,
}

impl MappingAssertion {
    pub fn new(id: &str, atoms: Vec<RelAtom>, filters: Vec<Filter>, target: Vec<TargetAtom>) -> Self {
        let mut source = SourceQuery { atoms, filters, output: Vec::new() };
        source.output = source.atom_vars().into_iter().map(SrcTerm::Var).collect();
        MappingAssertion { id: id.to_string(), source, target }
    }

    fn instantiate(&self, row: &[Value], abox: &mut ABox) {
        let bind: BTreeMap<&Var, &Value> =
            self.source.output.iter().filter_map(SrcTerm::as_var).zip(row).collect();
        let term = |t: &TargetTerm| match t {
            TargetTerm::Var(v) => Constant::Value(bind[v].clone()),
            TargetTerm::Template { symbol, args } => Constant::term(symbol, args.iter().map(|a| bind[a].clone()).collect()),
        };
        for a in &self.target {
            match a.args.as_slice() {
                [x] => {
                    abox.add_concept(&a.predicate, term(x));
                }
                [x, y] => {
                    abox.add_role(&a.predicate, term(x), term(y));
                }
                _ => {}
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingSet {
    schema: Arc<Schema>,
    assertions: Vec<MappingAssertion>,
}

impl MappingSet {
    /// Validate and assemble a mapping set over `schema`.
    pub fn new(schema: Arc<Schema>, assertions: Vec<MappingAssertion>) -> Result<Self, ModelError> {
        let mut ids = BTreeSet::new();
        let mut symbols: BTreeMap<&str, usize> = BTreeMap::new();
        let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
        for m in &assertions {
            if !ids.insert(&m.id) {
                return Err(ModelError::DuplicateMapping(m.id.clone()));
            }
            for a in &m.source.atoms {
                schema.check_atom(&a.relation, a.args.len())?;
            }
            if let Some(v) = m.source.unsafe_vars().into_iter().next() {
                return Err(ModelError::UnsafeVariable(v));
            }
            if m.target.is_empty() {
                return Err(ModelError::EmptyTarget(m.id.clone()));
            }
            let outputs = m.source.atom_vars();
            for t in &m.target {
                let n = t.args.len();
                if !(1..=2).contains(&n) {
                    return Err(ModelError::ArityMismatch { name: t.predicate.clone(), expected: 2, found: n });
                }
                if *kinds.entry(&t.predicate).or_insert(n) != n {
                    return Err(ModelError::PredicateKind { name: t.predicate.clone() });
                }
                for arg in &t.args {
                    for v in arg.vars() {
                        if !outputs.contains(v) {
                            return Err(ModelError::TargetVariable { mapping: m.id.clone(), var: v.clone() });
                        }
                    }
                    if let TargetTerm::Template { symbol, args } = arg {
                        let first = *symbols.entry(symbol).or_insert(args.len());
                        if first != args.len() {
                            return Err(ModelError::SymbolArity { symbol: symbol.clone(), first, second: args.len() });
                        }
                    }
                }
            }
        }
        Ok(MappingSet { schema, assertions })
    }

    pub fn empty(schema: Arc<Schema>) -> Self {
        MappingSet { schema, assertions: Vec::new() }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn assertions(&self) -> &[MappingAssertion] {
        &self.assertions
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    /// Parse a `.map` file against a known schema. `schema` lines in the
    /// file, if any, must agree with it.
    pub fn parse(text: &str, schema: &Arc<Schema>) -> Result<Self, Error> {
        parse_mappings(text, Some(schema))
    }

    /// Parse a `.map` file on its own. The schema comes from its `schema`
    /// lines; relations used without a declaration get columns `c1..cn`.
    pub fn parse_standalone(text: &str) -> Result<Self, Error> {
        parse_mappings(text, None)
    }

    /// Every function symbol used by a target template, with its arity.
    pub fn function_symbols(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        for m in &self.assertions {
            for a in &m.target {
                for t in &a.args {
                    if let TargetTerm::Template { symbol, args } = t {
                        out.insert((symbol.clone(), args.len()));
                    }
                }
            }
        }
        out
    }

    /// Concept and role names populated by some assertion.
    pub fn target_vocabulary(&self) -> Vocabulary {
        let mut v = Vocabulary::default();
        for m in &self.assertions {
            for a in &m.target {
                if a.args.len() == 1 {
                    v.concepts.insert(a.predicate.clone());
                } else {
                    v.roles.insert(a.predicate.clone());
                }
            }
        }
        v
    }
}

/// The virtual ABox of `i`: every assertion applied to every answer of
/// its source query.
pub fn materialize(m: &MappingSet, i: &DatabaseInstance) -> Result<ABox, EvalError> {
    let mut abox = ABox::new();
    for a in &m.assertions {
        for row in eval_source(&a.source, i)? {
            a.instantiate(&row, &mut abox);
        }
    }
    Ok(abox)
}

pub fn function_symbols(m: &MappingSet) -> BTreeSet<(String, usize)> {
    m.function_symbols()
}

/// `live(x)`: x occurs in some concept or role of the vocabulary.
pub fn live_query(t: &TBox) -> Ucq {
    live_for(&t.vocabulary())
}

pub fn live_for(vocab: &Vocabulary) -> Ucq {
    let x = "x".to_string();
    let av = vec![x.clone()];
    let mut disjuncts = Vec::new();
    for n in &vocab.concepts {
        disjuncts.push(Cq::new(&av, vec![Atom::concept(n, Term::var(&x))]));
    }
    for p in &vocab.roles {
        disjuncts.push(Cq::new(&av, vec![Atom::role(p, Term::var(&x), Term::var("_0"))]));
        disjuncts.push(Cq::new(&av, vec![Atom::role(p, Term::var("_0"), Term::var(&x))]));
    }
    Ucq::new(av, disjuncts)
}

/// Schema, TBox and mappings together.
#[derive(Clone, Debug)]
pub struct ObdaSystem {
    pub tbox: TBox,
    pub mappings: MappingSet,
}

impl ObdaSystem {
    /// Pair a TBox with mappings. A name used as a concept on one side and
    /// as a role on the other is rejected.
    pub fn new(tbox: TBox, mappings: MappingSet) -> Result<Self, ModelError> {
        let tv = tbox.vocabulary();
        let mv = mappings.target_vocabulary();
        for c in &mv.concepts {
            if tv.roles.contains(c) {
                return Err(ModelError::PredicateKind { name: c.clone() });
            }
        }
        for r in &mv.roles {
            if tv.concepts.contains(r) {
                return Err(ModelError::PredicateKind { name: r.clone() });
            }
        }
        Ok(ObdaSystem { tbox, mappings })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        self.mappings.schema()
    }

    /// The TBox vocabulary together with every mapped predicate.
    pub fn vocabulary(&self) -> Vocabulary {
        let mut v = self.tbox.vocabulary();
        let m = self.mappings.target_vocabulary();
        v.concepts.extend(m.concepts);
        v.roles.extend(m.roles);
        v
    }
}

fn parse_mappings(text: &str, given: Option<&Arc<Schema>>) -> Result<MappingSet, Error> {
    let mut cur = Cursor::new(text)?;
    let mut declared: Vec<(Relation, crate::syntax::Pos)> = Vec::new();
    let mut raw: Vec<(String, Vec<RelAtom>, Vec<Filter>, Vec<TargetAtom>)> = Vec::new();
    while !cur.at_eof() {
        if cur.is_kw("schema") {
            let pos = cur.pos();
            cur.next();
            declared.push((parse_relation_decl(&mut cur)?, pos));
        } else {
            cur.expect_kw("mapping")?;
            let id = cur.ident()?;
            cur.expect_kw("source")?;
            cur.expect(&Tok::Colon)?;
            let (atoms, filters) = parse_source_items(&mut cur)?;
            cur.expect_kw("target")?;
            cur.expect(&Tok::Colon)?;
            let mut target = vec![parse_target_atom(&mut cur)?];
            while cur.eat(&Tok::Comma) {
                target.push(parse_target_atom(&mut cur)?);
            }
            raw.push((id, atoms, filters, target));
        }
    }
    let schema = match given {
        Some(s) => {
            for (r, pos) in &declared {
                if s.get(&r.name) != Some(r) {
                    return Err(ParseError::new(*pos, format!("schema line for `{}` disagrees with the system schema", r.name)).into());
                }
            }
            s.clone()
        }
        None => {
            let mut s = Schema::default();
            for (r, _) in declared {
                s.add(r)?;
            }
            for (_, atoms, _, _) in &raw {
                for a in atoms {
                    if s.get(&a.relation).is_none() {
                        let columns = (1..=a.args.len()).map(|i| format!("c{i}")).collect();
                        s.add(Relation { name: a.relation.clone(), columns })?;
                    }
                }
            }
            Arc::new(s)
        }
    };
    let assertions =
        raw.into_iter().map(|(id, atoms, filters, target)| MappingAssertion::new(&id, atoms, filters, target)).collect();
    Ok(MappingSet::new(schema, assertions)?)
}

pub(crate) fn parse_relation_decl(cur: &mut Cursor) -> Result<Relation, ParseError> {
    let name = cur.ident()?;
    cur.expect(&Tok::LParen)?;
    let mut columns = Vec::new();
    if !cur.eat(&Tok::RParen) {
        loop {
            columns.push(cur.ident()?);
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma)?;
        }
    }
    Ok(Relation { name, columns })
}

fn parse_target_atom(cur: &mut Cursor) -> Result<TargetAtom, ParseError> {
    let predicate = cur.ident()?;
    cur.expect(&Tok::LParen)?;
    let mut args = vec![parse_target_term(cur)?];
    while cur.eat(&Tok::Comma) {
        args.push(parse_target_term(cur)?);
    }
    cur.expect(&Tok::RParen)?;
    Ok(TargetAtom { predicate, args })
}

fn parse_target_term(cur: &mut Cursor) -> Result<TargetTerm, ParseError> {
    if let Tok::Var(v) = cur.peek().clone() {
        cur.next();
        return Ok(TargetTerm::Var(v));
    }
    let symbol = cur.ident()?;
    cur.expect(&Tok::LParen)?;
    let mut args = Vec::new();
    if !cur.eat(&Tok::RParen) {
        loop {
            args.push(cur.var()?);
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma)?;
        }
    }
    Ok(TargetTerm::Template { symbol, args })
}

impl fmt::Display for MappingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.schema.fmt(f)?;
        for m in &self.assertions {
            writeln!(f)?;
            writeln!(f, "mapping {}", m.id)?;
            let mut items: Vec<String> = m
                .source
                .atoms
                .iter()
                .map(|a| {
                    let args: Vec<String> = a.args.iter().map(ToString::to_string).collect();
                    format!("{}({})", a.relation, args.join(", "))
                })
                .collect();
            items.extend(m.source.filters.iter().map(ToString::to_string));
            if items.is_empty() {
                items.push("true".to_string());
            }
            writeln!(f, "source: {}", items.join(", "))?;
            let target: Vec<String> = m.target.iter().map(ToString::to_string).collect();
            writeln!(f, "target: {}", target.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(vec![
                Relation { name: "R".into(), columns: vec!["a".into()] },
                Relation { name: "CPMR".into(), columns: vec!["id".into(), "accepting".into(), "moreview".into(), "ecdreview".into()] },
            ])
            .unwrap(),
        )
    }

    const REVIEWED: &str = "
        mapping rr_accepting
        source: CPMR(?x, ?a, _, _), ?a = 1
        target: ReviewedReport(cpmr(?x))
        mapping rr_moreview
        source: CPMR(?x, _, ?m, _), ?m = 1
        target: ReviewedReport(cpmr(?x))
        mapping rr_ecdreview
        source: CPMR(?x, _, _, ?e), ?e = 1
        target: ReviewedReport(cpmr(?x))
    ";

    #[test]
    fn reviewed_report_three_assertions() {
        let m = MappingSet::parse(REVIEWED, &schema()).unwrap();
        assert_eq!(m.assertions().len(), 3);
        assert_eq!(m.function_symbols(), [("cpmr".to_string(), 1)].into());
        let i = DatabaseInstance::parse(schema(), "CPMR(1, 1, 0, 0) CPMR(2, 0, 0, 0) CPMR(3, 0, 0, 1)").unwrap();
        let a = materialize(&m, &i).unwrap();
        let members: BTreeSet<&Constant> = a.concept("ReviewedReport").collect();
        let want = [Constant::term("cpmr", vec![1.into()]), Constant::term("cpmr", vec![3.into()])];
        assert_eq!(members, want.iter().collect());
    }

    #[test]
    fn empty_file() {
        let m = MappingSet::parse("", &schema()).unwrap();
        assert!(m.is_empty());
        assert!(m.function_symbols().is_empty());
        assert!(materialize(&m, &DatabaseInstance::empty(schema())).unwrap().is_empty());
    }

    #[test]
    fn target_variable_must_be_source_output() {
        let err = MappingSet::parse("mapping m source: R(?x) target: P(f(?x), ?y)", &schema()).unwrap_err();
        assert!(matches!(err, Error::Model(ModelError::TargetVariable { .. })), "{err}");
    }

    #[test]
    fn symbol_arity_clash() {
        let text = "mapping a source: R(?x) target: C(f(?x))\nmapping b source: R(?x), R(?y) target: C(f(?x, ?y))";
        assert!(matches!(MappingSet::parse(text, &schema()), Err(Error::Model(ModelError::SymbolArity { .. }))));
    }

    #[test]
    fn materialize_templates() {
        let m = MappingSet::parse("mapping a source: R(?x) target: C(f(?x))", &schema()).unwrap();
        let i = DatabaseInstance::parse(schema(), "R(1) R(2)").unwrap();
        assert_eq!(materialize(&m, &i).unwrap(), ABox::parse("C(f(1)) C(f(2))").unwrap());
    }

    #[test]
    fn live_query_shape() {
        let t = TBox::parse("A <= exists(P)").unwrap();
        let l = live_query(&t);
        assert_eq!(l.disjuncts.len(), 3);
        assert_eq!(l, Ucq::parse("[ A(?x) | P(?x, _) | P(_, ?x) ]").unwrap());
        assert!(live_query(&TBox::new()).disjuncts.is_empty());
    }

    #[test]
    fn standalone_schema_inference_and_round_trip() {
        let text = "schema R(a)\nmapping a source: R(?x), S(?x, _) target: C(f(?x)), P(f(?x), ?x)";
        let m = MappingSet::parse_standalone(text).unwrap();
        assert_eq!(m.schema().arity("S"), Some(2));
        let again = MappingSet::parse_standalone(&m.to_string()).unwrap();
        assert_eq!(again, m);
    }
}
