//! Values, object terms, relational schemas and instances, and ABoxes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{ModelError, ParseError};
use crate::syntax::{Cursor, Tok};

/// An atom of the value universe.
///
/// The derived order (booleans, then integers, then strings) is what
/// canonical serialization and deterministic output rely on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Str(String),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "boolean",
            Value::Int(_) => "integer",
            Value::Str(_) => "string",
        }
    }

    pub fn same_type(&self, other: &Value) -> bool {
        self.type_name() == other.type_name()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

/// `f(v1, ..., vn)`: a function symbol applied to values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectTerm {
    pub symbol: String,
    pub args: Vec<Value>,
}

impl fmt::Display for ObjectTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.symbol)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// An individual of the ontology level: a plain value or an object term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Value(Value),
    Term(ObjectTerm),
}

impl Constant {
    pub fn term(symbol: &str, args: Vec<Value>) -> Self {
        Constant::Term(ObjectTerm { symbol: symbol.to_string(), args })
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Constant::Value(v) => Some(v),
            Constant::Term(_) => None,
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Value(v) => v.fmt(f),
            Constant::Term(t) => t.fmt(f),
        }
    }
}

impl Serialize for Constant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Constant::Value(v) => v.serialize(s),
            Constant::Term(t) => s.serialize_str(&t.to_string()),
        }
    }
}

impl<T: Into<Value>> From<T> for Constant {
    fn from(v: T) -> Self {
        Constant::Value(v.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub columns: Vec<String>,
}

impl Relation {
    pub fn arity(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    relations: Vec<Relation>,
    index: BTreeMap<String, usize>,
}

impl Schema {
    pub fn new(relations: Vec<Relation>) -> Result<Self, ModelError> {
        let mut schema = Schema::default();
        for r in relations {
            schema.add(r)?;
        }
        Ok(schema)
    }

    pub fn add(&mut self, rel: Relation) -> Result<(), ModelError> {
        if self.index.contains_key(&rel.name) {
            return Err(ModelError::DuplicateRelation(rel.name));
        }
        if rel.columns.is_empty() {
            return Err(ModelError::EmptyRelation(rel.name));
        }
        let mut seen = BTreeSet::new();
        for c in &rel.columns {
            if !seen.insert(c) {
                return Err(ModelError::DuplicateColumn { relation: rel.name.clone(), column: c.clone() });
            }
        }
        self.index.insert(rel.name.clone(), self.relations.len());
        self.relations.push(rel);
        Ok(())
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.index.get(name).map(|&i| &self.relations[i])
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.get(name).map(Relation::arity)
    }

    pub fn check_atom(&self, name: &str, arity: usize) -> Result<(), ModelError> {
        match self.arity(name) {
            None => Err(ModelError::UnknownRelation(name.to_string())),
            Some(a) if a != arity => {
                Err(ModelError::ArityMismatch { name: name.to_string(), expected: a, found: arity })
            }
            Some(_) => Ok(()),
        }
    }

    /// Find the index of a column by name within a relation.
    pub fn column(&self, relation: &str, column: &str) -> Option<usize> {
        self.get(relation)?.columns.iter().position(|c| c == column)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.relations {
            writeln!(f, "schema {}({})", r.name, r.columns.join(", "))?;
        }
        Ok(())
    }
}

pub type Tuple = Vec<Value>;

/// A finite set of tuples per relation of a schema.
///
/// Relations without tuples are not stored, so two instances are equal
/// exactly when they hold the same facts.
#[derive(Clone, Debug)]
pub struct DatabaseInstance {
    schema: Arc<Schema>,
    tuples: BTreeMap<String, BTreeSet<Tuple>>,
}

impl PartialEq for DatabaseInstance {
    fn eq(&self, other: &Self) -> bool {
        self.tuples == other.tuples
    }
}

impl Eq for DatabaseInstance {}

impl DatabaseInstance {
    pub fn empty(schema: Arc<Schema>) -> Self {
        DatabaseInstance { schema, tuples: BTreeMap::new() }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn insert(&mut self, relation: &str, tuple: Tuple) -> Result<bool, ModelError> {
        self.schema.check_atom(relation, tuple.len())?;
        Ok(self.tuples.entry(relation.to_string()).or_default().insert(tuple))
    }

    pub fn remove(&mut self, relation: &str, tuple: &[Value]) -> bool {
        let Some(set) = self.tuples.get_mut(relation) else {
            return false;
        };
        let removed = set.remove(tuple);
        if set.is_empty() {
            self.tuples.remove(relation);
        }
        removed
    }

    pub fn contains(&self, relation: &str, tuple: &[Value]) -> bool {
        self.tuples.get(relation).is_some_and(|s| s.contains(tuple))
    }

    pub fn tuples(&self, relation: &str) -> impl Iterator<Item = &Tuple> {
        self.tuples.get(relation).into_iter().flatten()
    }

    pub fn facts(&self) -> impl Iterator<Item = (&str, &Tuple)> {
        self.tuples.iter().flat_map(|(r, ts)| ts.iter().map(move |t| (r.as_str(), t)))
    }

    pub fn len(&self) -> usize {
        self.tuples.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Every value occurring in some tuple.
    pub fn adom(&self) -> BTreeSet<Value> {
        self.facts().flat_map(|(_, t)| t.iter().cloned()).collect()
    }

    /// Deterministic, injective serialization of the tuple sets.
    ///
    /// Layout: per nonempty relation in name order, a length-prefixed name,
    /// the tuple count, then every tuple (already sorted) as tagged values.
    pub fn canonical_form(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 * self.len() + 8);
        for (rel, tuples) in &self.tuples {
            put_str(&mut out, rel);
            out.extend_from_slice(&(tuples.len() as u64).to_be_bytes());
            for t in tuples {
                for v in t {
                    put_value(&mut out, v);
                }
            }
        }
        out
    }

    /// Parse a list of facts (`R(1, "a")`), one per line or comma separated.
    pub fn parse(schema: Arc<Schema>, text: &str) -> Result<Self, crate::Error> {
        let mut cur = Cursor::new(text)?;
        let mut inst = DatabaseInstance::empty(schema);
        while !cur.at_eof() {
            let (rel, tuple) = parse_fact(&mut cur)?;
            inst.insert(&rel, tuple)?;
            cur.eat(&Tok::Comma);
        }
        Ok(inst)
    }
}

impl fmt::Display for DatabaseInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (rel, t) in self.facts() {
            writeln!(f, "{rel}({})", join(t))?;
        }
        Ok(())
    }
}

pub(crate) fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u64).to_be_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn put_value(out: &mut Vec<u8>, v: &Value) {
    match v {
        Value::Bool(b) => {
            out.push(0);
            out.push(*b as u8);
        }
        Value::Int(i) => {
            out.push(1);
            out.extend_from_slice(&i.to_be_bytes());
        }
        Value::Str(s) => {
            out.push(2);
            put_str(out, s);
        }
    }
}

/// Parse a literal value: `"str"`, `42`, `true`, `false`.
pub(crate) fn parse_value(cur: &mut Cursor) -> Result<Value, ParseError> {
    match cur.peek().clone() {
        Tok::Str(s) => {
            cur.next();
            Ok(Value::Str(s))
        }
        Tok::Int(i) => {
            cur.next();
            Ok(Value::Int(i))
        }
        Tok::Ident(w) if w == "true" || w == "false" => {
            cur.next();
            Ok(Value::Bool(w == "true"))
        }
        _ => Err(cur.unexpected("literal value")),
    }
}

/// Parse a constant: a literal value or an object term `f(v, ...)`.
pub(crate) fn parse_constant(cur: &mut Cursor) -> Result<Constant, ParseError> {
    if let Tok::Ident(w) = cur.peek().clone() {
        if *cur.peek_at(1) == Tok::LParen {
            cur.next();
            cur.next();
            let mut args = Vec::new();
            if !cur.eat(&Tok::RParen) {
                loop {
                    args.push(parse_value(cur)?);
                    if cur.eat(&Tok::RParen) {
                        break;
                    }
                    cur.expect(&Tok::Comma)?;
                }
            }
            return Ok(Constant::term(&w, args));
        }
    }
    parse_value(cur).map(Constant::Value)
}

pub(crate) fn parse_fact(cur: &mut Cursor) -> Result<(String, Tuple), ParseError> {
    let rel = cur.ident()?;
    cur.expect(&Tok::LParen)?;
    let mut tuple = Vec::new();
    if !cur.eat(&Tok::RParen) {
        loop {
            tuple.push(parse_value(cur)?);
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma)?;
        }
    }
    Ok((rel, tuple))
}

/// Concept and role membership assertions over constants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ABox {
    concepts: BTreeMap<String, BTreeSet<Constant>>,
    roles: BTreeMap<String, BTreeSet<(Constant, Constant)>>,
}

impl ABox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_concept(&mut self, name: &str, c: Constant) -> bool {
        self.concepts.entry(name.to_string()).or_default().insert(c)
    }

    pub fn add_role(&mut self, name: &str, a: Constant, b: Constant) -> bool {
        self.roles.entry(name.to_string()).or_default().insert((a, b))
    }

    pub fn has_concept(&self, name: &str, c: &Constant) -> bool {
        self.concepts.get(name).is_some_and(|s| s.contains(c))
    }

    pub fn has_role(&self, name: &str, a: &Constant, b: &Constant) -> bool {
        self.roles.get(name).is_some_and(|s| s.contains(&(a.clone(), b.clone())))
    }

    pub fn concept(&self, name: &str) -> impl Iterator<Item = &Constant> {
        self.concepts.get(name).into_iter().flatten()
    }

    pub fn role(&self, name: &str) -> impl Iterator<Item = &(Constant, Constant)> {
        self.roles.get(name).into_iter().flatten()
    }

    /// Role pairs whose first component is `a`.
    pub fn role_from<'a>(&'a self, name: &str, a: &'a Constant) -> impl Iterator<Item = &'a (Constant, Constant)> + 'a {
        self.roles
            .get(name)
            .into_iter()
            .flat_map(move |s| s.range((a.clone(), min_constant())..).take_while(move |(x, _)| x == a))
    }

    pub fn concept_facts(&self) -> impl Iterator<Item = (&str, &Constant)> {
        self.concepts.iter().flat_map(|(n, s)| s.iter().map(move |c| (n.as_str(), c)))
    }

    pub fn role_facts(&self) -> impl Iterator<Item = (&str, &Constant, &Constant)> {
        self.roles.iter().flat_map(|(n, s)| s.iter().map(move |(a, b)| (n.as_str(), a, b)))
    }

    pub fn len(&self) -> usize {
        self.concepts.values().map(BTreeSet::len).sum::<usize>() + self.roles.values().map(BTreeSet::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every constant mentioned by some fact.
    pub fn adom(&self) -> BTreeSet<Constant> {
        let mut out: BTreeSet<Constant> = self.concept_facts().map(|(_, c)| c.clone()).collect();
        for (_, a, b) in self.role_facts() {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        out
    }

    pub fn is_subset(&self, other: &ABox) -> bool {
        self.concept_facts().all(|(n, c)| other.has_concept(n, c))
            && self.role_facts().all(|(n, a, b)| other.has_role(n, a, b))
    }

    pub fn extend(&mut self, other: &ABox) {
        for (n, c) in other.concept_facts() {
            self.add_concept(n, c.clone());
        }
        for (n, a, b) in other.role_facts() {
            self.add_role(n, a.clone(), b.clone());
        }
    }

    /// Parse facts such as `C(f(1))` and `P(f(1), 2)`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut cur = Cursor::new(text)?;
        let mut abox = ABox::new();
        while !cur.at_eof() {
            let name = cur.ident()?;
            cur.expect(&Tok::LParen)?;
            let a = parse_constant(&mut cur)?;
            if cur.eat(&Tok::Comma) {
                let b = parse_constant(&mut cur)?;
                cur.expect(&Tok::RParen)?;
                abox.add_role(&name, a, b);
            } else {
                cur.expect(&Tok::RParen)?;
                abox.add_concept(&name, a);
            }
            cur.eat(&Tok::Comma);
        }
        Ok(abox)
    }
}

fn min_constant() -> Constant {
    Constant::Value(Value::Bool(false))
}

impl fmt::Display for ABox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, c) in self.concept_facts() {
            writeln!(f, "{n}({c})")?;
        }
        for (n, a, b) in self.role_facts() {
            writeln!(f, "{n}({a}, {b})")?;
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
                Relation { name: "R".into(), columns: vec!["a".into(), "b".into()] },
                Relation { name: "S".into(), columns: vec!["a".into()] },
            ])
            .unwrap(),
        )
    }

    #[test]
    fn adom_of_instances() {
        let s = schema();
        assert!(DatabaseInstance::empty(s.clone()).adom().is_empty());
        let i = DatabaseInstance::parse(s, "R(1, 2)\nS(2)").unwrap();
        assert_eq!(i.adom(), [Value::Int(1), Value::Int(2)].into_iter().collect());
    }

    #[test]
    fn adom_of_aboxes() {
        assert!(ABox::new().adom().is_empty());
        let a = ABox::parse("C(f(1)) P(f(1), 2)").unwrap();
        let expected: BTreeSet<Constant> = [Constant::term("f", vec![Value::Int(1)]), Constant::from(2)].into();
        assert_eq!(a.adom(), expected);
    }

    #[test]
    fn canonical_form_ignores_insertion_order() {
        let s = schema();
        let a = DatabaseInstance::parse(s.clone(), "R(1, 2) R(3, 4) S(\"x\")").unwrap();
        let b = DatabaseInstance::parse(s.clone(), "S(\"x\") R(3, 4) R(1, 2)").unwrap();
        assert_eq!(a.canonical_form(), a.canonical_form());
        assert_eq!(a.canonical_form(), b.canonical_form());
        let c = DatabaseInstance::parse(s, "S(\"x\") R(3, 4)").unwrap();
        assert_ne!(a.canonical_form(), c.canonical_form());
    }

    #[test]
    fn canonical_form_separates_types() {
        let s = schema();
        let a = DatabaseInstance::parse(s.clone(), "S(1)").unwrap();
        let b = DatabaseInstance::parse(s.clone(), "S(\"1\")").unwrap();
        let c = DatabaseInstance::parse(s, "S(true)").unwrap();
        assert_ne!(a.canonical_form(), b.canonical_form());
        assert_ne!(a.canonical_form(), c.canonical_form());
    }

    #[test]
    fn removing_last_tuple_restores_equality() {
        let s = schema();
        let mut a = DatabaseInstance::parse(s.clone(), "S(1)").unwrap();
        assert!(a.remove("S", &[Value::Int(1)]));
        assert_eq!(a, DatabaseInstance::empty(s));
        assert!(a.canonical_form().is_empty());
    }

    #[test]
    fn arity_and_unknown_relation_errors() {
        let s = schema();
        assert!(DatabaseInstance::parse(s.clone(), "R(1)").is_err());
        assert!(DatabaseInstance::parse(s, "T(1)").is_err());
    }

    #[test]
    fn schema_invariants() {
        let r = |n: &str, cols: &[&str]| Relation { name: n.into(), columns: cols.iter().map(|c| c.to_string()).collect() };
        assert!(Schema::new(vec![r("R", &["a"]), r("R", &["b"])]).is_err());
        assert!(Schema::new(vec![r("R", &[])]).is_err());
        assert!(Schema::new(vec![r("R", &["a", "a"])]).is_err());
    }

    #[test]
    fn constant_equality_is_structural() {
        let f1 = Constant::term("f", vec![1.into()]);
        assert_eq!(f1, Constant::term("f", vec![1.into()]));
        assert_ne!(f1, Constant::term("g", vec![1.into()]));
        assert_ne!(f1, Constant::term("f", vec![2.into()]));
    }

    #[test]
    fn role_from_ranges_by_first_component() {
        let a = ABox::parse("P(1, 2) P(1, 3) P(2, 1) P(f(1), 4)").unwrap();
        let one = Constant::from(1);
        let got: Vec<_> = a.role_from("P", &one).map(|(_, b)| b.clone()).collect();
        assert_eq!(got, vec![Constant::from(2), Constant::from(3)]);
    }
}
