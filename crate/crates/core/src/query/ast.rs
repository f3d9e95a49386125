use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::ParseError;
use crate::kb::{parse_constant, Constant};
use crate::syntax::{Cursor, Tok};

pub type Var = String;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Const(Constant),
}

impl Term {
    pub fn var(v: &str) -> Self {
        Term::Var(v.to_string())
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

/// `N(t)` for a concept, `P(t1, t2)` for a role.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn concept(name: &str, t: Term) -> Self {
        Atom { predicate: name.to_string(), args: vec![t] }
    }

    pub fn role(name: &str, a: Term, b: Term) -> Self {
        Atom { predicate: name.to_string(), args: vec![a, b] }
    }

    pub fn is_role(&self) -> bool {
        self.args.len() == 2
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.args.iter().filter_map(Term::as_var)
    }
}

/// A conjunctive query. `head[i]` is the term returned for the i-th answer
/// variable of the enclosing [`Ucq`]: usually that variable itself, but
/// rewriting may identify it with an earlier answer variable or a constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cq {
    pub head: Vec<Term>,
    pub atoms: Vec<Atom>,
}

impl Cq {
    pub fn new(answer_vars: &[Var], atoms: Vec<Atom>) -> Self {
        Cq { head: answer_vars.iter().map(|v| Term::Var(v.clone())).collect(), atoms }
    }

    pub fn occurrences(&self) -> BTreeMap<&Var, usize> {
        let mut occ = BTreeMap::new();
        for v in self.atoms.iter().flat_map(Atom::vars) {
            *occ.entry(v).or_insert(0) += 1;
        }
        occ
    }

    pub fn head_vars(&self) -> BTreeSet<&Var> {
        self.head.iter().filter_map(Term::as_var).collect()
    }

    /// A non-answer variable occurring exactly once in the body.
    pub fn is_unbound(&self, t: &Term) -> bool {
        match t {
            Term::Var(v) => {
                !self.head.iter().any(|h| h.as_var() == Some(v))
                    && self.atoms.iter().flat_map(Atom::vars).filter(|w| *w == v).count() == 1
            }
            Term::Const(_) => false,
        }
    }

    pub fn substitute(&self, sub: &BTreeMap<Var, Term>) -> Cq {
        let apply = |t: &Term| match t {
            Term::Var(v) => sub.get(v).cloned().unwrap_or_else(|| t.clone()),
            c => c.clone(),
        };
        Cq {
            head: self.head.iter().map(apply).collect(),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { predicate: a.predicate.clone(), args: a.args.iter().map(apply).collect() })
                .collect(),
        }
    }

    /// Rename variables canonically and sort/deduplicate atoms, so that CQs
    /// equal up to variable renaming usually become structurally equal.
    ///
    /// Head variables take the name of the first answer variable they
    /// stand for; body-only variables become `_0`, `_1`, ... by first
    /// occurrence in the sorted body.
    pub fn canonical(&self, answer_vars: &[Var]) -> Cq {
        let mut names: BTreeMap<Var, Var> = BTreeMap::new();
        for (t, av) in self.head.iter().zip(answer_vars) {
            if let Term::Var(v) = t {
                names.entry(v.clone()).or_insert_with(|| av.clone());
            }
        }
        // Two passes: sort with existentials masked, number, then sort again.
        let mask = |a: &Atom, names: &BTreeMap<Var, Var>| -> Atom {
            Atom {
                predicate: a.predicate.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::Var(names.get(v).cloned().unwrap_or_else(|| "\u{10FFFF}".to_string())),
                        c => c.clone(),
                    })
                    .collect(),
            }
        };
        let mut order: Vec<&Atom> = self.atoms.iter().collect();
        order.sort_by_cached_key(|a| mask(a, &names));
        let mut next = 0usize;
        for a in &order {
            for v in a.vars() {
                if !names.contains_key(v) {
                    let fresh = loop {
                        let cand = format!("_{next}");
                        next += 1;
                        if !answer_vars.contains(&cand) {
                            break cand;
                        }
                    };
                    names.insert(v.clone(), fresh);
                }
            }
        }
        let sub: BTreeMap<Var, Term> = names.into_iter().map(|(k, v)| (k, Term::Var(v))).collect();
        let mut out = self.substitute(&sub);
        out.atoms.sort();
        out.atoms.dedup();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ucq {
    pub answer_vars: Vec<Var>,
    pub disjuncts: Vec<Cq>,
}

impl Ucq {
    pub fn new(answer_vars: Vec<Var>, disjuncts: Vec<Cq>) -> Self {
        Ucq { answer_vars, disjuncts }
    }

    /// The union with no disjuncts: never has an answer.
    pub fn empty(answer_vars: Vec<Var>) -> Self {
        Ucq { answer_vars, disjuncts: Vec::new() }
    }

    pub fn single(answer_vars: Vec<Var>, atoms: Vec<Atom>) -> Self {
        let cq = Cq::new(&answer_vars, atoms);
        Ucq { answer_vars, disjuncts: vec![cq] }
    }

    pub fn predicates(&self) -> BTreeSet<&str> {
        self.disjuncts.iter().flat_map(|d| d.atoms.iter().map(|a| a.predicate.as_str())).collect()
    }

    pub fn atom_count(&self) -> usize {
        self.disjuncts.iter().map(|d| d.atoms.len()).sum()
    }

    pub fn parse(text: &str) -> Result<Ucq, ParseError> {
        let mut cur = Cursor::new(text)?;
        cur.expect(&Tok::LBracket)?;
        let q = parse_ucq_body(&mut cur)?;
        cur.expect(&Tok::RBracket)?;
        cur.expect_eof()?;
        Ok(q)
    }

    /// Named variables in the order a reader meets them in the printed body.
    fn printed_var_order(&self) -> (Vec<Var>, bool) {
        let mut seen = Vec::new();
        let mut shared_existential = false;
        for d in &self.disjuncts {
            let occ = d.occurrences();
            for a in &d.atoms {
                for v in a.vars() {
                    if self.answer_vars.contains(v) {
                        if !seen.contains(v) {
                            seen.push(v.clone());
                        }
                    } else if occ[v] > 1 {
                        shared_existential = true;
                    }
                }
            }
            for (t, av) in d.head.iter().zip(&self.answer_vars) {
                if t.as_var() != Some(av) && !seen.contains(av) {
                    seen.push(av.clone());
                }
            }
        }
        (seen, shared_existential)
    }
}

/// Parse the inside of `[ ... ]`: an optional `select ?x, ?y :` prefix and
/// `|`-separated conjunctions of atoms and `?v = term` bindings.
pub(crate) fn parse_ucq_body(cur: &mut Cursor) -> Result<Ucq, ParseError> {
    let start = cur.pos();
    let mut select: Option<Vec<Var>> = None;
    if cur.is_kw("select") && !matches!(cur.peek_at(1), Tok::LParen) {
        cur.next();
        let mut vars = Vec::new();
        if !cur.eat(&Tok::Colon) {
            loop {
                vars.push(cur.var()?);
                if cur.eat(&Tok::Colon) {
                    break;
                }
                cur.expect(&Tok::Comma)?;
            }
        }
        select = Some(vars);
    }

    struct RawCq {
        atoms: Vec<Atom>,
        bindings: Vec<(Var, Term)>,
        dropped: bool,
    }

    let mut raws = Vec::new();
    let mut anon = 0usize;
    loop {
        let mut raw = RawCq { atoms: Vec::new(), bindings: Vec::new(), dropped: false };
        loop {
            match cur.peek().clone() {
                Tok::Ident(w) if (w == "true" || w == "false") && *cur.peek_at(1) != Tok::LParen => {
                    cur.next();
                    raw.dropped |= w == "false";
                }
                Tok::Ident(name) => {
                    cur.next();
                    cur.expect(&Tok::LParen)?;
                    let mut args = vec![parse_term(cur, &mut anon)?];
                    if cur.eat(&Tok::Comma) {
                        args.push(parse_term(cur, &mut anon)?);
                    }
                    cur.expect(&Tok::RParen)?;
                    raw.atoms.push(Atom { predicate: name, args });
                }
                Tok::Var(v) => {
                    cur.next();
                    cur.expect(&Tok::Eq)?;
                    let t = parse_term(cur, &mut anon)?;
                    raw.bindings.push((v, t));
                }
                _ => return Err(cur.unexpected("atom, binding, `true` or `false`")),
            }
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        raws.push(raw);
        if !cur.eat(&Tok::Pipe) {
            break;
        }
    }

    // Anonymous variables were numbered `\0N`; give them names no user
    // variable uses.
    let mut used: BTreeSet<Var> = BTreeSet::new();
    for r in &raws {
        for a in &r.atoms {
            used.extend(a.vars().filter(|v| !v.starts_with('\0')).cloned());
        }
        for (v, t) in &r.bindings {
            used.insert(v.clone());
            if let Term::Var(w) = t {
                used.insert(w.clone());
            }
        }
    }
    let mut fresh = BTreeMap::new();
    let mut k = 0usize;
    for i in 0..anon {
        let name = loop {
            let cand = format!("_{k}");
            k += 1;
            if !used.contains(&cand) {
                break cand;
            }
        };
        fresh.insert(format!("\0{i}"), Term::Var(name));
    }

    let answer_vars = match select {
        Some(vs) => vs,
        None => {
            let mut order: Vec<Var> = Vec::new();
            for r in &raws {
                let names = r.atoms.iter().flat_map(Atom::vars).chain(r.bindings.iter().map(|(v, _)| v));
                for v in names {
                    if !v.starts_with('\0') && !order.contains(v) {
                        order.push(v.clone());
                    }
                }
            }
            order
        }
    };

    let mut disjuncts = Vec::new();
    for r in raws {
        if r.dropped {
            continue;
        }
        let mut cq = Cq::new(&answer_vars, r.atoms).substitute(&fresh);
        for (v, t) in r.bindings {
            if !answer_vars.contains(&v) {
                return Err(ParseError::new(start, format!("binding of `?{v}`, which is not an answer variable")));
            }
            let t = match t {
                Term::Var(w) if w.starts_with('\0') => fresh[&w].clone(),
                t => t,
            };
            if t == Term::Var(v.clone()) {
                continue;
            }
            cq = cq.substitute(&BTreeMap::from([(v, t)]));
        }
        let occ = cq.occurrences();
        for (t, av) in cq.head.iter().zip(&answer_vars) {
            if let Term::Var(v) = t {
                if !occ.contains_key(v) {
                    return Err(ParseError::new(start, format!("unsafe variable `?{av}`: it occurs in no atom")));
                }
            }
        }
        disjuncts.push(cq.canonical(&answer_vars));
    }
    Ok(Ucq { answer_vars, disjuncts })
}

fn parse_term(cur: &mut Cursor, anon: &mut usize) -> Result<Term, ParseError> {
    match cur.peek().clone() {
        Tok::Var(v) => {
            cur.next();
            Ok(Term::Var(v))
        }
        Tok::Underscore => {
            cur.next();
            *anon += 1;
            Ok(Term::Var(format!("\0{}", *anon - 1)))
        }
        _ => parse_constant(cur).map(Term::Const),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => c.fmt(f),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            t.fmt(f)?;
        }
        f.write_str(")")
    }
}

fn fmt_cq(cq: &Cq, answer_vars: &[Var], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let occ = cq.occurrences();
    let mut items: Vec<String> = cq
        .atoms
        .iter()
        .map(|a| {
            let args: Vec<String> = a
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) if !answer_vars.contains(v) && occ[v] == 1 => "_".to_string(),
                    t => t.to_string(),
                })
                .collect();
            format!("{}({})", a.predicate, args.join(", "))
        })
        .collect();
    for (t, av) in cq.head.iter().zip(answer_vars) {
        if t.as_var() != Some(av) {
            items.push(format!("?{av} = {t}"));
        }
    }
    if cq.atoms.is_empty() {
        items.insert(0, "true".to_string());
    }
    f.write_str(&items.join(", "))
}

impl fmt::Display for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[ ")?;
        let (order, shared) = self.printed_var_order();
        if shared || order != self.answer_vars {
            f.write_str("select ")?;
            let vs: Vec<String> = self.answer_vars.iter().map(|v| format!("?{v}")).collect();
            f.write_str(&vs.join(", "))?;
            f.write_str(if vs.is_empty() { ": " } else { " : " })?;
        }
        if self.disjuncts.is_empty() {
            f.write_str("false")?;
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            fmt_cq(d, &self.answer_vars, f)?;
        }
        f.write_str(" ]")
    }
}

/// Epistemic first-order query over embedded UCQs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ecq {
    Embedded(Ucq),
    Not(Box<Ecq>),
    And(Box<Ecq>, Box<Ecq>),
    Exists(Var, Box<Ecq>),
}

impl Ecq {
    pub fn not(q: Ecq) -> Ecq {
        Ecq::Not(Box::new(q))
    }

    pub fn and(a: Ecq, b: Ecq) -> Ecq {
        Ecq::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ecq, b: Ecq) -> Ecq {
        Ecq::not(Ecq::and(Ecq::not(a), Ecq::not(b)))
    }

    pub fn implies(a: Ecq, b: Ecq) -> Ecq {
        Ecq::or(Ecq::not(a), b)
    }

    pub fn exists(v: &str, q: Ecq) -> Ecq {
        Ecq::Exists(v.to_string(), Box::new(q))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        match self {
            Ecq::Embedded(u) => {
                for v in &u.answer_vars {
                    if !bound.contains(v) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
            Ecq::Not(q) => q.collect_free(bound, out),
            Ecq::And(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Ecq::Exists(v, q) => {
                bound.push(v.clone());
                q.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn leaves(&self) -> Vec<&Ucq> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |u| out.push(u));
        out
    }

    fn visit_leaves<'a>(&'a self, f: &mut impl FnMut(&'a Ucq)) {
        match self {
            Ecq::Embedded(u) => f(u),
            Ecq::Not(q) | Ecq::Exists(_, q) => q.visit_leaves(f),
            Ecq::And(a, b) => {
                a.visit_leaves(f);
                b.visit_leaves(f);
            }
        }
    }

    pub fn map_leaves(&self, f: &mut impl FnMut(&Ucq) -> Ucq) -> Ecq {
        match self {
            Ecq::Embedded(u) => Ecq::Embedded(f(u)),
            Ecq::Not(q) => Ecq::not(q.map_leaves(f)),
            Ecq::And(a, b) => {
                let a = a.map_leaves(f);
                Ecq::and(a, b.map_leaves(f))
            }
            Ecq::Exists(v, q) => Ecq::exists(v, q.map_leaves(f)),
        }
    }

    /// True when the query is a single embedded UCQ (so every answer is in
    /// the active domain by construction).
    pub fn is_positive_leaf(&self) -> bool {
        matches!(self, Ecq::Embedded(_))
    }

    pub fn parse(text: &str) -> Result<Ecq, ParseError> {
        let mut cur = Cursor::new(text)?;
        let q = parse_ecq(&mut cur)?;
        cur.expect_eof()?;
        Ok(q)
    }
}

/// `ecq := or ('->' ecq)?`, `or := and ('or' and)*`, `and := unary ('and' unary)*`,
/// `unary := 'not' unary | 'exists' ?v '.' ecq | '(' ecq ')' | '[' ucq ']'`.
pub(crate) fn parse_ecq(cur: &mut Cursor) -> Result<Ecq, ParseError> {
    let lhs = parse_ecq_or(cur)?;
    if cur.eat(&Tok::Arrow) {
        let rhs = parse_ecq(cur)?;
        return Ok(Ecq::implies(lhs, rhs));
    }
    Ok(lhs)
}

fn parse_ecq_or(cur: &mut Cursor) -> Result<Ecq, ParseError> {
    let mut q = parse_ecq_and(cur)?;
    while cur.eat_kw("or") {
        let rhs = parse_ecq_and(cur)?;
        q = Ecq::or(q, rhs);
    }
    Ok(q)
}

fn parse_ecq_and(cur: &mut Cursor) -> Result<Ecq, ParseError> {
    let mut q = parse_ecq_unary(cur)?;
    while cur.eat_kw("and") {
        let rhs = parse_ecq_unary(cur)?;
        q = Ecq::and(q, rhs);
    }
    Ok(q)
}

fn parse_ecq_unary(cur: &mut Cursor) -> Result<Ecq, ParseError> {
    if cur.eat_kw("not") {
        return Ok(Ecq::not(parse_ecq_unary(cur)?));
    }
    if cur.eat_kw("exists") {
        let v = cur.var()?;
        cur.expect(&Tok::Dot)?;
        return Ok(Ecq::Exists(v, Box::new(parse_ecq(cur)?)));
    }
    if cur.eat(&Tok::LParen) {
        let q = parse_ecq(cur)?;
        cur.expect(&Tok::RParen)?;
        return Ok(q);
    }
    if cur.eat(&Tok::LBracket) {
        let u = parse_ucq_body(cur)?;
        cur.expect(&Tok::RBracket)?;
        return Ok(Ecq::Embedded(u));
    }
    Err(cur.unexpected("`not`, `exists`, `(` or `[`"))
}

impl fmt::Display for Ecq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ecq::Embedded(u) => u.fmt(f),
            Ecq::Not(q) => write!(f, "not {}", Paren(q)),
            Ecq::And(a, b) => write!(f, "{} and {}", Paren(a), Paren(b)),
            Ecq::Exists(v, q) => write!(f, "exists ?{v} . {q}"),
        }
    }
}

struct Paren<'a>(&'a Ecq);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Ecq::Embedded(_) | Ecq::Not(_) => self.0.fmt(f),
            q => write!(f, "({q})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_concept_atom() {
        let q = Ecq::parse("[ PublishedCPReport(?x) ]").unwrap();
        let Ecq::Embedded(u) = &q else { panic!("{q:?}") };
        assert_eq!(u.answer_vars, vec!["x".to_string()]);
        assert_eq!(u.disjuncts.len(), 1);
        assert_eq!(u.disjuncts[0].atoms, vec![Atom::concept("PublishedCPReport", Term::var("x"))]);
    }

    #[test]
    fn union_of_two() {
        let u = Ucq::parse("[ C(?x) | D(?x) ]").unwrap();
        assert_eq!(u.disjuncts.len(), 2);
    }

    #[test]
    fn connective_tree() {
        let q = Ecq::parse("not [C(?x)] and exists ?y . [P(?x,?y)]").unwrap();
        match q {
            Ecq::And(a, b) => {
                assert!(matches!(*a, Ecq::Not(_)));
                assert!(matches!(*b, Ecq::Exists(ref v, _) if v == "y"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let u = Ucq::parse("[ P(_, _), Q(_) ]").unwrap();
        assert!(u.answer_vars.is_empty());
        let d = &u.disjuncts[0];
        let vars: BTreeSet<&Var> = d.atoms.iter().flat_map(Atom::vars).collect();
        assert_eq!(vars.len(), 3);
        assert!(d.atoms.iter().flat_map(|a| &a.args).all(|t| d.is_unbound(t)));
    }

    #[test]
    fn anonymous_names_avoid_user_names() {
        let u = Ucq::parse("[ select ?x : P(?x, ?_0), Q(?_0), R(_) ]").unwrap();
        let d = &u.disjuncts[0];
        assert_eq!(d.occurrences().len(), 3);
    }

    #[test]
    fn unsafe_variable_in_union_is_error() {
        assert!(Ucq::parse("[ C(?x) | D(?y) ]").is_err());
        assert!(Ucq::parse("[ select ?x : C(?y) ]").is_err());
    }

    #[test]
    fn unbalanced_brackets() {
        assert!(Ecq::parse("[ C(?x) ").is_err());
        assert!(Ecq::parse("not ( [C(?x)]").is_err());
    }

    #[test]
    fn bindings_and_constants() {
        let u = Ucq::parse("[ P(?x, ?y), ?y = ?x | C(?x), ?y = f(1) ]").unwrap();
        assert_eq!(u.answer_vars, vec!["x".to_string(), "y".to_string()]);
        assert_eq!(u.disjuncts[0].head, vec![Term::var("x"), Term::var("x")]);
        assert_eq!(u.disjuncts[1].head[1], Term::Const(Constant::term("f", vec![1.into()])));
        let again = Ucq::parse(&u.to_string()).unwrap();
        assert_eq!(again, u);
    }

    #[test]
    fn true_false_bodies() {
        let t = Ucq::parse("[ true ]").unwrap();
        assert_eq!(t.disjuncts, vec![Cq { head: vec![], atoms: vec![] }]);
        let f = Ucq::parse("[ false ]").unwrap();
        assert!(f.disjuncts.is_empty());
        assert_eq!(Ucq::parse(&t.to_string()).unwrap(), t);
        assert_eq!(Ucq::parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn select_printed_for_shared_existentials() {
        let u = Ucq::parse("[ select : P(?x, ?y), B(?y) ]").unwrap();
        let text = u.to_string();
        assert!(text.starts_with("[ select :"), "{text}");
        assert_eq!(Ucq::parse(&text).unwrap(), u);
    }

    #[test]
    fn sugar_desugars() {
        let a = Ecq::parse("[A(?x)] or [B(?x)]").unwrap();
        let b = Ecq::parse("not (not [A(?x)] and not [B(?x)])").unwrap();
        assert_eq!(a, b);
        let c = Ecq::parse("[A(?x)] -> [B(?x)]").unwrap();
        let d = Ecq::parse("not (not not [A(?x)] and not [B(?x)])").unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn free_variables() {
        let q = Ecq::parse("exists ?y . [P(?x, ?y)] and [C(?z)]").unwrap();
        assert_eq!(q.free_vars(), vec!["x".to_string(), "z".to_string()]);
    }

    #[test]
    fn ecq_round_trip() {
        for s in ["not [C(?x)] and exists ?y . [P(?x,?y)]", "exists ?x . (not [A(?x)] and [B(?x) | C(?x)])", "[ false ]"] {
            let q = Ecq::parse(s).unwrap();
            assert_eq!(Ecq::parse(&q.to_string()).unwrap(), q, "{s} => {q}");
        }
    }
}
