use std::fmt;

use crate::error::ParseError;
use crate::query::{parse_ecq, parse_ucq_body, Ecq, FoQuery, Var};
use crate::syntax::{Cursor, Tok};

/// CTL over local queries `L`, with first-order quantification `Q`.
#[allow(clippy::upper_case_acronyms)]
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ctl<L, Q> {
    Local(L),
    Not(Box<Ctl<L, Q>>),
    And(Box<Ctl<L, Q>>, Box<Ctl<L, Q>>),
    Or(Box<Ctl<L, Q>>, Box<Ctl<L, Q>>),
    Implies(Box<Ctl<L, Q>>, Box<Ctl<L, Q>>),
    AX(Box<Ctl<L, Q>>),
    EX(Box<Ctl<L, Q>>),
    AF(Box<Ctl<L, Q>>),
    EF(Box<Ctl<L, Q>>),
    AG(Box<Ctl<L, Q>>),
    EG(Box<Ctl<L, Q>>),
    AU(Box<Ctl<L, Q>>, Box<Ctl<L, Q>>),
    EU(Box<Ctl<L, Q>>, Box<Ctl<L, Q>>),
    Forall(Q),
    Exists(Q),
}

/// A guarded quantifier block `FORALL ?x . ?y . [Q] -> body`.
/// A missing body stands for `true`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quant {
    pub vars: Vec<Var>,
    pub guard: Ecq,
    pub body: Option<Box<CtlEqlFormula>>,
}

/// Ontology-level property: CTL with local ECQs.
pub type CtlEqlFormula = Ctl<Ecq, Quant>;

/// One shape-specific expansion of a quantifier block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuantBranch {
    pub vars: Vec<Var>,
    pub guard: FoQuery,
    pub body: Option<Box<CtlAFormula>>,
}

/// Relational-level property: CTL with local first-order queries. A
/// quantifier is a list of branches, conjoined for `Forall` and disjoined
/// for `Exists`.
pub type CtlAFormula = Ctl<FoQuery, Vec<QuantBranch>>;

/// Operator shape of a formula with queries erased.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Skeleton {
    Local,
    Op(&'static str, Vec<Skeleton>),
    Quant(&'static str, Option<Box<Skeleton>>),
}

impl<L, Q> Ctl<L, Q> {
    pub fn not(a: Self) -> Self {
        Ctl::Not(Box::new(a))
    }

    pub fn and(a: Self, b: Self) -> Self {
        Ctl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        Ctl::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Self, b: Self) -> Self {
        Ctl::Implies(Box::new(a), Box::new(b))
    }

    /// Operator name and children of a non-local, non-quantifier node.
    pub fn operator(&self) -> Option<(&'static str, Vec<&Self>)> {
        Some(match self {
            Ctl::Local(_) | Ctl::Forall(_) | Ctl::Exists(_) => return None,
            Ctl::Not(a) => ("!", vec![a]),
            Ctl::And(a, b) => ("AND", vec![a, b]),
            Ctl::Or(a, b) => ("OR", vec![a, b]),
            Ctl::Implies(a, b) => ("->", vec![a, b]),
            Ctl::AX(a) => ("AX", vec![a]),
            Ctl::EX(a) => ("EX", vec![a]),
            Ctl::AF(a) => ("AF", vec![a]),
            Ctl::EF(a) => ("EF", vec![a]),
            Ctl::AG(a) => ("AG", vec![a]),
            Ctl::EG(a) => ("EG", vec![a]),
            Ctl::AU(a, b) => ("AU", vec![a, b]),
            Ctl::EU(a, b) => ("EU", vec![a, b]),
        })
    }

    /// Rebuild a non-local, non-quantifier node of the same operator from
    /// new children.
    pub(crate) fn rebuild<M, R>(&self, mut kids: Vec<Ctl<M, R>>) -> Ctl<M, R> {
        let mut next = || Box::new(kids.remove(0));
        match self {
            Ctl::Not(_) => Ctl::Not(next()),
            Ctl::And(..) => Ctl::And(next(), next()),
            Ctl::Or(..) => Ctl::Or(next(), next()),
            Ctl::Implies(..) => Ctl::Implies(next(), next()),
            Ctl::AX(_) => Ctl::AX(next()),
            Ctl::EX(_) => Ctl::EX(next()),
            Ctl::AF(_) => Ctl::AF(next()),
            Ctl::EF(_) => Ctl::EF(next()),
            Ctl::AG(_) => Ctl::AG(next()),
            Ctl::EG(_) => Ctl::EG(next()),
            Ctl::AU(..) => Ctl::AU(next(), next()),
            Ctl::EU(..) => Ctl::EU(next(), next()),
            Ctl::Local(_) | Ctl::Forall(_) | Ctl::Exists(_) => unreachable!("not an operator node"),
        }
    }

    /// Number of operators and quantifiers, locals excluded.
    pub fn operator_count(&self) -> usize
    where
        Q: QuantBlock<L>,
    {
        match self {
            Ctl::Local(_) => 0,
            Ctl::Forall(q) | Ctl::Exists(q) => 1 + q.blocks().iter().map(|b| b.2.map_or(0, |x| x.operator_count())).max().unwrap_or(0),
            op => op.operator().unwrap().1.iter().map(|k| k.operator_count()).sum::<usize>() + 1,
        }
    }
}

/// Uniform access to the branches of a quantifier node.
pub trait QuantBlock<L>: Sized {
    /// `(bound variables, guard, body)` per branch.
    fn blocks(&self) -> Vec<(&[Var], &L, Option<&Ctl<L, Self>>)>;
}

impl QuantBlock<Ecq> for Quant {
    fn blocks(&self) -> Vec<(&[Var], &Ecq, Option<&CtlEqlFormula>)> {
        vec![(&self.vars, &self.guard, self.body.as_deref())]
    }
}

impl QuantBlock<FoQuery> for Vec<QuantBranch> {
    fn blocks(&self) -> Vec<(&[Var], &FoQuery, Option<&CtlAFormula>)> {
        self.iter().map(|b| (b.vars.as_slice(), &b.guard, b.body.as_deref())).collect()
    }
}

impl CtlEqlFormula {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut cur = Cursor::new(text)?;
        let f = parse_formula(&mut cur)?;
        cur.expect_eof()?;
        Ok(f)
    }

    pub fn skeleton(&self) -> Skeleton {
        match self {
            Ctl::Local(_) => Skeleton::Local,
            Ctl::Forall(q) => Skeleton::Quant("FORALL", q.body.as_ref().map(|b| Box::new(b.skeleton()))),
            Ctl::Exists(q) => Skeleton::Quant("EXISTS", q.body.as_ref().map(|b| Box::new(b.skeleton()))),
            op => {
                let (name, kids) = op.operator().unwrap();
                Skeleton::Op(name, kids.into_iter().map(Self::skeleton).collect())
            }
        }
    }

    /// Every embedded ECQ, guards included.
    pub fn queries(&self) -> Vec<&Ecq> {
        let mut out = Vec::new();
        self.visit_queries(&mut |q| out.push(q));
        out
    }

    fn visit_queries<'a>(&'a self, f: &mut impl FnMut(&'a Ecq)) {
        match self {
            Ctl::Local(q) => f(q),
            Ctl::Forall(q) | Ctl::Exists(q) => {
                f(&q.guard);
                if let Some(b) = &q.body {
                    b.visit_queries(f);
                }
            }
            op => {
                for k in op.operator().unwrap().1 {
                    k.visit_queries(f);
                }
            }
        }
    }

    /// Replace every embedded ECQ, keeping the temporal structure.
    pub fn map_queries(&self, f: &mut impl FnMut(&Ecq) -> Ecq) -> CtlEqlFormula {
        match self {
            Ctl::Local(q) => Ctl::Local(f(q)),
            Ctl::Forall(q) => Ctl::Forall(q.map(f)),
            Ctl::Exists(q) => Ctl::Exists(q.map(f)),
            op => {
                let kids = op.operator().unwrap().1.into_iter().map(|k| k.map_queries(f)).collect();
                op.rebuild(kids)
            }
        }
    }
}

impl Quant {
    fn map(&self, f: &mut impl FnMut(&Ecq) -> Ecq) -> Quant {
        Quant {
            vars: self.vars.clone(),
            guard: f(&self.guard),
            body: self.body.as_ref().map(|b| Box::new(b.map_queries(f))),
        }
    }
}

impl CtlAFormula {
    /// Skeleton of the ontology-level formula this was compiled from: a
    /// quantifier block counts as one quantifier node regardless of its
    /// branch count.
    pub fn skeleton(&self) -> Skeleton {
        match self {
            Ctl::Local(_) => Skeleton::Local,
            Ctl::Forall(bs) => Skeleton::Quant("FORALL", branch_skeleton(bs)),
            Ctl::Exists(bs) => Skeleton::Quant("EXISTS", branch_skeleton(bs)),
            op => {
                let (name, kids) = op.operator().unwrap();
                Skeleton::Op(name, kids.into_iter().map(Self::skeleton).collect())
            }
        }
    }

    pub fn local_count(&self) -> usize {
        match self {
            Ctl::Local(_) => 1,
            Ctl::Forall(bs) | Ctl::Exists(bs) => bs.iter().map(|b| 1 + b.body.as_ref().map_or(0, |x| x.local_count())).sum(),
            op => op.operator().unwrap().1.iter().map(|k| k.local_count()).sum(),
        }
    }
}

/// All branches of one block share the body skeleton; an empty block has
/// none to report.
fn branch_skeleton(bs: &[QuantBranch]) -> Option<Box<Skeleton>> {
    bs.first().and_then(|b| b.body.as_ref()).map(|b| Box::new(b.skeleton()))
}

/// `imp := or ('->' imp)?`
fn parse_formula(cur: &mut Cursor) -> Result<CtlEqlFormula, ParseError> {
    let lhs = parse_or(cur)?;
    if cur.eat(&Tok::Arrow) {
        return Ok(Ctl::implies(lhs, parse_formula(cur)?));
    }
    Ok(lhs)
}

fn parse_or(cur: &mut Cursor) -> Result<CtlEqlFormula, ParseError> {
    let mut f = parse_and(cur)?;
    while cur.eat_kw("OR") {
        f = Ctl::or(f, parse_and(cur)?);
    }
    Ok(f)
}

fn parse_and(cur: &mut Cursor) -> Result<CtlEqlFormula, ParseError> {
    let mut f = parse_unary(cur)?;
    while cur.eat_kw("AND") {
        f = Ctl::and(f, parse_unary(cur)?);
    }
    Ok(f)
}

fn parse_unary(cur: &mut Cursor) -> Result<CtlEqlFormula, ParseError> {
    if cur.eat(&Tok::Bang) {
        return Ok(Ctl::not(parse_unary(cur)?));
    }
    if let Tok::Ident(w) = cur.peek().clone() {
        let unary: Option<fn(Box<CtlEqlFormula>) -> CtlEqlFormula> = match w.as_str() {
            "AX" => Some(Ctl::AX),
            "EX" => Some(Ctl::EX),
            "AF" => Some(Ctl::AF),
            "EF" => Some(Ctl::EF),
            "AG" => Some(Ctl::AG),
            "EG" => Some(Ctl::EG),
            _ => None,
        };
        if let Some(make) = unary {
            cur.next();
            return Ok(make(Box::new(parse_unary(cur)?)));
        }
        if (w == "A" || w == "E") && *cur.peek_at(1) == Tok::LBracket {
            cur.next();
            cur.next();
            let lhs = parse_formula(cur)?;
            cur.expect_kw("U")?;
            let rhs = parse_formula(cur)?;
            cur.expect(&Tok::RBracket)?;
            let (a, b) = (Box::new(lhs), Box::new(rhs));
            return Ok(if w == "A" { Ctl::AU(a, b) } else { Ctl::EU(a, b) });
        }
        if w == "FORALL" || w == "EXISTS" {
            return parse_quant(cur, &w);
        }
    }
    if cur.eat(&Tok::LParen) {
        let f = parse_formula(cur)?;
        cur.expect(&Tok::RParen)?;
        return Ok(f);
    }
    if matches!(cur.peek(), Tok::LBracket | Tok::LBrace) {
        return Ok(Ctl::Local(parse_local(cur)?));
    }
    Err(cur.unexpected("a property"))
}

/// `[ ucq ]` or `{ ecq }`.
fn parse_local(cur: &mut Cursor) -> Result<Ecq, ParseError> {
    if cur.eat(&Tok::LBracket) {
        let u = parse_ucq_body(cur)?;
        cur.expect(&Tok::RBracket)?;
        return Ok(Ecq::Embedded(u));
    }
    cur.expect(&Tok::LBrace)?;
    let q = parse_ecq(cur)?;
    cur.expect(&Tok::RBrace)?;
    Ok(q)
}

/// `KW ?x . (KW ?y .)* local (link formula)?` with `->` after `FORALL`
/// and `AND` after `EXISTS`; the body extends as far right as possible.
fn parse_quant(cur: &mut Cursor, kw: &str) -> Result<CtlEqlFormula, ParseError> {
    let mut vars = Vec::new();
    while cur.eat_kw(kw) {
        vars.push(cur.var()?);
        cur.expect(&Tok::Dot)?;
    }
    let guard = parse_local(cur)?;
    let linked = if kw == "FORALL" { cur.eat(&Tok::Arrow) } else { cur.eat_kw("AND") };
    let body = if linked { Some(Box::new(parse_formula(cur)?)) } else { None };
    let q = Quant { vars, guard, body };
    Ok(if kw == "FORALL" { Ctl::Forall(q) } else { Ctl::Exists(q) })
}

/// Locals print as `[ ... ]` when they are a single UCQ, `{ ... }` otherwise.
pub(crate) struct EcqLocal<'a>(pub &'a Ecq);

impl fmt::Display for EcqLocal<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Ecq::Embedded(u) => u.fmt(f),
            q => write!(f, "{{ {q} }}"),
        }
    }
}

struct FoLocal<'a>(&'a FoQuery);

impl fmt::Display for FoLocal<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            FoQuery::Leaf(l) => l.fmt(f),
            q => write!(f, "{{ {q} }}"),
        }
    }
}

/// Shared printer: compound operands get parentheses.
fn fmt_ctl<L, Q>(
    node: &Ctl<L, Q>,
    f: &mut fmt::Formatter<'_>,
    local: &dyn Fn(&L, &mut fmt::Formatter<'_>) -> fmt::Result,
    quant: &dyn Fn(&Q, bool, &mut fmt::Formatter<'_>) -> fmt::Result,
) -> fmt::Result {
    let operand = |k: &Ctl<L, Q>, f: &mut fmt::Formatter<'_>| -> fmt::Result {
        let simple = matches!(
            k,
            Ctl::Local(_) | Ctl::Not(_) | Ctl::AX(_) | Ctl::EX(_) | Ctl::AF(_) | Ctl::EF(_) | Ctl::AG(_) | Ctl::EG(_) | Ctl::AU(..) | Ctl::EU(..)
        );
        if simple {
            fmt_ctl(k, f, local, quant)
        } else {
            f.write_str("(")?;
            fmt_ctl(k, f, local, quant)?;
            f.write_str(")")
        }
    };
    match node {
        Ctl::Local(l) => local(l, f),
        Ctl::Forall(q) => quant(q, true, f),
        Ctl::Exists(q) => quant(q, false, f),
        Ctl::AU(a, b) | Ctl::EU(a, b) => {
            f.write_str(if matches!(node, Ctl::AU(..)) { "A [ " } else { "E [ " })?;
            fmt_ctl(a, f, local, quant)?;
            f.write_str(" U ")?;
            fmt_ctl(b, f, local, quant)?;
            f.write_str(" ]")
        }
        Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::Implies(a, b) => {
            let (name, _) = node.operator().unwrap();
            operand(a, f)?;
            write!(f, " {name} ")?;
            operand(b, f)
        }
        op => {
            let (name, kids) = op.operator().unwrap();
            f.write_str(name)?;
            f.write_str(" ")?;
            operand(kids[0], f)
        }
    }
}

impl fmt::Display for CtlEqlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ctl(
            self,
            f,
            &|q, f| EcqLocal(q).fmt(f),
            &|q: &Quant, universal, f| {
                let kw = if universal { "FORALL" } else { "EXISTS" };
                for v in &q.vars {
                    write!(f, "{kw} ?{v} . ")?;
                }
                EcqLocal(&q.guard).fmt(f)?;
                if let Some(b) = &q.body {
                    write!(f, " {} ({b})", if universal { "->" } else { "AND" })?;
                }
                Ok(())
            },
        )
    }
}

impl fmt::Display for CtlAFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ctl(
            self,
            f,
            &|q, f| FoLocal(q).fmt(f),
            &|bs: &Vec<QuantBranch>, universal, f| {
                let kw = if universal { "FORALL" } else { "EXISTS" };
                if bs.is_empty() {
                    return f.write_str(if universal { "[ true ]" } else { "[ false ]" });
                }
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(if universal { " AND " } else { " OR " })?;
                    }
                    if bs.len() > 1 {
                        f.write_str("(")?;
                    }
                    for v in &b.vars {
                        write!(f, "{kw} ?{v} . ")?;
                    }
                    FoLocal(&b.guard).fmt(f)?;
                    if let Some(body) = &b.body {
                        write!(f, " {} ({body})", if universal { "->" } else { "AND" })?;
                    }
                    if bs.len() > 1 {
                        f.write_str(")")?;
                    }
                }
                Ok(())
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENERGY: &str = "AG (FORALL ?x . [PublishedCPReport(?x)] -> EF [FinishedReport(?x)])";

    #[test]
    fn parses_monthly_report_property() {
        let f = CtlEqlFormula::parse(ENERGY).unwrap();
        let Ctl::AG(inner) = &f else { panic!("{f:?}") };
        let Ctl::Forall(q) = inner.as_ref() else { panic!("{inner:?}") };
        assert_eq!(q.vars, vec!["x".to_string()]);
        assert!(matches!(q.body.as_deref(), Some(Ctl::EF(l)) if matches!(l.as_ref(), Ctl::Local(_))));
    }

    #[test]
    fn until_forms() {
        assert!(matches!(CtlEqlFormula::parse("E [ [A(?x)] U [B(?x)] ]").unwrap(), Ctl::EU(..)));
        assert!(matches!(CtlEqlFormula::parse("A [ [ true ] U [ false ] ]").unwrap(), Ctl::AU(..)));
    }

    #[test]
    fn unbalanced_brackets() {
        assert!(CtlEqlFormula::parse("AG ([C(?x)]").is_err());
        assert!(CtlEqlFormula::parse("E [ [A(?x)] U [B(?x)]").is_err());
    }

    #[test]
    fn connectives_and_precedence() {
        let f = CtlEqlFormula::parse("[ true ] AND [ false ] OR ! [ true ] -> [ false ]").unwrap();
        let Ctl::Implies(l, _) = &f else { panic!("{f:?}") };
        assert!(matches!(l.as_ref(), Ctl::Or(a, _) if matches!(a.as_ref(), Ctl::And(..))));
    }

    #[test]
    fn quantifier_chains_and_bare_guards() {
        let f = CtlEqlFormula::parse("FORALL ?x . FORALL ?y . [P(?x, ?y)]").unwrap();
        let Ctl::Forall(q) = &f else { panic!() };
        assert_eq!(q.vars.len(), 2);
        assert!(q.body.is_none());
        let g = CtlEqlFormula::parse("EXISTS ?x . { not [A(?x)] and [B(?x)] } AND EF [A(?x)]").unwrap();
        assert!(matches!(g, Ctl::Exists(Quant { body: Some(_), .. })));
    }

    #[test]
    fn round_trip() {
        for s in [
            ENERGY,
            "E [ [A(?x)] U [B(?x)] ]",
            "EXISTS ?y . EXISTS ?x . [Attr(?x, ?y)] AND [C(?x)]",
            "!(AX [ true ] OR EG { exists ?z . [P(?z, _)] }) -> A [ [ false ] U AF [ true ] ]",
            "(FORALL ?x . [C(?x)]) AND EXISTS ?x . [D(?x)]",
        ] {
            let f = CtlEqlFormula::parse(s).unwrap();
            assert_eq!(CtlEqlFormula::parse(&f.to_string()).unwrap(), f, "{s} => {f}");
        }
    }

    #[test]
    fn skeleton_ignores_queries() {
        let a = CtlEqlFormula::parse("AG (FORALL ?x . [A(?x)] -> EF [B(?x)])").unwrap();
        let b = CtlEqlFormula::parse("AG (FORALL ?y . [C(?y) | D(?y)] -> EF { not [E(?y)] })").unwrap();
        assert_eq!(a.skeleton(), b.skeleton());
        assert_eq!(a.operator_count(), 3);
    }
}
