use std::collections::BTreeSet;
use std::fmt;

use crate::error::ParseError;
use crate::kb::{parse_value, Value};
use crate::query::Var;
use crate::syntax::{Cursor, Tok};

/// A term of the relational level: a value variable or a literal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SrcTerm {
    Var(Var),
    Val(Value),
}

impl SrcTerm {
    pub fn var(v: &str) -> Self {
        SrcTerm::Var(v.to_string())
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            SrcTerm::Var(v) => Some(v),
            SrcTerm::Val(_) => None,
        }
    }
}

impl fmt::Display for SrcTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SrcTerm::Var(v) => write!(f, "?{v}"),
            SrcTerm::Val(c) => c.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RelAtom {
    pub relation: String,
    pub args: Vec<SrcTerm>,
}

impl RelAtom {
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.args.iter().filter_map(SrcTerm::as_var)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn is_equality(self) -> bool {
        matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Filter {
    pub left: SrcTerm,
    pub op: CmpOp,
    pub right: SrcTerm,
}

impl Filter {
    pub fn eq(left: SrcTerm, right: SrcTerm) -> Self {
        Filter { left, op: CmpOp::Eq, right }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.left.as_var().into_iter().chain(self.right.as_var())
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op.symbol(), self.right)
    }
}

/// Select-project-join query with comparison filters.
///
/// `output` lists the returned terms; inside a [`SourceLeaf`] it is aligned
/// with the leaf's variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SourceQuery {
    pub atoms: Vec<RelAtom>,
    pub filters: Vec<Filter>,
    pub output: Vec<SrcTerm>,
}

impl SourceQuery {
    /// Variables of the relational atoms in order of first occurrence.
    pub fn atom_vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for v in self.atoms.iter().flat_map(RelAtom::vars) {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Every output and filter variable occurs in an atom.
    pub fn unsafe_vars(&self) -> Vec<Var> {
        let bound: BTreeSet<&Var> = self.atoms.iter().flat_map(RelAtom::vars).collect();
        let mut out: Vec<Var> = Vec::new();
        for v in self.output.iter().filter_map(SrcTerm::as_var).chain(self.filters.iter().flat_map(Filter::vars)) {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }

    pub fn fmt_body(&self, f: &mut fmt::Formatter<'_>, vars: &[Var]) -> fmt::Result {
        let mut occ = std::collections::BTreeMap::new();
        for v in self.atoms.iter().flat_map(RelAtom::vars).chain(self.filters.iter().flat_map(Filter::vars)) {
            *occ.entry(v).or_insert(0usize) += 1;
        }
        let shown: BTreeSet<&Var> = self.output.iter().filter_map(SrcTerm::as_var).collect();
        let mut items: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                let args: Vec<String> = a
                    .args
                    .iter()
                    .map(|t| match t {
                        SrcTerm::Var(v) if occ[v] == 1 && !shown.contains(v) => "_".to_string(),
                        t => t.to_string(),
                    })
                    .collect();
                format!("{}({})", a.relation, args.join(", "))
            })
            .collect();
        items.extend(self.filters.iter().map(ToString::to_string));
        for (t, v) in self.output.iter().zip(vars) {
            if t.as_var() != Some(v) {
                items.push(format!("?{v} = {t}"));
            }
        }
        if items.is_empty() {
            items.push("true".to_string());
        }
        f.write_str(&items.join(", "))
    }
}

impl fmt::Display for SourceQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<Var> = self.output.iter().filter_map(|t| t.as_var().cloned()).collect();
        self.fmt_body(f, &vars)
    }
}

/// Parse comma-separated relational atoms and filters, stopping before
/// the first token that cannot continue the list.
pub(crate) fn parse_source_items(cur: &mut Cursor) -> Result<(Vec<RelAtom>, Vec<Filter>), ParseError> {
    let mut atoms = Vec::new();
    let mut filters = Vec::new();
    let mut anon = 0usize;
    loop {
        match cur.peek().clone() {
            Tok::Ident(w) if w == "true" && *cur.peek_at(1) != Tok::LParen => {
                cur.next();
            }
            Tok::Ident(name) if *cur.peek_at(1) == Tok::LParen => {
                cur.next();
                cur.next();
                let mut args = Vec::new();
                if !cur.eat(&Tok::RParen) {
                    loop {
                        args.push(match cur.peek() {
                            Tok::Underscore => {
                                cur.next();
                                anon += 1;
                                SrcTerm::Var(format!("\0{}", anon - 1))
                            }
                            _ => parse_src_term(cur)?,
                        });
                        if cur.eat(&Tok::RParen) {
                            break;
                        }
                        cur.expect(&Tok::Comma)?;
                    }
                }
                atoms.push(RelAtom { relation: name, args });
            }
            _ => {
                let left = parse_src_term(cur)?;
                let op = match cur.next() {
                    Tok::Eq => CmpOp::Eq,
                    Tok::Ne => CmpOp::Ne,
                    Tok::Lt => CmpOp::Lt,
                    Tok::Le => CmpOp::Le,
                    Tok::Gt => CmpOp::Gt,
                    Tok::Ge => CmpOp::Ge,
                    _ => return Err(ParseError::new(cur.pos(), "expected comparison operator")),
                };
                let right = parse_src_term(cur)?;
                filters.push(Filter { left, op, right });
            }
        }
        if !(*cur.peek() == Tok::Comma) {
            break;
        }
        cur.next();
    }
    // Name anonymous positions apart from every user variable.
    let used: BTreeSet<Var> = atoms
        .iter()
        .flat_map(RelAtom::vars)
        .chain(filters.iter().flat_map(Filter::vars))
        .filter(|v| !v.starts_with('\0'))
        .cloned()
        .collect();
    let mut k = 0usize;
    for a in &mut atoms {
        for t in &mut a.args {
            if let SrcTerm::Var(v) = t {
                if v.starts_with('\0') {
                    let name = loop {
                        let cand = format!("_{k}");
                        k += 1;
                        if !used.contains(&cand) {
                            break cand;
                        }
                    };
                    *v = name;
                }
            }
        }
    }
    Ok((atoms, filters))
}

fn parse_src_term(cur: &mut Cursor) -> Result<SrcTerm, ParseError> {
    match cur.peek().clone() {
        Tok::Var(v) => {
            cur.next();
            Ok(SrcTerm::Var(v))
        }
        _ => parse_value(cur).map(SrcTerm::Val),
    }
}

/// A union of source queries sharing the output variables `vars`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SourceLeaf {
    pub vars: Vec<Var>,
    pub disjuncts: Vec<SourceQuery>,
}

impl SourceLeaf {
    pub fn is_false(&self) -> bool {
        self.disjuncts.is_empty()
    }
}

impl fmt::Display for SourceLeaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[ ")?;
        if self.disjuncts.is_empty() {
            f.write_str("false")?;
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            d.fmt_body(f, &self.vars)?;
        }
        f.write_str(" ]")
    }
}

/// First-order query over a relational schema with active-domain semantics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FoQuery {
    Leaf(SourceLeaf),
    Not(Box<FoQuery>),
    And(Box<FoQuery>, Box<FoQuery>),
    Or(Box<FoQuery>, Box<FoQuery>),
    Exists(Var, Box<FoQuery>),
}

impl FoQuery {
    pub fn falsum() -> FoQuery {
        FoQuery::Leaf(SourceLeaf { vars: Vec::new(), disjuncts: Vec::new() })
    }

    pub fn verum() -> FoQuery {
        FoQuery::Leaf(SourceLeaf {
            vars: Vec::new(),
            disjuncts: vec![SourceQuery { atoms: Vec::new(), filters: Vec::new(), output: Vec::new() }],
        })
    }

    pub fn not(q: FoQuery) -> FoQuery {
        FoQuery::Not(Box::new(q))
    }

    pub fn and(a: FoQuery, b: FoQuery) -> FoQuery {
        FoQuery::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FoQuery, b: FoQuery) -> FoQuery {
        FoQuery::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, q: FoQuery) -> FoQuery {
        FoQuery::Exists(v.to_string(), Box::new(q))
    }

    /// Conjunction that folds away syntactic `false`.
    pub fn and_simplified(a: FoQuery, b: FoQuery) -> FoQuery {
        if a.is_false() || b.is_false() {
            FoQuery::falsum()
        } else {
            FoQuery::and(a, b)
        }
    }

    /// Disjunction that folds away syntactic `false`.
    pub fn or_simplified(a: FoQuery, b: FoQuery) -> FoQuery {
        match (a.is_false(), b.is_false()) {
            (true, _) => b,
            (_, true) => a,
            _ => FoQuery::or(a, b),
        }
    }

    /// Syntactically false: an empty union, possibly under `and`/`or`/`exists`.
    pub fn is_false(&self) -> bool {
        match self {
            FoQuery::Leaf(l) => l.is_false(),
            FoQuery::Not(_) => false,
            FoQuery::And(a, b) => a.is_false() || b.is_false(),
            FoQuery::Or(a, b) => a.is_false() && b.is_false(),
            FoQuery::Exists(_, q) => q.is_false(),
        }
    }

    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        match self {
            FoQuery::Leaf(l) => {
                for v in &l.vars {
                    if !bound.contains(v) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
            FoQuery::Not(q) => q.collect_free(bound, out),
            FoQuery::And(a, b) | FoQuery::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            FoQuery::Exists(v, q) => {
                bound.push(v.clone());
                q.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn leaves(&self) -> Vec<&SourceLeaf> {
        let mut out = Vec::new();
        self.visit(&mut |l| out.push(l));
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a SourceLeaf)) {
        match self {
            FoQuery::Leaf(l) => f(l),
            FoQuery::Not(q) | FoQuery::Exists(_, q) => q.visit(f),
            FoQuery::And(a, b) | FoQuery::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }
}

impl fmt::Display for FoQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoQuery::Leaf(l) => l.fmt(f),
            FoQuery::Not(q) => write!(f, "not {}", FoParen(q)),
            FoQuery::And(a, b) => write!(f, "{} and {}", FoParen(a), FoParen(b)),
            FoQuery::Or(a, b) => write!(f, "{} or {}", FoParen(a), FoParen(b)),
            FoQuery::Exists(v, q) => write!(f, "exists ?{v} . {q}"),
        }
    }
}

struct FoParen<'a>(&'a FoQuery);

impl fmt::Display for FoParen<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            FoQuery::Leaf(_) | FoQuery::Not(_) => self.0.fmt(f),
            q => write!(f, "({q})"),
        }
    }
}
