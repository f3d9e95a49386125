//! DL-Lite_R TBoxes: representation, the `.tbox` grammar, normalization of
//! qualified existentials and vocabulary extraction.
//!
//! ```text
//! A <= B                      concept inclusion
//! exists(inv(P)) <= A         basic concepts: Name | exists(R) | exists(inv(R))
//! A <= exists(P, B)           qualified existential (right-hand side only)
//! role P <= inv(Q)            role inclusion
//! disjoint(A, exists(P))      concept disjointness
//! role-disjoint(P, inv(Q))    role disjointness
//! ```

use std::collections::BTreeSet;
use std::fmt;

use crate::error::ParseError;
use crate::syntax::{Cursor, Tok};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleExpr {
    pub name: String,
    pub inverse: bool,
}

impl RoleExpr {
    pub fn named(name: &str) -> Self {
        RoleExpr { name: name.to_string(), inverse: false }
    }

    pub fn inv(name: &str) -> Self {
        RoleExpr { name: name.to_string(), inverse: true }
    }

    pub fn inverted(&self) -> Self {
        RoleExpr { name: self.name.clone(), inverse: !self.inverse }
    }
}

impl fmt::Display for RoleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "inv({})", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicConcept {
    Named(String),
    Exists(RoleExpr),
}

impl BasicConcept {
    pub fn named(n: &str) -> Self {
        BasicConcept::Named(n.to_string())
    }
}

impl fmt::Display for BasicConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicConcept::Named(n) => f.write_str(n),
            BasicConcept::Exists(r) => write!(f, "exists({r})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneralConcept {
    Basic(BasicConcept),
    QualifiedExists(RoleExpr, BasicConcept),
}

impl fmt::Display for GeneralConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneralConcept::Basic(b) => b.fmt(f),
            GeneralConcept::QualifiedExists(r, b) => write!(f, "exists({r}, {b})"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TBox {
    pub concept_inclusions: Vec<(BasicConcept, GeneralConcept)>,
    pub role_inclusions: Vec<(RoleExpr, RoleExpr)>,
    pub concept_disjointness: Vec<(BasicConcept, BasicConcept)>,
    pub role_disjointness: Vec<(RoleExpr, RoleExpr)>,
    /// Roles introduced by [`TBox::normalize`]; never part of the user vocabulary.
    pub auxiliary_roles: BTreeSet<String>,
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

impl TBox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_concept_inclusion(&mut self, lhs: BasicConcept, rhs: GeneralConcept) {
        push_unique(&mut self.concept_inclusions, (lhs, rhs));
    }

    pub fn add_role_inclusion(&mut self, lhs: RoleExpr, rhs: RoleExpr) {
        push_unique(&mut self.role_inclusions, (lhs, rhs));
    }

    pub fn add_disjoint(&mut self, a: BasicConcept, b: BasicConcept) {
        push_unique(&mut self.concept_disjointness, (a, b));
    }

    pub fn add_role_disjoint(&mut self, a: RoleExpr, b: RoleExpr) {
        push_unique(&mut self.role_disjointness, (a, b));
    }

    pub fn is_empty(&self) -> bool {
        self.concept_inclusions.is_empty()
            && self.role_inclusions.is_empty()
            && self.concept_disjointness.is_empty()
            && self.role_disjointness.is_empty()
    }

    pub fn has_disjointness(&self) -> bool {
        !self.concept_disjointness.is_empty() || !self.role_disjointness.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut cur = Cursor::new(text)?;
        let mut t = TBox::new();
        while !cur.at_eof() {
            if cur.is_kw("role") && matches!(cur.peek_at(1), Tok::Ident(_)) {
                cur.next();
                let lhs = parse_role(&mut cur)?;
                cur.expect(&Tok::Le)?;
                let rhs = parse_role(&mut cur)?;
                t.add_role_inclusion(lhs, rhs);
            } else if cur.is_kw("disjoint") && *cur.peek_at(1) == Tok::LParen {
                cur.next();
                cur.next();
                let a = parse_basic(&mut cur)?;
                cur.expect(&Tok::Comma)?;
                let b = parse_basic(&mut cur)?;
                cur.expect(&Tok::RParen)?;
                t.add_disjoint(a, b);
            } else if cur.is_kw("role-disjoint") {
                cur.next();
                cur.expect(&Tok::LParen)?;
                let a = parse_role(&mut cur)?;
                cur.expect(&Tok::Comma)?;
                let b = parse_role(&mut cur)?;
                cur.expect(&Tok::RParen)?;
                t.add_role_disjoint(a, b);
            } else {
                let lhs = parse_basic(&mut cur)?;
                cur.expect(&Tok::Le)?;
                let rhs = parse_general(&mut cur)?;
                t.add_concept_inclusion(lhs, rhs);
            }
        }
        Ok(t)
    }

    /// Replace every `B <= exists(U, B')` by `B <= exists(Paux)`,
    /// `role Paux <= U` and `exists(inv(Paux)) <= B'` over a fresh role.
    pub fn normalize(&self) -> TBox {
        let (concepts, mut roles) = self.names();
        roles.extend(self.auxiliary_roles.iter().cloned());
        let mut out = TBox { auxiliary_roles: self.auxiliary_roles.clone(), ..TBox::default() };
        let mut counter = 0usize;
        for (lhs, rhs) in &self.concept_inclusions {
            match rhs {
                GeneralConcept::Basic(_) => out.add_concept_inclusion(lhs.clone(), rhs.clone()),
                GeneralConcept::QualifiedExists(role, filler) => {
                    let aux = loop {
                        let candidate = format!("aux{counter}_{}_{}_{}", slug(&lhs.to_string()), slug(&role.to_string()), slug(&filler.to_string()));
                        counter += 1;
                        if !roles.contains(&candidate) && !concepts.contains(&candidate) {
                            break candidate;
                        }
                    };
                    roles.insert(aux.clone());
                    out.auxiliary_roles.insert(aux.clone());
                    out.add_concept_inclusion(lhs.clone(), GeneralConcept::Basic(BasicConcept::Exists(RoleExpr::named(&aux))));
                    out.add_role_inclusion(RoleExpr::named(&aux), role.clone());
                    out.add_concept_inclusion(BasicConcept::Exists(RoleExpr::inv(&aux)), GeneralConcept::Basic(filler.clone()));
                }
            }
        }
        for (a, b) in &self.role_inclusions {
            out.add_role_inclusion(a.clone(), b.clone());
        }
        for (a, b) in &self.concept_disjointness {
            out.add_disjoint(a.clone(), b.clone());
        }
        for (a, b) in &self.role_disjointness {
            out.add_role_disjoint(a.clone(), b.clone());
        }
        out
    }

    pub fn is_normalized(&self) -> bool {
        self.concept_inclusions.iter().all(|(_, r)| matches!(r, GeneralConcept::Basic(_)))
    }

    /// All concept and role names, auxiliary roles included.
    fn names(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut concepts = BTreeSet::new();
        let mut roles = BTreeSet::new();
        let basic = |b: &BasicConcept, concepts: &mut BTreeSet<String>, roles: &mut BTreeSet<String>| match b {
            BasicConcept::Named(n) => {
                concepts.insert(n.clone());
            }
            BasicConcept::Exists(r) => {
                roles.insert(r.name.clone());
            }
        };
        for (l, r) in &self.concept_inclusions {
            basic(l, &mut concepts, &mut roles);
            match r {
                GeneralConcept::Basic(b) => basic(b, &mut concepts, &mut roles),
                GeneralConcept::QualifiedExists(u, b) => {
                    roles.insert(u.name.clone());
                    basic(b, &mut concepts, &mut roles);
                }
            }
        }
        for (a, b) in &self.concept_disjointness {
            basic(a, &mut concepts, &mut roles);
            basic(b, &mut concepts, &mut roles);
        }
        for (a, b) in self.role_inclusions.iter().chain(&self.role_disjointness) {
            roles.insert(a.name.clone());
            roles.insert(b.name.clone());
        }
        (concepts, roles)
    }

    /// Concept and role names of the user vocabulary (auxiliary roles excluded).
    pub fn vocabulary(&self) -> Vocabulary {
        let (concepts, mut roles) = self.names();
        roles.retain(|r| !self.auxiliary_roles.contains(r));
        Vocabulary { concepts, roles }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
}

impl Vocabulary {
    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.roles.is_empty()
    }

    /// `Some(1)` for concepts, `Some(2)` for roles.
    pub fn arity(&self, name: &str) -> Option<usize> {
        if self.concepts.contains(name) {
            Some(1)
        } else if self.roles.contains(name) {
            Some(2)
        } else {
            None
        }
    }
}

fn slug(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).collect()
}

fn parse_role(cur: &mut Cursor) -> Result<RoleExpr, ParseError> {
    if cur.is_kw("inv") && *cur.peek_at(1) == Tok::LParen {
        cur.next();
        cur.next();
        let name = cur.ident()?;
        cur.expect(&Tok::RParen)?;
        Ok(RoleExpr::inv(&name))
    } else {
        Ok(RoleExpr::named(&cur.ident()?))
    }
}

fn parse_basic(cur: &mut Cursor) -> Result<BasicConcept, ParseError> {
    if cur.is_kw("exists") && *cur.peek_at(1) == Tok::LParen {
        cur.next();
        cur.next();
        let r = parse_role(cur)?;
        cur.expect(&Tok::RParen)?;
        Ok(BasicConcept::Exists(r))
    } else {
        Ok(BasicConcept::Named(cur.ident()?))
    }
}

fn parse_general(cur: &mut Cursor) -> Result<GeneralConcept, ParseError> {
    if cur.is_kw("exists") && *cur.peek_at(1) == Tok::LParen {
        cur.next();
        cur.next();
        let r = parse_role(cur)?;
        if cur.eat(&Tok::Comma) {
            let filler = parse_basic(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(GeneralConcept::QualifiedExists(r, filler))
        } else {
            cur.expect(&Tok::RParen)?;
            Ok(GeneralConcept::Basic(BasicConcept::Exists(r)))
        }
    } else {
        Ok(GeneralConcept::Basic(BasicConcept::Named(cur.ident()?)))
    }
}

impl fmt::Display for TBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, r) in &self.concept_inclusions {
            writeln!(f, "{l} <= {r}")?;
        }
        for (l, r) in &self.role_inclusions {
            writeln!(f, "role {l} <= {r}")?;
        }
        for (a, b) in &self.concept_disjointness {
            writeln!(f, "disjoint({a}, {b})")?;
        }
        for (a, b) in &self.role_disjointness {
            writeln!(f, "role-disjoint({a}, {b})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(n: &str) -> BasicConcept {
        BasicConcept::named(n)
    }

    #[test]
    fn parses_energy_assertions() {
        let t = TBox::parse("FinishedReport <= PublishedCPReport\nexists(inv(contains)) <= PublishedCPReport").unwrap();
        assert_eq!(
            t.concept_inclusions,
            vec![
                (named("FinishedReport"), GeneralConcept::Basic(named("PublishedCPReport"))),
                (BasicConcept::Exists(RoleExpr::inv("contains")), GeneralConcept::Basic(named("PublishedCPReport"))),
            ]
        );
    }

    #[test]
    fn empty_file_and_comments() {
        assert_eq!(TBox::parse("").unwrap(), TBox::new());
        assert_eq!(TBox::parse("# nothing here\n").unwrap(), TBox::new());
    }

    #[test]
    fn all_assertion_forms_and_dedup() {
        let t = TBox::parse(
            "A <= exists(P, B)\nA <= exists(P, B)\nrole P <= inv(Q)\ndisjoint(A, exists(inv(P)))\nrole-disjoint(P, inv(R))",
        )
        .unwrap();
        assert_eq!(t.concept_inclusions.len(), 1);
        assert_eq!(t.role_inclusions, vec![(RoleExpr::named("P"), RoleExpr::inv("Q"))]);
        assert_eq!(t.concept_disjointness, vec![(named("A"), BasicConcept::Exists(RoleExpr::inv("P")))]);
        assert_eq!(t.role_disjointness, vec![(RoleExpr::named("P"), RoleExpr::inv("R"))]);
    }

    #[test]
    fn syntax_error_has_position() {
        let err = TBox::parse("A <= B\nA B").unwrap_err();
        assert_eq!(err.pos.line, 2);
        assert_eq!(err.pos.col, 3);
    }

    #[test]
    fn normalize_identity_without_qualified_existentials() {
        let t = TBox::parse("A <= B\nexists(P) <= A\nrole P <= Q").unwrap();
        let n = t.normalize();
        assert_eq!(n, t);
        assert!(n.auxiliary_roles.is_empty());
    }

    #[test]
    fn normalize_qualified_existential() {
        let t = TBox::parse("A <= exists(P, B)").unwrap();
        let n = t.normalize();
        assert_eq!(n.auxiliary_roles.len(), 1);
        let aux = n.auxiliary_roles.iter().next().unwrap().clone();
        assert_eq!(
            n.concept_inclusions,
            vec![
                (named("A"), GeneralConcept::Basic(BasicConcept::Exists(RoleExpr::named(&aux)))),
                (BasicConcept::Exists(RoleExpr::inv(&aux)), GeneralConcept::Basic(named("B"))),
            ]
        );
        assert_eq!(n.role_inclusions, vec![(RoleExpr::named(&aux), RoleExpr::named("P"))]);
        assert!(n.is_normalized());
        assert_eq!(n.normalize(), n);
        assert_eq!(n.vocabulary(), t.vocabulary());
    }

    #[test]
    fn fresh_names_avoid_user_vocabulary() {
        let t = TBox::parse("A <= exists(P, B)\nexists(aux0_A_P_B) <= A").unwrap();
        let n = t.normalize();
        let aux = n.auxiliary_roles.iter().next().unwrap();
        assert_ne!(aux, "aux0_A_P_B");
    }

    #[test]
    fn vocabulary_of_energy_fragment() {
        let t = TBox::parse(
            "exists(contains) <= PublishedCPReportColl\nexists(inv(contains)) <= PublishedCPReport\n\
             exists(controlPointID) <= PublishedCPReport\nexists(inv(controlPointID)) <= String\n\
             FinishedReport <= PublishedCPReport\nReviewedReport <= PublishedCPReport\n\
             AcceptedReport <= PublishedCPReport\nObjectedReport <= PublishedCPReport",
        )
        .unwrap();
        let v = t.vocabulary();
        for c in ["PublishedCPReport", "FinishedReport", "ReviewedReport", "AcceptedReport", "ObjectedReport", "PublishedCPReportColl"] {
            assert!(v.concepts.contains(c), "{c}");
        }
        assert!(v.roles.contains("contains") && v.roles.contains("controlPointID"));
        assert_eq!(TBox::new().vocabulary(), Vocabulary::default());
    }

    #[test]
    fn print_parse_round_trip() {
        let t = TBox::parse("A <= exists(inv(P), exists(Q))\nrole inv(P) <= Q\ndisjoint(A, B)\nrole-disjoint(inv(P), Q)").unwrap();
        assert_eq!(TBox::parse(&t.to_string()).unwrap(), t);
    }
}
