//! Oblivious chase with labelled nulls.
//!
//! Nulls are object terms over a reserved symbol. Every existential axiom
//! fires once per individual satisfying its left-hand side, so the subtree
//! below a null depends only on the axiom that created it. Query answering
//! bounds the depth of nulls; satisfiability instead blocks every null whose
//! creating axiom already produced an earlier null.

use std::collections::{BTreeSet, HashMap, HashSet};

use sasv::ontology::{BasicConcept, GeneralConcept, RoleExpr};
use sasv::{ABox, Constant, TBox, Ucq, Value};

use crate::brute;

pub const NULL_SYMBOL: &str = "_null";

pub fn is_null(c: &Constant) -> bool {
    matches!(c, Constant::Term(t) if t.symbol == NULL_SYMBOL)
}

struct Model {
    inds: Vec<Constant>,
    index: HashMap<Constant, usize>,
    depth: Vec<usize>,
    origin: Vec<Option<usize>>,
    first_of: HashMap<usize, usize>,
    concepts: HashSet<(String, usize)>,
    roles: HashSet<(String, usize, usize)>,
    forward: HashMap<(String, usize), Vec<usize>>,
    backward: HashMap<(String, usize), Vec<usize>>,
    fired: HashSet<(usize, usize)>,
    limit: usize,
    blocking: bool,
}

impl Model {
    fn new(a: &ABox, limit: usize, blocking: bool) -> Self {
        let mut m = Model {
            inds: Vec::new(),
            index: HashMap::new(),
            depth: Vec::new(),
            origin: Vec::new(),
            first_of: HashMap::new(),
            concepts: HashSet::new(),
            roles: HashSet::new(),
            forward: HashMap::new(),
            backward: HashMap::new(),
            fired: HashSet::new(),
            limit,
            blocking,
        };
        for (n, c) in a.concept_facts() {
            let x = m.ind(c);
            m.concepts.insert((n.to_string(), x));
        }
        for (n, c, d) in a.role_facts() {
            let (x, y) = (m.ind(c), m.ind(d));
            m.add_role(&RoleExpr::named(n), x, y);
        }
        m
    }

    fn ind(&mut self, c: &Constant) -> usize {
        if let Some(&i) = self.index.get(c) {
            return i;
        }
        self.inds.push(c.clone());
        self.depth.push(0);
        self.origin.push(None);
        self.index.insert(c.clone(), self.inds.len() - 1);
        self.inds.len() - 1
    }

    fn null(&mut self, parent: usize, origin: usize) -> usize {
        let n = self.inds.len();
        self.inds.push(Constant::term(NULL_SYMBOL, vec![Value::Int(n as i64)]));
        self.depth.push(self.depth[parent] + 1);
        self.origin.push(Some(origin));
        self.first_of.entry(origin).or_insert(n);
        n
    }

    fn blocked(&self, x: usize) -> bool {
        self.blocking && self.origin[x].is_some_and(|o| self.first_of[&o] != x)
    }

    fn add_role(&mut self, r: &RoleExpr, x: usize, y: usize) -> bool {
        let (s, t) = if r.inverse { (y, x) } else { (x, y) };
        if !self.roles.insert((r.name.clone(), s, t)) {
            return false;
        }
        self.forward.entry((r.name.clone(), s)).or_default().push(t);
        self.backward.entry((r.name.clone(), t)).or_default().push(s);
        true
    }

    fn has_role(&self, r: &RoleExpr, x: usize, y: usize) -> bool {
        let (s, t) = if r.inverse { (y, x) } else { (x, y) };
        self.roles.contains(&(r.name.clone(), s, t))
    }

    fn successors(&self, r: &RoleExpr, x: usize) -> &[usize] {
        let map = if r.inverse { &self.backward } else { &self.forward };
        map.get(&(r.name.clone(), x)).map(Vec::as_slice).unwrap_or(&[])
    }

    fn holds(&self, b: &BasicConcept, x: usize) -> bool {
        match b {
            BasicConcept::Named(n) => self.concepts.contains(&(n.clone(), x)),
            BasicConcept::Exists(r) => !self.successors(r, x).is_empty(),
        }
    }

    /// Fire the existential axiom `origin` at `x`, creating `r(x, n)` and
    /// the filler on `n`. Fillers of the form `exists(S)` fire as the
    /// pseudo-axiom `origin + 1`.
    fn fire(&mut self, origin: usize, x: usize, r: &RoleExpr, filler: Option<&BasicConcept>) -> bool {
        if !self.fired.insert((origin, x)) || self.depth[x] >= self.limit || self.blocked(x) {
            return false;
        }
        let n = self.null(x, origin);
        self.add_role(r, x, n);
        match filler {
            Some(BasicConcept::Named(a)) => {
                self.concepts.insert((a.clone(), n));
            }
            Some(BasicConcept::Exists(s)) => {
                self.fire(origin + 1, n, s, None);
            }
            None => {}
        }
        true
    }

    fn run(&mut self, t: &TBox) {
        loop {
            let mut changed = false;
            for x in 0..self.inds.len() {
                for (i, (lhs, rhs)) in t.concept_inclusions.iter().enumerate() {
                    if !self.holds(lhs, x) {
                        continue;
                    }
                    changed |= match rhs {
                        GeneralConcept::Basic(BasicConcept::Named(a)) => self.concepts.insert((a.clone(), x)),
                        GeneralConcept::Basic(BasicConcept::Exists(r)) => self.fire(2 * i, x, r, None),
                        GeneralConcept::QualifiedExists(r, b) => self.fire(2 * i, x, r, Some(b)),
                    };
                }
            }
            for (r1, r2) in &t.role_inclusions {
                let pairs: Vec<(usize, usize)> = (0..self.inds.len())
                    .flat_map(|x| self.successors(r1, x).iter().map(move |&y| (x, y)).collect::<Vec<_>>())
                    .collect();
                for (x, y) in pairs {
                    changed |= self.add_role(r2, x, y);
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn abox(&self) -> ABox {
        let mut a = ABox::new();
        for (n, x) in &self.concepts {
            a.add_concept(n, self.inds[*x].clone());
        }
        for (n, x, y) in &self.roles {
            a.add_role(n, self.inds[*x].clone(), self.inds[*y].clone());
        }
        a
    }
}

/// The chase of `a` under the positive inclusions of `t`, keeping nulls up
/// to depth `limit`.
pub fn chase(t: &TBox, a: &ABox, limit: usize) -> ABox {
    let mut m = Model::new(a, limit, false);
    m.run(t);
    m.abox()
}

/// Certain answers of `q` over `(t, a)` for a consistent KB and a query
/// whose matches all touch an answer variable or an individual.
pub fn certain_answers(q: &Ucq, t: &TBox, a: &ABox) -> BTreeSet<Vec<Constant>> {
    let depth = q.disjuncts.iter().map(|d| d.atoms.len()).max().unwrap_or(0);
    let chased = chase(t, a, depth);
    brute::ucq_answers(q, &chased).into_iter().filter(|row| !row.iter().any(is_null)).collect()
}

/// Chase with blocking, then look for a violated disjointness assertion.
pub fn satisfiable(t: &TBox, a: &ABox) -> bool {
    let mut m = Model::new(a, usize::MAX, true);
    m.run(t);
    for x in 0..m.inds.len() {
        if m.blocked(x) {
            continue;
        }
        if t.concept_disjointness.iter().any(|(b1, b2)| m.holds(b1, x) && m.holds(b2, x)) {
            return false;
        }
    }
    for (r1, r2) in &t.role_disjointness {
        for x in 0..m.inds.len() {
            if m.successors(r1, x).iter().any(|&y| m.has_role(r2, x, y)) {
                return false;
            }
        }
    }
    true
}
