//! CTL truth by recursion on (formula, state, environment) with explicit
//! path reasoning per temporal operator.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use sasv::query::Var;
use sasv::temporal::{Ctl, CtlAFormula};
use sasv::{TransitionSystem, Value};

use crate::brute;

type Env = BTreeMap<Var, Value>;

pub struct Oracle<'a> {
    rts: &'a TransitionSystem,
    adoms: Vec<BTreeSet<Value>>,
    memo: HashMap<(usize, usize, Env), bool>,
}

impl<'a> Oracle<'a> {
    pub fn new(rts: &'a TransitionSystem) -> Self {
        let adoms = rts.states().iter().map(|i| i.adom()).collect();
        Oracle { rts, adoms, memo: HashMap::new() }
    }

    /// Truth of a closed formula at the initial state.
    pub fn holds(&mut self, f: &CtlAFormula) -> bool {
        self.sat(f, self.rts.initial(), &Env::new())
    }

    fn succ(&self, s: usize) -> &[usize] {
        self.rts.successors(s)
    }

    /// States reachable from `s` along states satisfying `inside`, `s`
    /// included when it satisfies `inside` itself.
    fn region(&mut self, s: usize, inside: &mut dyn FnMut(&mut Self, usize) -> bool) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![s];
        let mut out = Vec::new();
        while let Some(t) = stack.pop() {
            if !seen.insert(t) || !inside(self, t) {
                continue;
            }
            out.push(t);
            stack.extend(self.succ(t).iter().copied());
        }
        out
    }

    /// Whether the subgraph induced by `region` contains a deadlock of the
    /// whole system or a cycle, i.e. an infinite or maximal finite path that
    /// never leaves it.
    fn traps(&self, region: &[usize]) -> bool {
        let set: BTreeSet<usize> = region.iter().copied().collect();
        if region.iter().any(|&t| self.succ(t).is_empty()) {
            return true;
        }
        // Kahn's algorithm on the induced subgraph.
        let mut indeg: BTreeMap<usize, usize> = set.iter().map(|&t| (t, 0)).collect();
        for &t in &set {
            for u in self.succ(t) {
                if set.contains(u) {
                    *indeg.get_mut(u).unwrap() += 1;
                }
            }
        }
        let mut queue: Vec<usize> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&t, _)| t).collect();
        let mut removed = 0;
        while let Some(t) = queue.pop() {
            removed += 1;
            for u in self.succ(t) {
                if let Some(d) = indeg.get_mut(u) {
                    *d -= 1;
                    if *d == 0 {
                        queue.push(*u);
                    }
                }
            }
        }
        removed < set.len()
    }

    fn sat(&mut self, f: &CtlAFormula, s: usize, env: &Env) -> bool {
        let key = (f as *const CtlAFormula as usize, s, env.clone());
        if let Some(&b) = self.memo.get(&key) {
            return b;
        }
        let b = self.compute(f, s, env);
        self.memo.insert(key, b);
        b
    }

    fn compute(&mut self, f: &CtlAFormula, s: usize, env: &Env) -> bool {
        match f {
            Ctl::Local(q) => brute::fo_holds(q, &self.rts.states()[s], &self.adoms[s], env),
            Ctl::Not(a) => !self.sat(a, s, env),
            Ctl::And(a, b) => self.sat(a, s, env) && self.sat(b, s, env),
            Ctl::Or(a, b) => self.sat(a, s, env) || self.sat(b, s, env),
            Ctl::Implies(a, b) => !self.sat(a, s, env) || self.sat(b, s, env),
            Ctl::EX(a) => self.succ(s).to_vec().into_iter().any(|t| self.sat(a, t, env)),
            Ctl::AX(a) => self.succ(s).to_vec().into_iter().all(|t| self.sat(a, t, env)),
            Ctl::EF(a) => {
                let all = self.region(s, &mut |_, _| true);
                all.into_iter().any(|t| self.sat(a, t, env))
            }
            Ctl::AG(a) => {
                let all = self.region(s, &mut |_, _| true);
                all.into_iter().all(|t| self.sat(a, t, env))
            }
            Ctl::EU(a, b) => {
                let through = self.region(s, &mut |o, t| o.sat(a, t, env) && !o.sat(b, t, env));
                let mut frontier: Vec<usize> = through.iter().flat_map(|&t| self.succ(t).to_vec()).collect();
                frontier.push(s);
                frontier.into_iter().any(|t| self.sat(b, t, env))
            }
            Ctl::EG(a) => {
                let region = self.region(s, &mut |o, t| o.sat(a, t, env));
                !region.is_empty() && self.traps(&region)
            }
            Ctl::AF(a) => {
                let region = self.region(s, &mut |o, t| !o.sat(a, t, env));
                region.is_empty() || !self.traps(&region)
            }
            Ctl::AU(a, b) => {
                if self.sat(b, s, env) {
                    return true;
                }
                let region = self.region(s, &mut |o, t| o.sat(a, t, env) && !o.sat(b, t, env));
                if region.is_empty() || self.traps(&region) {
                    return false;
                }
                // No path may leave the region into a state with neither.
                let exits: Vec<usize> = region.iter().flat_map(|&t| self.succ(t).to_vec()).collect();
                exits.into_iter().all(|u| self.sat(a, u, env) || self.sat(b, u, env))
            }
            Ctl::Forall(branches) | Ctl::Exists(branches) => {
                let universal = matches!(f, Ctl::Forall(_));
                let rts = self.rts;
                let db = &rts.states()[s];
                let adom = self.adoms[s].clone();
                for br in branches {
                    for asg in brute::value_assignments(&br.vars, &adom) {
                        let mut inner = env.clone();
                        inner.extend(asg);
                        if !brute::fo_holds(&br.guard, db, &adom, &inner) {
                            continue;
                        }
                        let body = br.body.as_ref().is_none_or(|b| self.sat(b, s, &inner));
                        if body != universal {
                            return !universal;
                        }
                    }
                }
                universal
            }
        }
    }
}

/// Truth of a closed relational property at the initial state.
pub fn holds(f: &CtlAFormula, rts: &TransitionSystem) -> bool {
    Oracle::new(rts).holds(f)
}
