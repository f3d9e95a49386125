use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::hash::Hash;
use std::rc::Rc;

use serde::Serialize;

use crate::error::Error;
use crate::kb::{Constant, Value};
use crate::lifecycle::{build_rts, Governance, SasSystem, Sts, TransitionSystem};
use crate::mapping::MappingSet;
use crate::ontology::TBox;
use crate::query::{eval_ecq_plain, eval_ecq_vars, eval_fo, eval_fo_vars, Ecq, FoQuery, Var};
use crate::temporal::ast::{Ctl, CtlAFormula, CtlEqlFormula, QuantBlock, Quant, QuantBranch};
use crate::temporal::compile::{compile, rewrite_property};

/// Outcome of checking a property at the initial state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    /// For a top-level `AG` that fails, a path to a violating state; for a
    /// top-level `EF` or `E [ U ]` that holds, a path to a witness state.
    pub witness: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    /// Cache sub-results per subformula and relevant environment.
    pub memo: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { memo: true }
    }
}

/// How local queries and guards are answered at one level.
trait Level {
    type L;
    type Q: QuantBlock<Self::L>;
    type C: Clone + Ord + Hash;

    fn local(&self, q: &Self::L, s: usize, env: &BTreeMap<Var, Self::C>) -> Result<bool, Error>;
    fn rows(&self, q: &Self::L, s: usize, env: &BTreeMap<Var, Self::C>, vars: &[Var]) -> Result<BTreeSet<Vec<Self::C>>, Error>;
    fn free(q: &Self::L) -> Vec<Var>;
}

struct Relational<'a> {
    rts: &'a TransitionSystem,
}

impl Level for Relational<'_> {
    type L = FoQuery;
    type Q = Vec<QuantBranch>;
    type C = Value;

    fn local(&self, q: &FoQuery, s: usize, env: &BTreeMap<Var, Value>) -> Result<bool, Error> {
        Ok(!eval_fo(q, self.rts.db(s)?, env)?.is_empty())
    }

    fn rows(&self, q: &FoQuery, s: usize, env: &BTreeMap<Var, Value>, vars: &[Var]) -> Result<BTreeSet<Vec<Value>>, Error> {
        Ok(eval_fo_vars(q, self.rts.db(s)?, env, vars)?)
    }

    fn free(q: &FoQuery) -> Vec<Var> {
        q.free_vars()
    }
}

/// Embedded queries are expected to be rewritten already.
struct Semantic<'a> {
    sts: Sts<'a>,
}

impl Level for Semantic<'_> {
    type L = Ecq;
    type Q = Quant;
    type C = Constant;

    fn local(&self, q: &Ecq, s: usize, env: &BTreeMap<Var, Constant>) -> Result<bool, Error> {
        Ok(!eval_ecq_plain(q, self.sts.abox(s)?, env).is_empty())
    }

    fn rows(&self, q: &Ecq, s: usize, env: &BTreeMap<Var, Constant>, vars: &[Var]) -> Result<BTreeSet<Vec<Constant>>, Error> {
        Ok(eval_ecq_vars(q, self.sts.abox(s)?, env, vars))
    }

    fn free(q: &Ecq) -> Vec<Var> {
        q.free_vars()
    }
}

type Labels = Rc<Vec<bool>>;

struct Checker<'a, V: Level> {
    level: &'a V,
    rts: &'a TransitionSystem,
    pred: Vec<Vec<usize>>,
    memo: Option<HashMap<(usize, Vec<(Var, V::C)>), Labels>>,
    free: HashMap<usize, Rc<BTreeSet<Var>>>,
}

fn key<T>(node: &T) -> usize {
    node as *const T as usize
}

impl<'a, V: Level> Checker<'a, V> {
    fn new(level: &'a V, rts: &'a TransitionSystem, opts: CheckOptions) -> Self {
        Checker { level, rts, pred: rts.predecessors(), memo: opts.memo.then(HashMap::new), free: HashMap::new() }
    }

    fn n(&self) -> usize {
        self.rts.len()
    }

    fn free_of(&mut self, f: &Ctl<V::L, V::Q>) -> Rc<BTreeSet<Var>> {
        if let Some(fv) = self.free.get(&key(f)) {
            return fv.clone();
        }
        let fv: BTreeSet<Var> = match f {
            Ctl::Local(q) => V::free(q).into_iter().collect(),
            Ctl::Forall(q) | Ctl::Exists(q) => {
                let mut out = BTreeSet::new();
                for (vars, guard, body) in q.blocks() {
                    let mut inner: BTreeSet<Var> = V::free(guard).into_iter().collect();
                    if let Some(b) = body {
                        inner.extend(self.free_of(b).iter().cloned());
                    }
                    out.extend(inner.into_iter().filter(|v| !vars.contains(v)));
                }
                out
            }
            op => {
                let mut out = BTreeSet::new();
                for k in op.operator().unwrap().1 {
                    out.extend(self.free_of(k).iter().cloned());
                }
                out
            }
        };
        let fv = Rc::new(fv);
        self.free.insert(key(f), fv.clone());
        fv
    }

    fn sat(&mut self, f: &Ctl<V::L, V::Q>, env: &BTreeMap<Var, V::C>) -> Result<Labels, Error> {
        let memo_key = if self.memo.is_some() {
            let fv = self.free_of(f);
            let restricted: Vec<(Var, V::C)> = env.iter().filter(|(v, _)| fv.contains(*v)).map(|(v, c)| (v.clone(), c.clone())).collect();
            let k = (key(f), restricted);
            if let Some(hit) = self.memo.as_ref().unwrap().get(&k) {
                return Ok(hit.clone());
            }
            Some(k)
        } else {
            None
        };
        let labels = Rc::new(self.compute(f, env)?);
        if let (Some(k), Some(memo)) = (memo_key, self.memo.as_mut()) {
            memo.insert(k, labels.clone());
        }
        Ok(labels)
    }

    fn compute(&mut self, f: &Ctl<V::L, V::Q>, env: &BTreeMap<Var, V::C>) -> Result<Vec<bool>, Error> {
        let n = self.n();
        Ok(match f {
            Ctl::Local(q) => (0..n).map(|s| self.level.local(q, s, env)).collect::<Result<_, _>>()?,
            Ctl::Not(a) => self.sat(a, env)?.iter().map(|b| !b).collect(),
            Ctl::And(a, b) => {
                let a = self.sat(a, env)?;
                let b = self.sat(b, env)?;
                a.iter().zip(b.iter()).map(|(x, y)| *x && *y).collect()
            }
            Ctl::Or(a, b) => {
                let a = self.sat(a, env)?;
                let b = self.sat(b, env)?;
                a.iter().zip(b.iter()).map(|(x, y)| *x || *y).collect()
            }
            Ctl::Implies(a, b) => {
                let a = self.sat(a, env)?;
                let b = self.sat(b, env)?;
                a.iter().zip(b.iter()).map(|(x, y)| !*x || *y).collect()
            }
            Ctl::EX(a) => {
                let a = self.sat(a, env)?;
                (0..n).map(|s| self.rts.successors(s).iter().any(|&t| a[t])).collect()
            }
            Ctl::AX(a) => {
                let a = self.sat(a, env)?;
                (0..n).map(|s| self.rts.successors(s).iter().all(|&t| a[t])).collect()
            }
            Ctl::EF(a) => {
                let a = self.sat(a, env)?;
                let all = vec![true; n];
                eu(&self.pred, &all, &a)
            }
            Ctl::EU(a, b) => {
                let a = self.sat(a, env)?;
                let b = self.sat(b, env)?;
                eu(&self.pred, &a, &b)
            }
            Ctl::AG(a) => {
                let a = self.sat(a, env)?;
                let not_a: Vec<bool> = a.iter().map(|x| !x).collect();
                eu(&self.pred, &vec![true; n], &not_a).into_iter().map(|x| !x).collect()
            }
            Ctl::EG(a) => {
                let a = self.sat(a, env)?;
                eg(self.rts, &self.pred, &a)
            }
            Ctl::AF(a) => {
                let a = self.sat(a, env)?;
                au(self.rts, &self.pred, &vec![true; n], &a)
            }
            Ctl::AU(a, b) => {
                let a = self.sat(a, env)?;
                let b = self.sat(b, env)?;
                au(self.rts, &self.pred, &a, &b)
            }
            Ctl::Forall(q) => self.quantify(q, env, true)?,
            Ctl::Exists(q) => self.quantify(q, env, false)?,
        })
    }

    /// Per state: bind the block's variables to every row of its guard in
    /// that state and test the body there under the extended environment.
    fn quantify(&mut self, q: &V::Q, env: &BTreeMap<Var, V::C>, universal: bool) -> Result<Vec<bool>, Error> {
        let n = self.n();
        let mut out = vec![universal; n];
        let blocks = q.blocks();
        for (s, slot) in out.iter_mut().enumerate() {
            'blocks: for (vars, guard, body) in &blocks {
                let mut genv = env.clone();
                for v in *vars {
                    genv.remove(v);
                }
                for row in self.level.rows(guard, s, &genv, vars)? {
                    let holds = match body {
                        None => true,
                        Some(b) => {
                            let mut inner = genv.clone();
                            inner.extend(vars.iter().cloned().zip(row));
                            self.sat(b, &inner)?[s]
                        }
                    };
                    if holds != universal {
                        *slot = holds;
                        break 'blocks;
                    }
                }
            }
        }
        Ok(out)
    }

    fn verdict(&mut self, f: &Ctl<V::L, V::Q>) -> Result<Verdict, Error> {
        let env = BTreeMap::new();
        let holds = self.sat(f, &env)?[self.rts.initial()];
        let witness = match f {
            Ctl::AG(a) if !holds => {
                let bad: Vec<bool> = self.sat(a, &env)?.iter().map(|x| !x).collect();
                path_to(self.rts, &vec![true; self.n()], &bad)
            }
            Ctl::EF(a) if holds => {
                let good = self.sat(a, &env)?;
                path_to(self.rts, &vec![true; self.n()], &good)
            }
            Ctl::EU(a, b) if holds => {
                let through = self.sat(a, &env)?;
                let good = self.sat(b, &env)?;
                path_to(self.rts, &through, &good)
            }
            _ => None,
        };
        Ok(Verdict { holds, witness })
    }
}

/// Least fixpoint of `b ∨ (a ∧ EX Z)` by backward search from `b`.
fn eu(pred: &[Vec<usize>], a: &[bool], b: &[bool]) -> Vec<bool> {
    let mut z = b.to_vec();
    let mut queue: VecDeque<usize> = (0..b.len()).filter(|&s| b[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if !z[s] && a[s] {
                z[s] = true;
                queue.push_back(s);
            }
        }
    }
    z
}

/// Least fixpoint of `b ∨ (a ∧ has-successor ∧ AX Z)`.
fn au(rts: &TransitionSystem, pred: &[Vec<usize>], a: &[bool], b: &[bool]) -> Vec<bool> {
    let n = b.len();
    let mut pending: Vec<usize> = (0..n).map(|s| rts.successors(s).len()).collect();
    let mut z = b.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| b[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if z[s] {
                continue;
            }
            pending[s] -= 1;
            if pending[s] == 0 && a[s] {
                z[s] = true;
                queue.push_back(s);
            }
        }
    }
    z
}

/// Greatest fixpoint of `a ∧ (deadlock ∨ EX Z)`: states with a path that
/// stays in `a` forever or until a deadlock.
fn eg(rts: &TransitionSystem, pred: &[Vec<usize>], a: &[bool]) -> Vec<bool> {
    let n = a.len();
    let mut z = a.to_vec();
    let mut inside: Vec<usize> = (0..n).map(|s| rts.successors(s).iter().filter(|&&t| a[t]).count()).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| z[s] && inside[s] == 0 && !rts.successors(s).is_empty()).collect();
    for &s in &queue {
        z[s] = false;
    }
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if !z[s] {
                continue;
            }
            inside[s] -= 1;
            if inside[s] == 0 {
                z[s] = false;
                queue.push_back(s);
            }
        }
    }
    z
}

/// Shortest path from the initial state to a `goal` state whose inner
/// states all satisfy `through`.
fn path_to(rts: &TransitionSystem, through: &[bool], goal: &[bool]) -> Option<Vec<usize>> {
    let n = goal.len();
    let mut parent = vec![usize::MAX; n];
    let start = rts.initial();
    parent[start] = start;
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        if goal[s] {
            let mut path = vec![s];
            let mut cur = s;
            while cur != start {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        if !through[s] {
            continue;
        }
        for &t in rts.successors(s) {
            if parent[t] == usize::MAX {
                parent[t] = s;
                queue.push_back(t);
            }
        }
    }
    None
}

/// Check a relational property over a transition system.
pub fn check_rts(f: &CtlAFormula, rts: &TransitionSystem) -> Result<Verdict, Error> {
    check_rts_with(f, rts, CheckOptions::default())
}

pub fn check_rts_with(f: &CtlAFormula, rts: &TransitionSystem, opts: CheckOptions) -> Result<Verdict, Error> {
    let level = Relational { rts };
    Checker::new(&level, rts, opts).verdict(f)
}

/// Truth of a relational property at every state.
pub fn label_rts(f: &CtlAFormula, rts: &TransitionSystem, opts: CheckOptions) -> Result<Vec<bool>, Error> {
    let level = Relational { rts };
    let labels = Checker::new(&level, rts, opts).sat(f, &BTreeMap::new())?;
    Ok(labels.to_vec())
}

/// Check an ontology-level property over the semantic view of `rts`:
/// every state is read as its virtual ABox and embedded queries are
/// answered under certain-answer semantics.
pub fn check_sts(f: &CtlEqlFormula, rts: &TransitionSystem, t: &TBox, m: &MappingSet) -> Result<Verdict, Error> {
    check_sts_with(f, rts, t, m, CheckOptions::default())
}

pub fn check_sts_with(f: &CtlEqlFormula, rts: &TransitionSystem, t: &TBox, m: &MappingSet, opts: CheckOptions) -> Result<Verdict, Error> {
    let rewritten = rewrite_property(f, t);
    let level = Semantic { sts: Sts::new(rts, m) };
    Checker::new(&level, rts, opts).verdict(&rewritten)
}

/// Both verdicts for one property over one transition system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub relational: Verdict,
    pub semantic: Verdict,
    pub agree: bool,
    pub states: usize,
    pub edges: usize,
}

/// Check `f` directly over the semantic view and, compiled, over the
/// relational system, reporting whether the verdicts coincide.
pub fn cross_check_on(sas: &SasSystem, rts: &TransitionSystem, f: &CtlEqlFormula) -> Result<CrossCheck, Error> {
    let tbox = &sas.obda.tbox;
    let m = &sas.obda.mappings;
    let compiled = compile(f, tbox, m)?;
    let relational = check_rts(&compiled, rts)?;
    let semantic = check_sts(f, rts, tbox, m)?;
    Ok(CrossCheck { agree: relational.holds == semantic.holds, relational, semantic, states: rts.len(), edges: rts.edge_count() })
}

pub fn cross_check(sas: &SasSystem, f: &CtlEqlFormula, governance: Governance, cap: usize) -> Result<CrossCheck, Error> {
    let rts = build_rts(sas, governance, cap)?;
    cross_check_on(sas, &rts, f)
}
