use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, EvalError, Inconsistency};
use crate::kb::{ABox, DatabaseInstance};
use crate::lifecycle::{ActionSystem, SasSystem};
use crate::mapping::{materialize, unfold_boolean, MappingSet};
use crate::query::{eval_fo, FoEnv, FoQuery};
use crate::rewrite::unsat_components;

/// What to do with a reached instance whose virtual ABox is inconsistent
/// with the TBox.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Governance {
    /// Drop the instance and every transition into it.
    #[default]
    Prune,
    /// Keep it; every state is assumed consistent.
    Assume,
    /// Abort construction.
    Fail,
}

impl FromStr for Governance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "prune" => Ok(Governance::Prune),
            "assume" => Ok(Governance::Assume),
            "fail" => Ok(Governance::Fail),
            other => Err(format!("unknown governance mode `{other}` (expected prune, assume or fail)")),
        }
    }
}

impl fmt::Display for Governance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Governance::Prune => "prune",
            Governance::Assume => "assume",
            Governance::Fail => "fail",
        })
    }
}

/// A finite relational transition system. State 0 is initial; every state
/// carries its own instance and no two states share one.
#[derive(Clone, Debug)]
pub struct TransitionSystem {
    states: Vec<DatabaseInstance>,
    succ: Vec<Vec<usize>>,
    index: HashMap<Vec<u8>, usize>,
}

impl TransitionSystem {
    /// Assemble a system from explicit parts. Successor lists are sorted and
    /// deduplicated; instances must be distinct.
    pub fn from_parts(states: Vec<DatabaseInstance>, mut succ: Vec<Vec<usize>>) -> Self {
        assert_eq!(states.len(), succ.len());
        assert!(!states.is_empty());
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
            assert!(s.iter().all(|&t| t < states.len()));
        }
        let index: HashMap<Vec<u8>, usize> = states.iter().enumerate().map(|(i, s)| (s.canonical_form(), i)).collect();
        assert_eq!(index.len(), states.len(), "duplicate instances");
        TransitionSystem { states, succ, index }
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[DatabaseInstance] {
        &self.states
    }

    pub fn db(&self, s: usize) -> Result<&DatabaseInstance, Error> {
        self.states.get(s).ok_or(Error::UnknownState(s))
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(s, ts)| ts.iter().map(move |&t| (s, t)))
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (s, t) in self.edges() {
            pred[t].push(s);
        }
        pred
    }

    pub fn state_of(&self, i: &DatabaseInstance) -> Option<usize> {
        self.index.get(&i.canonical_form()).copied()
    }

    /// States grouped by breadth-first depth from the initial state.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![usize::MAX; self.len()];
        depth[0] = 0;
        let mut queue = std::collections::VecDeque::from([0]);
        while let Some(s) = queue.pop_front() {
            for &t in &self.succ[s] {
                if depth[t] == usize::MAX {
                    depth[t] = depth[s] + 1;
                    queue.push_back(t);
                }
            }
        }
        depth
    }
}

/// Per-disjointness unfolded violation queries.
struct Guard {
    checks: Vec<(String, FoQuery)>,
}

impl Guard {
    fn new(sas: &SasSystem) -> Self {
        let checks = unsat_components(&sas.obda.tbox)
            .into_iter()
            .map(|c| (c.assertion, unfold_boolean(&c.query, &sas.obda.mappings)))
            .filter(|(_, q)| !q.is_false())
            .collect();
        Guard { checks }
    }

    /// The first violated assertion, if any.
    fn violation(&self, i: &DatabaseInstance) -> Result<Option<String>, EvalError> {
        for (name, q) in &self.checks {
            if !eval_fo(q, i, &FoEnv::new())?.is_empty() {
                return Ok(Some(name.clone()));
            }
        }
        Ok(None)
    }
}

/// Breadth-first construction of the reachable transition system.
///
/// States are numbered by depth, and within one depth by canonical form,
/// so the result does not depend on thread scheduling.
pub fn build_rts(sas: &SasSystem, governance: Governance, cap: usize) -> Result<TransitionSystem, Error> {
    let guard = match governance {
        Governance::Assume => None,
        _ => Some(Guard::new(sas)),
    };
    explore(&sas.actions, guard.as_ref(), governance, cap)
}

impl ActionSystem {
    /// The transition system of the action system alone, without any
    /// ontology-based governance.
    pub fn build(&self, cap: usize) -> Result<TransitionSystem, Error> {
        explore(self, None, Governance::Assume, cap)
    }
}

fn explore(sys: &ActionSystem, guard: Option<&Guard>, governance: Governance, cap: usize) -> Result<TransitionSystem, Error> {
    let cap = cap.max(1);
    if let Some(g) = guard {
        if let Some(violated) = g.violation(&sys.init)? {
            return Err(Error::Inconsistent(Box::new(Inconsistency { instance: sys.init.clone(), violated })));
        }
    }
    let mut states = vec![sys.init.clone()];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
    let mut index: HashMap<Vec<u8>, usize> = HashMap::from([(sys.init.canonical_form(), 0)]);
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let next: Vec<Vec<DatabaseInstance>> =
            frontier.par_iter().map(|&s| sys.successors(&states[s])).collect::<Result<_, EvalError>>()?;

        let mut fresh: BTreeMap<Vec<u8>, DatabaseInstance> = BTreeMap::new();
        for i in next.iter().flatten() {
            let key = i.canonical_form();
            if !index.contains_key(&key) {
                fresh.entry(key).or_insert_with(|| i.clone());
            }
        }
        let fresh: Vec<(Vec<u8>, DatabaseInstance)> = fresh.into_iter().collect();
        let verdicts: Vec<Option<String>> = match guard {
            Some(g) => fresh.par_iter().map(|(_, i)| g.violation(i)).collect::<Result<_, EvalError>>()?,
            None => vec![None; fresh.len()],
        };

        let mut new_frontier = Vec::new();
        for ((key, inst), bad) in fresh.into_iter().zip(verdicts) {
            if let Some(violated) = bad {
                match governance {
                    Governance::Fail => return Err(Error::Inconsistent(Box::new(Inconsistency { instance: inst, violated }))),
                    Governance::Prune => continue,
                    Governance::Assume => {}
                }
            }
            if states.len() == cap {
                return Err(Error::StateCapExceeded { cap });
            }
            index.insert(key, states.len());
            new_frontier.push(states.len());
            states.push(inst);
            succ.push(Vec::new());
        }

        for (&s, insts) in frontier.iter().zip(&next) {
            let mut ts: Vec<usize> = insts.iter().filter_map(|i| index.get(&i.canonical_form()).copied()).collect();
            ts.sort_unstable();
            ts.dedup();
            succ[s] = ts;
        }
        frontier = new_frontier;
    }
    Ok(TransitionSystem { states, succ, index })
}

/// The semantic view of a transition system: same states and edges, each
/// state read through the mappings as a virtual ABox.
pub struct Sts<'a> {
    rts: &'a TransitionSystem,
    mappings: &'a MappingSet,
    aboxes: Vec<OnceLock<ABox>>,
}

impl<'a> Sts<'a> {
    pub fn new(rts: &'a TransitionSystem, mappings: &'a MappingSet) -> Self {
        Sts { rts, mappings, aboxes: (0..rts.len()).map(|_| OnceLock::new()).collect() }
    }

    pub fn rts(&self) -> &TransitionSystem {
        self.rts
    }

    /// `M(db(s))`, computed once per state.
    pub fn abox(&self, s: usize) -> Result<&ABox, Error> {
        let cell = self.aboxes.get(s).ok_or(Error::UnknownState(s))?;
        if let Some(a) = cell.get() {
            return Ok(a);
        }
        let a = materialize(self.mappings, self.rts.db(s)?)?;
        Ok(cell.get_or_init(|| a))
    }
}

pub fn sts_abox(rts: &TransitionSystem, m: &MappingSet, s: usize) -> Result<ABox, Error> {
    Ok(materialize(m, rts.db(s)?)?)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mapping::{MappingSet, ObdaSystem};
    use crate::ontology::TBox;
    use crate::rewrite::is_satisfiable;

    fn sas(sys: &str, tbox: &str, map: &str) -> SasSystem {
        let actions = ActionSystem::parse(sys).unwrap();
        let mappings = MappingSet::parse(map, &actions.schema).unwrap();
        let obda = ObdaSystem::new(TBox::parse(tbox).unwrap(), mappings).unwrap();
        SasSystem::new(actions, obda).unwrap()
    }

    const TOGGLE: &str = "schema F(flag) pool flag { 0, 1 } init { F(0) }
        action toggle(?v: flag, ?w: flag) pre: F(?v), ?v != ?w del: F(?v) add: F(?w)";

    const CLASH: &str = "schema R(id, kind) pool kind { 1, 2 } init { R(1, 1) }
        action tag(?i: adom, ?k: kind) pre: R(?i, ?j) del: add: R(?i, ?k)";

    const CLASH_MAP: &str = "mapping a source: R(?i, ?k), ?k = 1 target: A(f(?i))
        mapping b source: R(?i, ?k), ?k = 2 target: B(f(?i))";

    #[test]
    fn no_actions_single_state() {
        let s = sas("schema F(flag) init { F(0) }", "", "");
        let rts = build_rts(&s, Governance::Prune, 10).unwrap();
        assert_eq!((rts.len(), rts.edge_count()), (1, 0));
    }

    #[test]
    fn toggle_cycle() {
        let s = sas(TOGGLE, "", "");
        let rts = build_rts(&s, Governance::Prune, 10).unwrap();
        assert_eq!(rts.len(), 2);
        assert_eq!(rts.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn cap_exceeded() {
        let s = sas(TOGGLE, "", "");
        assert!(matches!(build_rts(&s, Governance::Prune, 1), Err(Error::StateCapExceeded { cap: 1 })));
    }

    #[test]
    fn governance_modes() {
        let s = sas(CLASH, "disjoint(A, B)", CLASH_MAP);
        let pruned = build_rts(&s, Governance::Prune, 100).unwrap();
        let assumed = build_rts(&s, Governance::Assume, 100).unwrap();
        assert!(pruned.len() < assumed.len());
        for i in pruned.states() {
            assert!(assumed.state_of(i).is_some());
            let abox = materialize(&s.obda.mappings, i).unwrap();
            assert!(is_satisfiable(&s.obda.tbox, &abox));
        }
        assert!(matches!(build_rts(&s, Governance::Fail, 100), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn inconsistent_init_rejected() {
        let s = sas("schema R(id, kind) init { R(1, 1) R(1, 2) }", "disjoint(A, B)", CLASH_MAP);
        assert!(matches!(build_rts(&s, Governance::Prune, 10), Err(Error::Inconsistent(_))));
        assert!(build_rts(&s, Governance::Assume, 10).is_ok());
    }

    #[test]
    fn sts_memoizes_materialization() {
        let s = sas(TOGGLE, "", "mapping m source: F(?v) target: Flag(?v)");
        let rts = build_rts(&s, Governance::Prune, 10).unwrap();
        let sts = Sts::new(&rts, &s.obda.mappings);
        let a = sts.abox(1).unwrap();
        assert!(std::ptr::eq(a, sts.abox(1).unwrap()));
        assert_eq!(*a, sts_abox(&rts, &s.obda.mappings, 1).unwrap());
        assert!(matches!(sts.abox(7), Err(Error::UnknownState(7))));
        let empty = MappingSet::empty(Arc::clone(&s.actions.schema));
        assert!(sts_abox(&rts, &empty, 0).unwrap().is_empty());
    }
}
