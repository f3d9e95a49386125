use std::collections::{BTreeMap, BTreeSet};

use crate::query::Var;

/// A finite relation over named columns, the intermediate result of
/// evaluating first-order connectives under active-domain semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rel<C> {
    pub vars: Vec<Var>,
    pub rows: BTreeSet<Vec<C>>,
}

impl<C: Ord + Clone> Rel<C> {
    pub fn truth(b: bool) -> Self {
        let mut rows = BTreeSet::new();
        if b {
            rows.insert(Vec::new());
        }
        Rel { vars: Vec::new(), rows }
    }

    pub fn is_true(&self) -> bool {
        !self.rows.is_empty()
    }

    /// `adom^|vars|` minus the rows.
    pub fn complement(&self, adom: &BTreeSet<C>) -> Self {
        let all = product(self.vars.len(), adom);
        Rel { vars: self.vars.clone(), rows: all.into_iter().filter(|r| !self.rows.contains(r)).collect() }
    }

    pub fn join(&self, other: &Rel<C>) -> Rel<C> {
        let shared: Vec<(usize, usize)> = self
            .vars
            .iter()
            .enumerate()
            .filter_map(|(i, v)| other.vars.iter().position(|w| w == v).map(|j| (i, j)))
            .collect();
        let extra: Vec<usize> = (0..other.vars.len()).filter(|j| !shared.iter().any(|(_, s)| s == j)).collect();
        let mut vars = self.vars.clone();
        vars.extend(extra.iter().map(|&j| other.vars[j].clone()));

        let mut index: BTreeMap<Vec<C>, Vec<&Vec<C>>> = BTreeMap::new();
        for r in &other.rows {
            index.entry(shared.iter().map(|&(_, j)| r[j].clone()).collect()).or_default().push(r);
        }
        let mut rows = BTreeSet::new();
        for l in &self.rows {
            let key: Vec<C> = shared.iter().map(|&(i, _)| l[i].clone()).collect();
            if let Some(matches) = index.get(&key) {
                for r in matches {
                    let mut row = l.clone();
                    row.extend(extra.iter().map(|&j| r[j].clone()));
                    rows.insert(row);
                }
            }
        }
        Rel { vars, rows }
    }

    /// Extend with the given columns, each ranging over the whole domain.
    pub fn pad(&self, vars: &[Var], adom: &BTreeSet<C>) -> Rel<C> {
        let missing: Vec<Var> = vars.iter().filter(|v| !self.vars.contains(v)).cloned().collect();
        if missing.is_empty() {
            return self.clone();
        }
        let filler = Rel { vars: missing.clone(), rows: product(missing.len(), adom) };
        self.join(&filler)
    }

    pub fn union(&self, other: &Rel<C>, adom: &BTreeSet<C>) -> Rel<C> {
        let a = self.pad(&other.vars, adom);
        let b = other.pad(&a.vars, adom).reorder(&a.vars);
        Rel { vars: a.vars, rows: a.rows.union(&b.rows).cloned().collect() }
    }

    pub fn reorder(&self, vars: &[Var]) -> Rel<C> {
        if vars == self.vars.as_slice() {
            return self.clone();
        }
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| self.vars.iter().position(|w| w == v).expect("reorder to a permutation"))
            .collect();
        Rel { vars: vars.to_vec(), rows: self.rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect() }
    }

    pub fn project_out(&self, v: &str) -> Rel<C> {
        let Some(i) = self.vars.iter().position(|w| w == v) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        vars.remove(i);
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.remove(i);
                r
            })
            .collect();
        Rel { vars, rows }
    }
}

fn product<C: Ord + Clone>(k: usize, adom: &BTreeSet<C>) -> BTreeSet<Vec<C>> {
    let mut rows: Vec<Vec<C>> = vec![Vec::new()];
    for _ in 0..k {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                adom.iter().map(move |c| {
                    let mut r = r.clone();
                    r.push(c.clone());
                    r
                })
            })
            .collect();
    }
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(vars: &[&str], rows: &[&[i32]]) -> Rel<i32> {
        Rel { vars: vars.iter().map(|v| v.to_string()).collect(), rows: rows.iter().map(|r| r.to_vec()).collect() }
    }

    #[test]
    fn complement_over_domain() {
        let adom: BTreeSet<i32> = [1, 2, 3].into();
        assert_eq!(rel(&["x"], &[&[2]]).complement(&adom), rel(&["x"], &[&[1], &[3]]));
        assert_eq!(Rel::<i32>::truth(false).complement(&adom), Rel::truth(true));
    }

    #[test]
    fn natural_join() {
        let a = rel(&["x", "y"], &[&[1, 2], &[2, 3]]);
        let b = rel(&["y", "z"], &[&[2, 9], &[4, 9]]);
        assert_eq!(a.join(&b), rel(&["x", "y", "z"], &[&[1, 2, 9]]));
    }

    #[test]
    fn union_pads_missing_columns() {
        let adom: BTreeSet<i32> = [1, 2].into();
        let u = rel(&["x"], &[&[1]]).union(&rel(&["y"], &[&[2]]), &adom);
        assert_eq!(u, rel(&["x", "y"], &[&[1, 1], &[1, 2], &[2, 2]]));
    }
}
