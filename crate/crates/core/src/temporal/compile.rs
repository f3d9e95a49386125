use std::collections::BTreeMap;

use crate::error::Error;
use crate::mapping::{shape_options, unfold_ecq_under, unfold_live, Binding, MappingSet, NameGen};
use crate::ontology::{TBox, Vocabulary};
use crate::query::{Ecq, FoQuery, Var};
use crate::rewrite::rewrite_ecq;
use crate::temporal::ast::{Ctl, CtlAFormula, CtlEqlFormula, QuantBranch};
use crate::temporal::validate::validate;

/// Predicates a property may mention, and the range of `live`: the TBox
/// vocabulary together with every mapped predicate.
pub fn property_vocabulary(t: &TBox, m: &MappingSet) -> Vocabulary {
    let mut v = t.vocabulary();
    let mv = m.target_vocabulary();
    v.concepts.extend(mv.concepts);
    v.roles.extend(mv.roles);
    v
}

/// Reformulate every embedded query against `t`; the temporal structure is
/// left as it is.
pub fn rewrite_property(f: &CtlEqlFormula, t: &TBox) -> CtlEqlFormula {
    let t = if t.is_normalized() { t.clone() } else { t.normalize() };
    f.map_queries(&mut |q| rewrite_ecq(q, &t))
}

/// Unfold a rewritten property through the mappings. Each quantifier
/// becomes one branch per combination of shapes of its variables, with the
/// ontology-level variables carried by value variables across states.
pub fn unfold_property(f: &CtlEqlFormula, m: &MappingSet, t: &TBox) -> CtlAFormula {
    unfold_with(f, m, &property_vocabulary(t, m))
}

pub(crate) fn unfold_with(f: &CtlEqlFormula, m: &MappingSet, vocab: &Vocabulary) -> CtlAFormula {
    let mut gen = NameGen::new();
    unfold(f, m, vocab, &BTreeMap::new(), &mut gen)
}

fn unfold(f: &CtlEqlFormula, m: &MappingSet, vocab: &Vocabulary, sub: &BTreeMap<Var, Binding>, gen: &mut NameGen) -> CtlAFormula {
    match f {
        Ctl::Local(q) => Ctl::Local(unfold_ecq_under(q, m, vocab, sub, gen)),
        Ctl::Forall(q) | Ctl::Exists(q) => {
            let options = shape_options(m);
            let mut branches = Vec::new();
            let mut choice = vec![0usize; q.vars.len()];
            loop {
                let mut inner = sub.clone();
                let mut bindings = Vec::new();
                for (x, &c) in q.vars.iter().zip(&choice) {
                    let b = gen.binding(x, &options[c]);
                    inner.insert(x.clone(), b.clone());
                    bindings.push(b);
                }
                let mut guard = unfold_ecq_under(&q.guard, m, vocab, &inner, gen);
                if !matches!(q.guard, Ecq::Embedded(_)) {
                    for b in &bindings {
                        guard = FoQuery::and_simplified(unfold_live(b, m, vocab), guard);
                    }
                }
                let vars = bindings.iter().flat_map(|b| b.vars().iter().cloned()).collect();
                let body = q.body.as_ref().map(|b| Box::new(unfold(b, m, vocab, &inner, gen)));
                branches.push(QuantBranch { vars, guard, body });

                let mut i = 0;
                loop {
                    if i == choice.len() {
                        return if matches!(f, Ctl::Forall(_)) { Ctl::Forall(branches) } else { Ctl::Exists(branches) };
                    }
                    choice[i] += 1;
                    if choice[i] < options.len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
            }
        }
        op => {
            let kids = op.operator().unwrap().1.into_iter().map(|k| unfold(k, m, vocab, sub, gen)).collect();
            op.rebuild(kids)
        }
    }
}

/// Validate, rewrite and unfold: the relational property whose truth over
/// the transition system equals that of `f` over its semantic view.
pub fn compile(f: &CtlEqlFormula, t: &TBox, m: &MappingSet) -> Result<CtlAFormula, Error> {
    let vocab = property_vocabulary(t, m);
    let diags = validate(f, &vocab);
    if !diags.is_empty() {
        return Err(Error::Invalid(diags));
    }
    Ok(unfold_with(&rewrite_property(f, t), m, &vocab))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::kb::{Relation, Schema};

    const TBOX: &str = "
        FinishedReport <= PublishedCPReport
        ObjectedReport <= PublishedCPReport
        AcceptedReport <= PublishedCPReport
        ReviewedReport <= PublishedCPReport
        exists(controlPointID) <= PublishedCPReport
        exists(inv(contains)) <= PublishedCPReport
    ";

    fn schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(vec![Relation {
                name: "CPMR".into(),
                columns: ["id", "accepting", "moreview", "ecdreview", "finished"].map(String::from).to_vec(),
            }])
            .unwrap(),
        )
    }

    fn mappings() -> MappingSet {
        MappingSet::parse(
            "mapping a source: CPMR(?x, ?a, _, _, _), ?a = 1 target: ReviewedReport(cpmr(?x))
             mapping m source: CPMR(?x, _, ?m, _, _), ?m = 1 target: ReviewedReport(cpmr(?x))
             mapping e source: CPMR(?x, _, _, ?e, _), ?e = 1 target: ReviewedReport(cpmr(?x))
             mapping f source: CPMR(?x, _, _, _, ?f), ?f = 1 target: FinishedReport(cpmr(?x))",
            &schema(),
        )
        .unwrap()
    }

    const PROPERTY: &str = "AG (FORALL ?x . [PublishedCPReport(?x)] -> EF [FinishedReport(?x)])";

    #[test]
    fn rewriting_keeps_temporal_structure() {
        let t = TBox::parse(TBOX).unwrap();
        let f = CtlEqlFormula::parse(PROPERTY).unwrap();
        let r = rewrite_property(&f, &t);
        assert_eq!(r.skeleton(), f.skeleton());
        let Ctl::AG(inner) = &r else { panic!() };
        let Ctl::Forall(q) = inner.as_ref() else { panic!() };
        let Ecq::Embedded(u) = &q.guard else { panic!() };
        assert_eq!(u.disjuncts.len(), 7);
        assert_eq!(rewrite_property(&f, &TBox::new()), f);
    }

    #[test]
    fn unfolded_guard_is_milestone_disjunction() {
        let t = TBox::parse(TBOX).unwrap();
        let f = CtlEqlFormula::parse(PROPERTY).unwrap();
        let c = compile(&f, &t, &mappings()).unwrap();
        assert_eq!(c.skeleton(), f.skeleton());
        let Ctl::AG(inner) = &c else { panic!() };
        let Ctl::Forall(bs) = inner.as_ref() else { panic!() };
        let cpmr = &bs[0];
        assert_eq!(cpmr.vars, vec!["x_cpmr1".to_string()]);
        let FoQuery::Leaf(l) = &cpmr.guard else { panic!("{:?}", cpmr.guard) };
        // three milestone flags plus the finished flag (FinishedReport is a
        // subclass of PublishedCPReport)
        assert_eq!(l.disjuncts.len(), 4);
        assert!(bs[1].guard.is_false());
    }

    #[test]
    fn empty_mapping_gives_false_leaves() {
        let t = TBox::parse(TBOX).unwrap();
        let f = CtlEqlFormula::parse(PROPERTY).unwrap();
        let c = compile(&f, &t, &MappingSet::empty(schema())).unwrap();
        let Ctl::AG(inner) = &c else { panic!() };
        let Ctl::Forall(bs) = inner.as_ref() else { panic!() };
        assert_eq!(bs.len(), 1);
        assert!(bs[0].guard.is_false());
    }

    #[test]
    fn invalid_property_is_rejected() {
        let t = TBox::parse(TBOX).unwrap();
        let f = CtlEqlFormula::parse("EF [FinishedReport(?x)]").unwrap();
        assert!(matches!(compile(&f, &t, &mappings()), Err(Error::Invalid(_))));
    }
}
