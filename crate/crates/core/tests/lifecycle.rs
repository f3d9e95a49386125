use std::collections::BTreeSet;

use sasv::{build_rts, Error, Governance, TransitionSystem};
use sasv_testkit::{gen, ground, rng};

#[test]
fn successors_match_exhaustive_grounding() {
    let mut r = rng(41);
    for _ in 0..300 {
        let sys = gen::action_system(&mut r);
        let i = gen::instance(&mut r, &sys.schema, &gen::int_values(3), 5);
        let got: BTreeSet<Vec<u8>> = sys.successors(&i).unwrap().iter().map(|s| s.canonical_form()).collect();
        assert_eq!(got, ground::successors(&sys, &i), "system:\n{sys}\ninstance:\n{i}");
    }
}

fn check_shape(rts: &TransitionSystem) {
    let forms: BTreeSet<Vec<u8>> = rts.states().iter().map(|s| s.canonical_form()).collect();
    assert_eq!(forms.len(), rts.len());
    let depths = rts.depths();
    assert_eq!(depths[0], 0);
    assert!(depths.windows(2).all(|w| w[0] <= w[1]), "states are numbered by depth");
    assert!(depths.iter().all(|&d| d != usize::MAX));
}

#[test]
fn explored_systems_are_closed_under_successors() {
    let mut r = rng(42);
    for _ in 0..60 {
        let sys = gen::action_system(&mut r);
        let rts = match sys.build(400) {
            Ok(rts) => rts,
            Err(Error::StateCapExceeded { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        check_shape(&rts);
        for s in 0..rts.len() {
            let want = ground::successors(&sys, rts.db(s).unwrap());
            let got: BTreeSet<Vec<u8>> = rts.successors(s).iter().map(|&t| rts.db(t).unwrap().canonical_form()).collect();
            assert_eq!(got, want);
        }
    }
}

#[test]
fn building_is_deterministic() {
    let mut r = rng(43);
    for _ in 0..20 {
        let (sas, rts) = gen::sas_with_rts(&mut r, 300);
        let again = build_rts(&sas, Governance::Prune, 300).unwrap();
        assert_eq!(rts.states(), again.states());
        assert_eq!(rts.edges().collect::<Vec<_>>(), again.edges().collect::<Vec<_>>());
    }
}

#[test]
fn pruned_states_are_consistent() {
    let mut r = rng(44);
    for _ in 0..30 {
        let (sas, rts) = gen::sas_with_rts(&mut r, 300);
        for s in 0..rts.len() {
            let a = sasv::lifecycle::sts_abox(&rts, &sas.obda.mappings, s).unwrap();
            assert!(sasv::is_satisfiable(&sas.obda.tbox, &a));
        }
        if let Ok(full) = build_rts(&sas, Governance::Assume, 2000) {
            assert!(rts.len() <= full.len());
            for s in rts.states() {
                assert!(full.state_of(s).is_some());
            }
        }
    }
}
