use sasv::temporal::{check_rts, check_rts_with, compile, cross_check_on, rewrite_property, CheckOptions, Ctl, CtlAFormula};
use sasv_testkit::{ctl, gen, rng};

fn holds(f: &CtlAFormula, rts: &sasv::TransitionSystem) -> bool {
    check_rts(f, rts).unwrap().holds
}

#[test]
fn checker_matches_path_oracle() {
    let mut r = rng(51);
    let schema = gen::rts_schema();
    for case in 0..200 {
        let rts = gen::rts(&mut r, 50);
        let f = gen::ctla(&mut r, &schema, 3);
        assert_eq!(holds(&f, &rts), ctl::holds(&f, &rts), "case {case}: {f}");
    }
}

#[test]
fn dualities_hold() {
    let mut r = rng(52);
    let schema = gen::rts_schema();
    let b = Box::new;
    let not = |f: CtlAFormula| Ctl::Not(Box::new(f));
    for _ in 0..200 {
        let rts = gen::rts(&mut r, 50);
        let p = gen::ctla(&mut r, &schema, 2);
        let q = gen::ctla(&mut r, &schema, 2);
        assert_eq!(holds(&Ctl::AG(b(p.clone())), &rts), holds(&not(Ctl::EF(b(not(p.clone())))), &rts));
        assert_eq!(holds(&Ctl::AF(b(p.clone())), &rts), holds(&not(Ctl::EG(b(not(p.clone())))), &rts));
        assert_eq!(holds(&Ctl::AX(b(p.clone())), &rts), holds(&not(Ctl::EX(b(not(p.clone())))), &rts));
        let au = Ctl::AU(b(p.clone()), b(q.clone()));
        let neither = Ctl::And(b(not(p.clone())), b(not(q.clone())));
        let dual = not(Ctl::Or(b(Ctl::EU(b(not(q.clone())), b(neither))), b(Ctl::EG(b(not(q))))));
        assert_eq!(holds(&au, &rts), holds(&dual, &rts));
    }
}

#[test]
fn memoization_does_not_change_verdicts() {
    let mut r = rng(53);
    let schema = gen::rts_schema();
    for _ in 0..100 {
        let rts = gen::rts(&mut r, 40);
        let f = gen::ctla(&mut r, &schema, 3);
        let with = check_rts_with(&f, &rts, CheckOptions { memo: true }).unwrap();
        let without = check_rts_with(&f, &rts, CheckOptions { memo: false }).unwrap();
        assert_eq!(with, without);
    }
}

#[test]
fn compilation_preserves_the_skeleton() {
    let mut r = rng(54);
    for _ in 0..200 {
        let sas = gen::sas(&mut r);
        let f = gen::property_for(&mut r, &sas, 3);
        let (t, m) = (&sas.obda.tbox, &sas.obda.mappings);
        assert_eq!(rewrite_property(&f, t).skeleton(), f.skeleton());
        assert_eq!(compile(&f, t, m).unwrap().skeleton(), f.skeleton());
    }
}

#[test]
fn semantic_and_relational_checks_agree() {
    let mut r = rng(55);
    for _ in 0..20 {
        let (sas, rts) = gen::sas_with_rts(&mut r, 200);
        for _ in 0..3 {
            let f = gen::property_for(&mut r, &sas, 3);
            let cc = cross_check_on(&sas, &rts, &f).unwrap();
            assert!(cc.agree, "property {f}\nsystem:\n{}\nTBox:\n{}\nmappings:\n{}", sas.actions, sas.obda.tbox, sas.obda.mappings);
        }
    }
}
