use sasv::temporal::parse_property;
use sasv::{ActionSystem, MappingSet, TBox};
use sasv_testkit::{gen, rng};

#[test]
fn tbox_round_trip() {
    let mut r = rng(61);
    for _ in 0..200 {
        let t = gen::tbox(&mut r, 12, true);
        let p = TBox::parse(&t.to_string()).unwrap();
        assert_eq!(p, t);
        assert_eq!(TBox::parse(&p.to_string()).unwrap(), p);
    }
}

#[test]
fn mapping_round_trip() {
    let mut r = rng(62);
    for _ in 0..200 {
        let schema = gen::schema(&mut r, 3, &[1, 2, 3]);
        let m = gen::mappings(&mut r, &schema, 4);
        let p = MappingSet::parse_standalone(&m.to_string()).unwrap();
        assert_eq!(p, m, "{m}");
        assert_eq!(MappingSet::parse_standalone(&p.to_string()).unwrap(), p);
    }
}

#[test]
fn property_round_trip() {
    let mut r = rng(63);
    for _ in 0..200 {
        let sas = gen::sas(&mut r);
        let f = gen::property_for(&mut r, &sas, 4);
        // Variables used once print as `_`, so compare from the first parse.
        let p = parse_property(&f.to_string()).unwrap();
        assert_eq!(p.skeleton(), f.skeleton());
        assert_eq!(parse_property(&p.to_string()).unwrap(), p, "{f}");
    }
}

#[test]
fn system_round_trip() {
    let mut r = rng(64);
    for _ in 0..200 {
        let sys = gen::action_system(&mut r);
        let p = ActionSystem::parse(&sys.to_string()).unwrap();
        assert_eq!(p, sys, "{sys}");
        assert_eq!(ActionSystem::parse(&p.to_string()).unwrap(), p);
    }
}
