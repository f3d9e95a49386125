use sasv::query::{eval_ecq, eval_ucq, Env};
use sasv::{is_satisfiable, perfect_ref, rewrite_ecq, TBox};
use sasv_testkit::{brute, chase, gen, rng};

#[test]
fn perfect_ref_matches_chase_certain_answers() {
    let mut r = rng(11);
    for case in 0..300 {
        let t = gen::tbox(&mut r, 12, false);
        let a = gen::abox(&mut r, 12);
        let q = gen::anchored_cq(&mut r, 4);
        let got = eval_ucq(&perfect_ref(&q, &t), &a, &Env::new());
        let want = chase::certain_answers(&q, &t, &a);
        assert_eq!(got, want, "case {case}\nTBox:\n{t}\nABox:\n{a}\nquery: {q}");
    }
}

#[test]
fn normalization_preserves_certain_answers() {
    let mut r = rng(12);
    for _ in 0..200 {
        let t = gen::tbox(&mut r, 12, false);
        let a = gen::abox(&mut r, 12);
        let q = gen::anchored_cq(&mut r, 3);
        let n = t.normalize();
        assert!(n.is_normalized());
        assert_eq!(eval_ucq(&perfect_ref(&q, &n), &a, &Env::new()), chase::certain_answers(&q, &t, &a));
    }
}

#[test]
fn satisfiability_matches_chase_clash_check() {
    let mut r = rng(13);
    let mut unsat = 0;
    for _ in 0..300 {
        let t = gen::tbox(&mut r, 12, true);
        let a = gen::abox(&mut r, 12);
        let want = chase::satisfiable(&t, &a);
        assert_eq!(is_satisfiable(&t, &a), want, "TBox:\n{t}\nABox:\n{a}");
        unsat += usize::from(!want);
    }
    assert!(unsat > 10, "too few inconsistent cases ({unsat}) to be informative");
}

#[test]
fn positive_tboxes_are_always_satisfiable() {
    let mut r = rng(14);
    for _ in 0..200 {
        let t = gen::tbox(&mut r, 12, false);
        assert!(is_satisfiable(&t, &gen::abox(&mut r, 12)));
    }
}

#[test]
fn ecq_answers_are_rewritten_answers() {
    let mut r = rng(15);
    for _ in 0..200 {
        let t = gen::tbox(&mut r, 8, false);
        let a = gen::abox(&mut r, 10);
        let q = gen::ecq(&mut r, gen::ALL_NAMES, 3, &["v0".to_string()]);
        let direct = eval_ecq(&q, &a, &t, &Env::new());
        let rewritten = rewrite_ecq(&q, &t.normalize());
        assert_eq!(direct, sasv::query::eval_ecq_plain(&rewritten, &a, &Env::new()));
        assert_eq!(eval_ecq(&q, &a, &TBox::new(), &Env::new()), brute::ecq_answers(&q, &a));
    }
}
