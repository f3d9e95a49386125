//! Acceptance suite: one PASS/FAIL line per criterion, then a non-zero
//! exit if any criterion failed.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::Rng as _;
use sasv::lifecycle::sts_abox;
use sasv::mapping::{unfold_ecq, unfold_ucq};
use sasv::query::{eval_ucq, Env};
use sasv::temporal::{check_rts, compile, cross_check_on, parse_property, Ctl, CtlAFormula};
use sasv::{
    build_rts, is_satisfiable, perfect_ref, ActionSystem, Ecq, Governance, MappingSet, ObdaSystem, SasSystem, TBox, TransitionSystem,
};
use sasv_testkit::{brute, chase, ctl, gen, rng};

type Check = Result<String, String>;
type Criterion = (&'static str, Option<u64>, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn sasv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sasv")).args(args).output().expect("binary runs")
}

fn files(stem: &str, prop: &str) -> Vec<String> {
    let f = |ext: &str| fixture(&format!("{stem}.{ext}")).display().to_string();
    vec!["--tbox".into(), f("tbox"), "--map".into(), f("map"), "--sys".into(), f("sys"), "--prop".into(), fixture(prop).display().to_string()]
}

fn run_files(cmd: &str, stem: &str, prop: &str, extra: &[&str]) -> Output {
    let owned = files(stem, prop);
    let mut args: Vec<&str> = vec![cmd];
    args.extend(owned.iter().map(String::as_str));
    args.extend_from_slice(extra);
    sasv(&args)
}

fn stdout(o: &Output) -> Result<String, String> {
    ensure(o.status.success(), || format!("exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)))?;
    Ok(String::from_utf8_lossy(&o.stdout).into_owned())
}

fn verdict_agreement() -> Check {
    let mut r = rng(1001);
    let (mut agree, mut total, mut held, mut states) = (0, 0, 0, 0);
    for _ in 0..100 {
        let (sas, rts) = gen::sas_with_rts(&mut r, 500);
        states += rts.len();
        for _ in 0..5 {
            let f = gen::property_for(&mut r, &sas, 3);
            let cc = cross_check_on(&sas, &rts, &f).map_err(|e| e.to_string())?;
            total += 1;
            agree += usize::from(cc.agree);
            held += usize::from(cc.relational.holds);
            ensure(cc.agree, || format!("disagreement on {f}\n{}", sas.actions))?;
        }
    }
    Ok(format!("{agree}/{total} agree, {held} hold, {states} states in total"))
}

fn rewriting() -> Check {
    let mut r = rng(1002);
    let mut nonempty = 0;
    for case in 0..1000 {
        let t = gen::tbox(&mut r, 12, false);
        let a = gen::abox(&mut r, 12);
        let q = gen::anchored_cq(&mut r, 4);
        let got = eval_ucq(&perfect_ref(&q, &t), &a, &Env::new());
        let want = chase::certain_answers(&q, &t, &a);
        ensure(got == want, || format!("case {case}: {q}"))?;
        nonempty += usize::from(!want.is_empty());
    }
    Ok(format!("1000/1000 agree, {nonempty} with answers"))
}

fn unfolding() -> Check {
    let mut r = rng(1003);
    let mut nonempty = 0;
    for case in 0..600 {
        let schema = gen::schema(&mut r, 3, &[1, 2, 3]);
        let m = gen::mappings(&mut r, &schema, 4);
        let i = gen::instance(&mut r, &schema, &gen::int_values(3), 8);
        let virt = brute::materialize(&m, &i);
        let voc = m.target_vocabulary();
        let names = gen::names_of(&voc);
        let n = gen::names_in(&mut r, &names);
        let (got, want) = if case % 2 == 0 {
            let q = gen::ucq(&mut r, n, 3, 2);
            (unfold_ucq(&q, &m).eval(&i), brute::ucq_answers(&q, &virt))
        } else {
            let scope: Vec<String> = if r.gen_bool(0.5) { vec![] } else { vec!["v0".into()] };
            let q: Ecq = gen::ecq(&mut r, n, 3, &scope);
            (unfold_ecq(&q, &m, &voc).eval(&i), brute::ecq_answers(&q, &virt))
        };
        let got = got.map_err(|e| e.to_string())?;
        ensure(got == want, || format!("case {case}\n{m}\n{i}"))?;
        nonempty += usize::from(!want.is_empty());
    }
    Ok(format!("600/600 agree, {nonempty} with answers"))
}

fn energy() -> Check {
    let out = stdout(&run_files("rewrite", "energy", "energy.prop", &[]))?;
    let f = parse_property(out.trim()).map_err(|e| e.to_string())?;
    let guard = f.queries()[0];
    let preds: BTreeSet<&str> = guard.leaves().iter().flat_map(|u| u.disjuncts.iter()).flat_map(|d| d.atoms.iter().map(|a| a.predicate.as_str())).collect();
    let disjuncts: usize = guard.leaves().iter().map(|u| u.disjuncts.len()).sum();
    let expected: BTreeSet<&str> =
        ["controlPointID", "ObjectedReport", "AcceptedReport", "PublishedCPReport", "ReviewedReport", "FinishedReport", "contains"].into();
    ensure(disjuncts == 7 && preds == expected, || format!("rewritten guard {guard}"))?;

    let reviewed = ["AcceptingPublishedOK", "MOReviewingPublishedOK", "ECDReviewingPublishedOK"];
    let compiled = stdout(&run_files("compile", "energy", "reviewed.prop", &[]))?;
    let guard = compiled.split(" ] ->").next().and_then(|s| s.split("[ ").nth(1)).ok_or("no guard in compiled property")?;
    let parts: Vec<&str> = guard.split(" | ").collect();
    let milestones: BTreeSet<&str> = parts.iter().filter_map(|p| p.split('"').nth(1)).collect();
    ensure(parts.len() == 3 && milestones == reviewed.into(), || format!("compiled guard {guard}"))?;
    let full = stdout(&run_files("compile", "energy", "energy.prop", &[]))?;
    ensure(reviewed.iter().all(|m| full.matches(&format!("\"{m}\"")).count() == 1), || format!("compiled property {full}"))?;

    let first = stdout(&run_files("check", "energy", "energy.prop", &["--cross-check", "--format", "structured"]))?;
    let second = stdout(&run_files("check", "energy", "energy.prop", &["--cross-check", "--format", "structured"]))?;
    let doc: serde_json::Value = serde_json::from_str(&first).map_err(|e| e.to_string())?;
    ensure(first == second, || "structured output differs between runs".into())?;
    ensure(doc["verdict"]["holds"] == true && doc["verdict"]["agree"] == true, || format!("verdict {}", doc["verdict"]))?;
    Ok(format!("7 rewritten disjuncts, 3 reviewing milestones, check holds on {} states", doc["stats"]["states"]))
}

fn satisfiability() -> Check {
    let mut r = rng(1005);
    let mut unsat = 0;
    for case in 0..500 {
        let t = gen::tbox(&mut r, 12, true);
        let a = gen::abox(&mut r, 12);
        let want = chase::satisfiable(&t, &a);
        ensure(is_satisfiable(&t, &a) == want, || format!("case {case}\n{t}\n{a}"))?;
        unsat += usize::from(!want);
    }
    for _ in 0..200 {
        let t = gen::tbox(&mut r, 12, false);
        ensure(is_satisfiable(&t, &gen::abox(&mut r, 12)), || format!("positive TBox unsatisfiable\n{t}"))?;
    }
    Ok(format!("500/500 agree ({unsat} unsatisfiable), 200/200 positive satisfiable"))
}

fn ctl_dualities() -> Check {
    let mut r = rng(1006);
    let schema = gen::rts_schema();
    let holds = |f: &CtlAFormula, rts: &TransitionSystem| check_rts(f, rts).map(|v| v.holds).map_err(|e| e.to_string());
    let b = Box::new;
    let not = |f: CtlAFormula| Ctl::Not(Box::new(f));
    let mut oracle_true = 0;
    for case in 0..200 {
        let rts = gen::rts(&mut r, 50);
        let p = gen::ctla(&mut r, &schema, 2);
        let q = gen::ctla(&mut r, &schema, 2);
        let pairs = [
            (Ctl::AG(b(p.clone())), not(Ctl::EF(b(not(p.clone()))))),
            (Ctl::AF(b(p.clone())), not(Ctl::EG(b(not(p.clone()))))),
            (Ctl::AX(b(p.clone())), not(Ctl::EX(b(not(p.clone()))))),
            (
                Ctl::AU(b(p.clone()), b(q.clone())),
                not(Ctl::Or(b(Ctl::EU(b(not(q.clone())), b(Ctl::And(b(not(p.clone())), b(not(q.clone())))))), b(Ctl::EG(b(not(q.clone())))))),
            ),
        ];
        for (lhs, rhs) in &pairs {
            ensure(holds(lhs, &rts)? == holds(rhs, &rts)?, || format!("case {case}: {lhs} vs {rhs}"))?;
        }
        let f = gen::ctla(&mut r, &schema, 3);
        let want = ctl::holds(&f, &rts);
        ensure(holds(&f, &rts)? == want, || format!("case {case}: oracle disagrees on {f}"))?;
        oracle_true += usize::from(want);
    }
    Ok(format!("800/800 dualities, 200/200 oracle agreement ({oracle_true} true)"))
}

fn governance() -> Check {
    let read = |ext: &str| std::fs::read_to_string(fixture(&format!("clash.{ext}"))).map_err(|e| e.to_string());
    let actions = ActionSystem::parse(&read("sys")?).map_err(|e| e.to_string())?;
    let m = MappingSet::parse(&read("map")?, &actions.schema).map_err(|e| e.to_string())?;
    let t = TBox::parse(&read("tbox")?).map_err(|e| e.to_string())?;
    let sas = SasSystem::new(actions, ObdaSystem::new(t, m).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let prune = build_rts(&sas, Governance::Prune, 1000).map_err(|e| e.to_string())?;
    let assume = build_rts(&sas, Governance::Assume, 1000).map_err(|e| e.to_string())?;
    let embed: Option<Vec<usize>> = prune.states().iter().map(|i| assume.state_of(i)).collect();
    let embed = embed.ok_or("a pruned state is missing from the assumed system")?;
    ensure(prune.edges().all(|(s, t)| assume.successors(embed[s]).contains(&embed[t])), || "a pruned edge is missing".into())?;
    ensure(prune.len() < assume.len(), || "pruning removed nothing".into())?;
    for s in 0..prune.len() {
        let abox = sts_abox(&prune, &sas.obda.mappings, s).map_err(|e| e.to_string())?;
        ensure(is_satisfiable(&sas.obda.tbox, &abox), || format!("pruned state {s} is inconsistent"))?;
    }
    let fail = run_files("check", "clash", "clash.prop", &["--governance", "fail"]);
    ensure(fail.status.code() == Some(4), || format!("fail mode exited with {:?}", fail.status.code()))?;
    Ok(format!("prune {} of {} states, all consistent; fail mode exits 4", prune.len(), assume.len()))
}

fn round_trips() -> Check {
    let mut r = rng(1008);
    for _ in 0..200 {
        let t = gen::tbox(&mut r, 12, true);
        ensure(TBox::parse(&t.to_string()).as_ref() == Ok(&t), || format!("tbox\n{t}"))?;

        let schema = gen::schema(&mut r, 3, &[1, 2, 3]);
        let m = gen::mappings(&mut r, &schema, 4);
        let pm = MappingSet::parse_standalone(&m.to_string()).map_err(|e| e.to_string())?;
        ensure(pm == m, || format!("mappings\n{m}"))?;

        let sas = gen::sas(&mut r);
        let f = gen::property_for(&mut r, &sas, 4);
        let p = parse_property(&f.to_string()).map_err(|e| e.to_string())?;
        let pp = parse_property(&p.to_string()).map_err(|e| e.to_string())?;
        ensure(p.skeleton() == f.skeleton() && pp == p, || format!("property {f}"))?;

        let sys = gen::action_system(&mut r);
        let ps = ActionSystem::parse(&sys.to_string()).map_err(|e| e.to_string())?;
        ensure(ps == sys, || format!("system\n{sys}"))?;
    }
    Ok("200/200 for each of .tbox .map .prop .sys".into())
}

fn performance() -> Check {
    let (sas, f) = gen::grid(100);
    let start = Instant::now();
    let rts = build_rts(&sas, Governance::Prune, 20_000).map_err(|e| e.to_string())?;
    let compiled = compile(&f, &sas.obda.tbox, &sas.obda.mappings).map_err(|e| e.to_string())?;
    let v = check_rts(&compiled, &rts).map_err(|e| e.to_string())?;
    let check_time = start.elapsed();
    ensure(rts.len() == 100 * 100 && v.holds, || format!("{} states, holds {}", rts.len(), v.holds))?;
    ensure(check_time < Duration::from_secs(10), || format!("build and check took {check_time:?}"))?;

    let energy = |ext: &str| std::fs::read_to_string(fixture(&format!("energy.{ext}"))).map_err(|e| e.to_string());
    let t = TBox::parse(&energy("tbox")?).map_err(|e| e.to_string())?;
    let sys = ActionSystem::parse(&energy("sys")?).map_err(|e| e.to_string())?;
    let em = MappingSet::parse(&energy("map")?, &sys.schema).map_err(|e| e.to_string())?;
    let concepts = ["PublishedCPReport", "ReviewedReport", "AcceptedReport", "FinishedReport", "ObjectedReport"];
    let ops = ["EF", "AG", "AF", "EX"];
    let locals: Vec<String> = (0..25)
        .map(|k| {
            let atoms: Vec<String> = (0..4).map(|j| format!("{}(?x{k})", concepts[(k + j) % concepts.len()])).collect();
            format!("{} (EXISTS ?x{k} . [{}])", ops[k % ops.len()], atoms.join(", "))
        })
        .collect();
    let big = parse_property(&locals.join(" AND ")).map_err(|e| e.to_string())?;
    let atoms: usize = big.queries().iter().flat_map(|q| q.leaves()).map(|u| u.atom_count()).sum();
    let start = Instant::now();
    compile(&big, &t, &em).map_err(|e| e.to_string())?;
    let compile_time = start.elapsed();
    ensure(atoms == 100, || format!("{atoms} atoms"))?;
    ensure(compile_time < Duration::from_secs(1), || format!("compile took {compile_time:?}"))?;
    Ok(format!("{} states checked in {check_time:.2?} (limit 10s); 100 atoms compiled in {compile_time:.2?} (limit 1s)", rts.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("semantic and relational verdicts agree", Some(300), verdict_agreement),
        ("rewriting matches chase certain answers", Some(120), rewriting),
        ("unfolding matches the virtual ABox", None, unfolding),
        ("energy regression", None, energy),
        ("satisfiability matches chase clash check", None, satisfiability),
        ("CTL dualities and path oracle", None, ctl_dualities),
        ("governance", None, governance),
        ("parser round-trips", None, round_trips),
        ("performance smoke", None, performance),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > Duration::from_secs(l) => Err(format!("took {elapsed:.1?}, limit {l}s")),
            (o, _) => o,
        };
        let budget = limit.map(|l| format!(", limit {l}s")).unwrap_or_default();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{elapsed:.1?}{budget}]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} [{elapsed:.1?}{budget}]", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
