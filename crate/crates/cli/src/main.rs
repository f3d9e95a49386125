//! `sasv`: rewrite, compile and check ontology-level temporal properties
//! against guarded action systems.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value as Json};

use sasv::lifecycle::sts_abox;
use sasv::query::{eval_ucq, Env};
use sasv::rewrite::unsat_components;
use sasv::temporal::{parse_property, property_vocabulary, rewrite_property, validate, Diagnostic};
use sasv::{
    build_rts, check_rts, check_sts, compile, materialize, ActionSystem, CtlEqlFormula, Error, Governance, MappingSet, ObdaSystem,
    SasSystem, TBox, TransitionSystem, Verdict,
};

#[derive(Parser)]
#[command(name = "sasv", version, about = "Verify ontology-level temporal properties of artifact systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a property against the TBox.
    Rewrite,
    /// Rewrite and unfold a property into a relational property.
    Compile,
    /// Build the transition system and check the compiled property.
    Check,
    /// Print the virtual ABox of the initial state or of `--state`.
    Materialize,
    /// Report the disjointness assertions violated in each reachable state.
    Consistency,
    /// List the reachable states up to `--steps` transitions deep.
    Simulate,
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true)]
    tbox: Option<PathBuf>,
    #[arg(long, global = true)]
    map: Option<PathBuf>,
    #[arg(long, global = true)]
    sys: Option<PathBuf>,
    #[arg(long, global = true)]
    prop: Option<PathBuf>,
    #[arg(long, global = true, default_value = "prune")]
    governance: Governance,
    /// Maximum number of states to explore.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    cap: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also check the property over the virtual ABoxes and compare.
    #[arg(long, global = true)]
    cross_check: bool,
    /// Report wall-clock time (structured output is then not reproducible).
    #[arg(long, global = true)]
    timing: bool,
    /// State id for `materialize`.
    #[arg(long, global = true)]
    state: Option<usize>,
    /// Depth bound for `simulate`.
    #[arg(long, global = true)]
    steps: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Serialize)]
struct Inputs {
    tbox: Option<String>,
    map: Option<String>,
    sys: Option<String>,
    prop: Option<String>,
    governance: String,
    cap: u64,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    inputs: Inputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<String>,
    verdict: Option<Json>,
    witness: Option<Vec<WitnessStep>>,
    stats: serde_json::Map<String, Json>,
}

#[derive(Serialize)]
struct WitnessStep {
    state: usize,
    facts: Vec<String>,
}

/// A failure and the exit code it maps to.
enum Exit {
    Diagnostics(Vec<Diagnostic>),
    Failed(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Exit {
    fn from(e: E) -> Self {
        let e = e.into();
        if !matches!(e.downcast_ref::<Error>(), Some(Error::Invalid(_))) {
            return Exit::Failed(e);
        }
        match e.downcast::<Error>() {
            Ok(Error::Invalid(d)) => Exit::Diagnostics(d),
            _ => unreachable!("checked above"),
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::StateCapExceeded { .. }) => 3,
        Some(Error::Inconsistent(_)) => 4,
        _ => 1,
    }
}

fn read(path: &Option<PathBuf>, flag: &str) -> Result<String> {
    let path = path.as_deref().with_context(|| format!("missing required --{flag}"))?;
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn display(p: &Option<PathBuf>) -> Option<String> {
    p.as_deref().map(Path::display).map(|d| d.to_string())
}

struct Loaded {
    tbox: Option<TBox>,
    system: Option<ActionSystem>,
    mappings: Option<MappingSet>,
    prop: Option<CtlEqlFormula>,
}

fn load(o: &Opts, need: &[&str]) -> Result<Loaded> {
    let want = |flag: &str, p: &Option<PathBuf>| need.contains(&flag) || p.is_some();
    let tbox = if want("tbox", &o.tbox) {
        let text = read(&o.tbox, "tbox")?;
        Some(TBox::parse(&text).map_err(Error::from).with_context(|| format!("in {}", o.tbox.as_ref().unwrap().display()))?)
    } else {
        None
    };
    let system = if want("sys", &o.sys) {
        let text = read(&o.sys, "sys")?;
        Some(ActionSystem::parse(&text).with_context(|| format!("in {}", o.sys.as_ref().unwrap().display()))?)
    } else {
        None
    };
    let mappings = if want("map", &o.map) {
        let text = read(&o.map, "map")?;
        let parsed = match &system {
            Some(s) => MappingSet::parse(&text, &s.schema),
            None => MappingSet::parse_standalone(&text),
        };
        Some(parsed.with_context(|| format!("in {}", o.map.as_ref().unwrap().display()))?)
    } else {
        None
    };
    let prop = if want("prop", &o.prop) {
        let text = read(&o.prop, "prop")?;
        Some(parse_property(&text).map_err(Error::from).with_context(|| format!("in {}", o.prop.as_ref().unwrap().display()))?)
    } else {
        None
    };
    Ok(Loaded { tbox, system, mappings, prop })
}

fn sas(l: &Loaded) -> Result<SasSystem> {
    let system = l.system.clone().context("missing required --sys")?;
    let tbox = l.tbox.clone().unwrap_or_default();
    let mappings = l.mappings.clone().unwrap_or_else(|| MappingSet::empty(system.schema.clone()));
    let obda = ObdaSystem::new(tbox, mappings).map_err(Error::from)?;
    Ok(SasSystem::new(system, obda).map_err(Error::from)?)
}

fn facts(rts: &TransitionSystem, s: usize) -> Vec<String> {
    rts.states()[s].facts().map(|(r, t)| format!("{r}({})", t.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))).collect()
}

fn witness(rts: &TransitionSystem, v: &Verdict) -> Option<Vec<WitnessStep>> {
    v.witness.as_ref().map(|path| path.iter().map(|&s| WitnessStep { state: s, facts: facts(rts, s) }).collect())
}

fn verdict_json(v: &Verdict) -> Json {
    json!({ "holds": v.holds })
}

fn stat(stats: &mut serde_json::Map<String, Json>, key: &str, v: impl Into<Json>) {
    stats.insert(key.to_string(), v.into());
}

fn run(cli: &Cli) -> Result<(Report, String), Exit> {
    let o = &cli.opts;
    let cap = o.cap as usize;
    let mut stats = serde_json::Map::new();
    let mut text = String::new();
    let mut result = None;
    let mut verdict = None;
    let mut wit = None;
    let command = match cli.command {
        Command::Rewrite => {
            let l = load(o, &["prop", "tbox"])?;
            let (f, t) = (l.prop.as_ref().unwrap(), l.tbox.as_ref().unwrap());
            // Without mappings the vocabulary is open: only kinds are checked.
            let diags: Vec<Diagnostic> = match &l.mappings {
                Some(m) => validate(f, &property_vocabulary(t, m)),
                None => validate(f, &t.vocabulary()).into_iter().filter(|d| !matches!(d, Diagnostic::UnknownPredicate { .. })).collect(),
            };
            if !diags.is_empty() {
                return Err(Exit::Diagnostics(diags));
            }
            let r = rewrite_property(f, t);
            stat(&mut stats, "locals_in", f.queries().len());
            stat(&mut stats, "disjuncts_out", r.queries().iter().flat_map(|q| q.leaves()).map(|u| u.disjuncts.len()).sum::<usize>());
            text = format!("{r}\n");
            result = Some(r.to_string());
            "rewrite"
        }
        Command::Compile => {
            let l = load(o, &["prop", "tbox", "map"])?;
            let compiled = compile(l.prop.as_ref().unwrap(), l.tbox.as_ref().unwrap(), l.mappings.as_ref().unwrap())?;
            stat(&mut stats, "operators", compiled.operator_count());
            stat(&mut stats, "locals", compiled.local_count());
            text = format!("{compiled}\n");
            result = Some(compiled.to_string());
            "compile"
        }
        Command::Check => {
            let l = load(o, &["prop", "tbox", "map", "sys"])?;
            let sas = sas(&l)?;
            let f = l.prop.as_ref().unwrap();
            let compiled = compile(f, &sas.obda.tbox, &sas.obda.mappings)?;
            let rts = build_rts(&sas, o.governance, cap)?;
            let v = check_rts(&compiled, &rts)?;
            stat(&mut stats, "states", rts.len());
            stat(&mut stats, "edges", rts.edge_count());
            text.push_str(&format!("holds: {}\nstates: {}\nedges: {}\n", v.holds, rts.len(), rts.edge_count()));
            let mut vj = verdict_json(&v);
            if o.cross_check {
                let s = check_sts(f, &rts, &sas.obda.tbox, &sas.obda.mappings)?;
                vj["semantic"] = json!(s.holds);
                vj["agree"] = json!(s.holds == v.holds);
                text.push_str(&format!("semantic: {}\nagree: {}\n", s.holds, s.holds == v.holds));
            }
            if let Some(path) = &v.witness {
                text.push_str("witness:\n");
                for &s in path {
                    text.push_str(&format!("  state {s}: {{ {} }}\n", facts(&rts, s).join(", ")));
                }
            }
            wit = witness(&rts, &v);
            verdict = Some(vj);
            "check"
        }
        Command::Materialize => {
            let l = load(o, &["map", "sys"])?;
            let sas = sas(&l)?;
            let abox = match o.state {
                None => materialize(&sas.obda.mappings, &sas.actions.init).map_err(Error::from)?,
                Some(s) => {
                    let rts = build_rts(&sas, o.governance, cap)?;
                    rts.db(s)?;
                    sts_abox(&rts, &sas.obda.mappings, s)?
                }
            };
            stat(&mut stats, "facts", abox.len());
            text = abox.to_string();
            result = Some(abox.to_string());
            "materialize"
        }
        Command::Consistency => {
            let l = load(o, &["tbox", "map", "sys"])?;
            let sas = sas(&l)?;
            let rts = build_rts(&sas, Governance::Assume, cap)?;
            let components = unsat_components(&sas.obda.tbox);
            let mut flagged = Vec::new();
            for s in 0..rts.len() {
                let abox = sts_abox(&rts, &sas.obda.mappings, s)?;
                let violated: Vec<&str> = components
                    .iter()
                    .filter(|c| !eval_ucq(&c.query, &abox, &Env::new()).is_empty())
                    .map(|c| c.assertion.as_str())
                    .collect();
                if violated.is_empty() {
                    text.push_str(&format!("state {s}: consistent\n"));
                } else {
                    text.push_str(&format!("state {s}: violates {}\n", violated.join(", ")));
                    flagged.push(json!({ "state": s, "violated": violated }));
                }
            }
            stat(&mut stats, "states", rts.len());
            stat(&mut stats, "inconsistent", flagged.len());
            verdict = Some(json!({ "consistent": flagged.is_empty(), "flagged": flagged }));
            "consistency"
        }
        Command::Simulate => {
            let l = load(o, &["sys"])?;
            let rts = if l.tbox.is_some() || l.mappings.is_some() {
                build_rts(&sas(&l)?, o.governance, cap)?
            } else {
                l.system.as_ref().unwrap().build(cap)?
            };
            let depth = rts.depths();
            let bound = o.steps.unwrap_or(usize::MAX);
            let shown: Vec<usize> = (0..rts.len()).filter(|&s| depth[s] <= bound).collect();
            let mut listing = Vec::new();
            for &s in &shown {
                let next: Vec<usize> = if depth[s] < bound { rts.successors(s).to_vec() } else { Vec::new() };
                text.push_str(&format!("state {s} (depth {}): {{ {} }}\n", depth[s], facts(&rts, s).join(", ")));
                if !next.is_empty() {
                    text.push_str(&format!("  -> {}\n", next.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")));
                }
                listing.push(json!({ "state": s, "depth": depth[s], "facts": facts(&rts, s), "successors": next }));
            }
            stat(&mut stats, "states", shown.len());
            stat(&mut stats, "listing", listing);
            "simulate"
        }
    };
    let inputs = Inputs {
        tbox: display(&o.tbox),
        map: display(&o.map),
        sys: display(&o.sys),
        prop: display(&o.prop),
        governance: o.governance.to_string(),
        cap: o.cap,
    };
    Ok((Report { command, inputs, result, verdict, witness: wit, stats }, text))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok((mut report, text)) => {
            let ms = start.elapsed().as_secs_f64() * 1e3;
            match cli.opts.format {
                Format::Text => {
                    print!("{text}");
                    if cli.opts.timing {
                        println!("time: {ms:.1} ms");
                    }
                }
                Format::Structured => {
                    if cli.opts.timing {
                        stat(&mut report.stats, "wall_ms", ms);
                    }
                    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
                }
            }
            ExitCode::SUCCESS
        }
        Err(Exit::Diagnostics(d)) => {
            eprintln!("error: the property is not valid");
            for d in d {
                eprintln!("  - {d}");
            }
            ExitCode::from(2)
        }
        Err(Exit::Failed(e)) => {
            eprintln!("error: {}", format!("{e:#}").trim_end());
            ExitCode::from(exit_code(&e))
        }
    }
}
