//! Command-line front end: batch verbs over `.egp` presentations and `.ots`
//! tree schemes, the seeded corpus runner, and the interactive match mode.
//!
//! Machine output is JSON on standard output; diagnostics go to standard
//! error.  Exit codes: 0 pass, 1 check failure, 2 usage or input error.

use clap::{Parser, Subcommand};
use endgraph::descriptor::{homeomorphic, SpaceDescriptor};
use endgraph::endspace::{
    edge_end_classes, edge_end_space, end_classes, end_space, oracle_equivalent, Mode,
    DEFAULT_ORACLE_BUDGET,
};
use endgraph::game::{
    adjudicate_scheme, build_tc_ground, build_tc_scheme, canonical_strategy, run_match,
    tc_descriptor, validate_move, MatchStatus, Outcome, PlayerIPolicy, SchemeCtx, SubbaseCtx, Tc,
};
use endgraph::ordertree::{parse_ots, serialize_ots, BasicOpen, NodeRef, TreeScheme};
use endgraph::presentation::{self, GraphPresentation};
use endgraph::subbase::{
    check_hereditary_completeness, check_special, parse_node, Completeness, SubbaseFamily,
    HC_POINT_BOUND,
};
use endgraph::transform::{
    compute_envelope, duplicate_dominators, expand_cliques, verify_correspondence, Direction,
    TransformError,
};
use endgraph::{corpus, par};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "endgraph", version, about = "end spaces of finitely presented infinite graphs")]
struct Cli {
    /// Structured JSON on standard output (the default).
    #[arg(long, global = true)]
    json: bool,
    /// Plain-text tables instead of JSON.
    #[arg(long, global = true, conflicts_with = "json")]
    human: bool,
    /// Separator-oracle search budget (expansion steps).
    #[arg(long, global = true, value_name = "MS")]
    budget: Option<usize>,
    /// Seed for anything pseudo-random.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// End-space descriptor of a presentation.
    Ends { file: PathBuf },
    /// Edge-end-space descriptor of a presentation.
    EdgeEnds { file: PathBuf },
    /// Replace every ω-fan apex by an infinite clique.
    Expand {
        file: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Split every dominating vertex along its end's envelope.
    Duplicate {
        file: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check the homeomorphism promised by a transformation.
    Verify {
        file: PathBuf,
        #[arg(long, conflicts_with = "tau")]
        rho: bool,
        #[arg(long)]
        tau: bool,
    },
    /// Envelope of an end: dominators plus its maximal disjoint ray family.
    Envelope { file: PathBuf, end: String },
    /// Descriptor of the ray space of a tree scheme.
    Rayspace { file: PathBuf },
    /// Uniform T-graph presentation of a tree scheme.
    Tgraph {
        file: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Regroup top-attached segments by a neighborhood-pattern map.
    Surgery {
        file: PathBuf,
        /// Lines `child: node node …` assigning each top-attached segment
        /// its finite pattern.
        nmap: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Nested / noetherian / σ-disjoint / clopen checks, plus hereditary
    /// completeness on small finite grounds.
    CheckSubbase {
        /// `.ots` scheme (the family `{[t,∅]}`) or a sets file of lines
        /// `id: point point …`.
        file: PathBuf,
        /// Point names, whitespace-separated (required for sets files).
        #[arg(long)]
        ground: Option<PathBuf>,
        /// Declared open sets, one per line, else discrete.
        #[arg(long)]
        topology: Option<PathBuf>,
    },
    /// Play a scripted policy against the canonical strategy and adjudicate.
    Match {
        file: PathBuf,
        /// descend:RAY | random:SEED | oscillate:[RAY:]SCRIPT
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 8)]
        rounds: u32,
    },
    /// Interactive match: `part K`, optional `shrink t F…`, `quit`.
    Play { file: PathBuf },
    /// Strategy tree over a scheme's ray space or a finite ground.
    BuildTc {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        /// Point names for a sets file (as in check-subbase).
        #[arg(long)]
        ground: Option<PathBuf>,
    },
    /// Run a check suite over the fixed fixtures plus seeded instances.
    Corpus {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// rho | tau | oracle | refine | special | match | tgraph
        #[arg(long)]
        suite: String,
    },
}

#[derive(Debug)]
struct CliError {
    msg: String,
    code: u8,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> CliError {
        CliError {
            msg: msg.into(),
            code: 2,
        }
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> CliError {
        CliError {
            msg: e.to_string(),
            code: 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("endgraph: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn load_egp(path: &Path) -> Result<GraphPresentation, CliError> {
    let p = presentation::parse(&read(path)?)?;
    let report = p.validate();
    if !report.is_empty() {
        return Err(CliError::usage(format!(
            "{}: invalid presentation: {report:?}",
            path.display()
        )));
    }
    Ok(p)
}

fn load_ots(path: &Path) -> Result<TreeScheme, CliError> {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = read(path)?;
    let t = parse_ots(&text, &mut |name| {
        std::fs::read_to_string(dir.join(name)).map_err(|e| e.to_string())
    })?;
    t.validate().map_err(CliError::from)?;
    Ok(t)
}

fn emit(cli: &Cli, value: &Value, human: impl FnOnce() -> String) {
    if cli.human {
        println!("{}", human());
    } else {
        println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
    }
}

fn descriptor_json(d: &SpaceDescriptor, classes: &BTreeMap<String, String>) -> Value {
    let limits: Vec<Value> = d
        .limits
        .iter()
        .map(|l| {
            json!({
                "point": l,
                "sequences": d.sequences.iter().filter(|(_, x)| x == l).count(),
            })
        })
        .collect();
    json!({
        "isolated": d.isolated.len(),
        "limits": limits,
        "free_families": d.free_families.len(),
        "points": d,
        "classes": classes,
    })
}

fn descriptor_human(d: &SpaceDescriptor) -> String {
    format!(
        "isolated: {}\nlimits: {}\nsequences: {}\nfree families: {}",
        d.isolated.len(),
        d.limits.len(),
        d.sequences.len(),
        d.free_families.len()
    )
}

fn dispatch(cli: &Cli) -> Result<u8, CliError> {
    match &cli.cmd {
        Cmd::Ends { file } => {
            let p = load_egp(file)?;
            let d = end_space(&p);
            emit(cli, &descriptor_json(&d, &end_classes(&p)), || {
                descriptor_human(&d)
            });
            Ok(0)
        }
        Cmd::EdgeEnds { file } => {
            let p = load_egp(file)?;
            let d = edge_end_space(&p);
            emit(cli, &descriptor_json(&d, &edge_end_classes(&p)), || {
                descriptor_human(&d)
            });
            Ok(0)
        }
        Cmd::Expand { file, out } => {
            let p = load_egp(file)?;
            let (p2, map) = expand_cliques(&p);
            std::fs::write(out, presentation::serialize(&p2))?;
            emit(
                cli,
                &json!({"replaced": map.replaced, "output": out}),
                || format!("replaced {} vertices", map.replaced.len()),
            );
            Ok(0)
        }
        Cmd::Duplicate { file, out } => {
            let p = load_egp(file)?;
            let (p2, map) = match duplicate_dominators(&p) {
                Ok(r) => r,
                Err(e @ TransformError::PreconditionViolated { .. }) => {
                    println!("{}", json!({"error": e.to_string()}));
                    return Ok(1);
                }
                Err(e) => return Err(e.into()),
            };
            std::fs::write(out, presentation::serialize(&p2))?;
            emit(
                cli,
                &json!({"split": map.split, "flags": map.flags, "output": out}),
                || format!("split {} vertices", map.split.len()),
            );
            Ok(0)
        }
        Cmd::Verify { file, rho, tau } => {
            if *rho == *tau {
                return Err(CliError::usage("verify needs exactly one of --rho/--tau"));
            }
            let p = load_egp(file)?;
            let dir = if *rho { Direction::Rho } else { Direction::Tau };
            match verify_correspondence(&p, dir) {
                Ok(report) => {
                    let pass = report.pass;
                    emit(cli, &serde_json::to_value(&report)?, || {
                        format!("{}: {}", if *rho { "rho" } else { "tau" }, if pass { "pass" } else { "FAIL" })
                    });
                    Ok(u8::from(!pass))
                }
                Err(e @ TransformError::PreconditionViolated { .. }) => {
                    println!(
                        "{}",
                        json!({"pass": false, "precondition_violated": e.to_string()})
                    );
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Envelope { file, end } => {
            let p = load_egp(file)?;
            let env = compute_envelope(&p, end)?;
            emit(cli, &serde_json::to_value(&env)?, || {
                format!(
                    "dominators: {:?}\nray family: {:?}",
                    env.dominators, env.ray_family
                )
            });
            Ok(0)
        }
        Cmd::Rayspace { file } => {
            let t = load_ots(file)?;
            let d = endgraph::ordertree::rayspace_descriptor(&t)?;
            emit(cli, &serde_json::to_value(&d)?, || descriptor_human(&d));
            Ok(0)
        }
        Cmd::Tgraph { file, out } => {
            let t = load_ots(file)?;
            let p = endgraph::ordertree::uniform_tgraph(&t)?;
            std::fs::write(out, presentation::serialize(&p))?;
            emit(cli, &json!({"output": out}), || {
                format!("wrote {}", out.display())
            });
            Ok(0)
        }
        Cmd::Surgery { file, nmap, out } => {
            let t = load_ots(file)?;
            let mut map: BTreeMap<String, BTreeSet<NodeRef>> = BTreeMap::new();
            for line in read(nmap)?.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (child, nodes) = line
                    .split_once(':')
                    .ok_or_else(|| CliError::usage(format!("nmap line {line:?}: expected `child: node …`")))?;
                let pattern = nodes
                    .split_whitespace()
                    .map(parse_node)
                    .collect::<Result<BTreeSet<NodeRef>, _>>()?;
                map.insert(child.trim().to_string(), pattern);
            }
            let t2 = endgraph::ordertree::surgery_tprime(&t, &map)?;
            std::fs::write(out, serialize_ots(&t2))?;
            let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
            for (name, text) in endgraph::ordertree::fragment_files(&t2) {
                std::fs::write(dir.join(name), text)?;
            }
            emit(cli, &json!({"output": out}), || {
                format!("wrote {}", out.display())
            });
            Ok(0)
        }
        Cmd::CheckSubbase {
            file,
            ground,
            topology,
        } => {
            let family = load_family(file, ground.as_deref(), topology.as_deref(), cli.seed)?;
            let report = check_special(&family)?;
            let completeness = match &family {
                SubbaseFamily::Finite { points, .. } if points.len() <= HC_POINT_BOUND => {
                    Some(check_hereditary_completeness(&family)?)
                }
                _ => None,
            };
            let pass = report.pass()
                && !matches!(completeness, Some(Completeness::Fail { .. }));
            emit(
                cli,
                &json!({"special": report, "completeness": completeness, "pass": pass}),
                || format!("special subbase: {}", if pass { "pass" } else { "FAIL" }),
            );
            Ok(u8::from(!pass))
        }
        Cmd::Match {
            file,
            policy,
            rounds,
        } => {
            let t = load_ots(file)?;
            let policy = parse_policy(policy, &t, *rounds)?;
            let state = run_match(&t, &policy, *rounds)?;
            emit(cli, &serde_json::to_value(&state)?, || {
                format!("{:?}", state.status)
            });
            Ok(0)
        }
        Cmd::Play { file } => play(&load_ots(file)?),
        Cmd::BuildTc {
            file,
            depth,
            ground,
        } => {
            let (tc, ctx) = if file.extension().is_some_and(|e| e == "ots") {
                build_tc_scheme(&load_ots(file)?, depth + 8, *depth)?
            } else {
                let SubbaseFamily::Finite { points, sets, .. } =
                    load_family(file, ground.as_deref(), None, cli.seed)?
                else {
                    unreachable!("non-.ots files load as finite grounds");
                };
                let ctx = SubbaseCtx::ground(points, sets);
                (build_tc_ground(&ctx, *depth)?, ctx)
            };
            let descriptor = tc_descriptor(&tc).ok();
            emit(
                cli,
                &json!({"tree": tc, "points": ctx.points, "descriptor": descriptor}),
                || tc_human(&tc),
            );
            Ok(0)
        }
        Cmd::Corpus { seed, n, suite } => run_suite(cli, *seed, *n, suite),
    }
}

fn tc_human(tc: &Tc) -> String {
    let mut out = String::new();
    for node in &tc.nodes {
        out.push_str(&format!(
            "{}: [{}, {:?}] = {:?}{}\n",
            node.id,
            node.open.u,
            node.open.f,
            node.open.members,
            if node.continuing { " …" } else { "" }
        ));
    }
    out
}

/// Loads a subbase family: an `.ots` scheme becomes the intensional node
/// family; anything else is a sets file (`id: point …` lines) over the
/// points named in the `--ground` file.
fn load_family(
    file: &Path,
    ground: Option<&Path>,
    topology: Option<&Path>,
    seed: Option<u64>,
) -> Result<SubbaseFamily, CliError> {
    if file.extension().is_some_and(|e| e == "ots") {
        return Ok(SubbaseFamily::SchemeRaySpace {
            scheme: load_ots(file)?,
            cut: seed.unwrap_or(5).min(8) as u32,
        });
    }
    let ground = ground.ok_or_else(|| {
        CliError::usage("sets files need --ground with the point names")
    })?;
    let points: BTreeSet<String> = read(ground)?
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let mut sets = BTreeMap::new();
    for line in read(file)?.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, members) = line
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("sets line {line:?}: expected `id: point …`")))?;
        let members: BTreeSet<String> =
            members.split_whitespace().map(str::to_string).collect();
        if let Some(p) = members.iter().find(|p| !points.contains(*p)) {
            return Err(CliError::usage(format!("set {id:?} names unknown point {p:?}")));
        }
        sets.insert(id.trim().to_string(), members);
    }
    let topology = match topology {
        Some(path) => Some(
            read(path)?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| l.split_whitespace().map(str::to_string).collect())
                .collect(),
        ),
        None => None,
    };
    Ok(SubbaseFamily::Finite {
        points,
        sets,
        topology,
    })
}

fn parse_policy(s: &str, t: &TreeScheme, rounds: u32) -> Result<PlayerIPolicy, CliError> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("policy {s:?}: expected kind:argument")))?;
    match kind {
        "descend" => Ok(PlayerIPolicy::Descend {
            ray: rest.to_string(),
        }),
        "random" => Ok(PlayerIPolicy::Random {
            seed: rest
                .parse()
                .map_err(|_| CliError::usage(format!("random seed {rest:?} is not a number")))?,
        }),
        "oscillate" => {
            let (target, script) = match rest.split_once(':') {
                Some((ray, script)) => (ray.to_string(), script.to_string()),
                // default target: the lexicographically first high-ray
                None => {
                    let ctx = SchemeCtx::new(t, rounds + 8);
                    let ray = ctx
                        .rays
                        .first()
                        .ok_or_else(|| CliError::usage("scheme has no high-rays"))?
                        .clone();
                    (ray, rest.to_string())
                }
            };
            if !script.chars().all(|c| c == 'd' || c == 'h') {
                return Err(CliError::usage("oscillate scripts use only 'd' and 'h'"));
            }
            Ok(PlayerIPolicy::Oscillate { target, script })
        }
        other => Err(CliError::usage(format!("unknown policy kind {other:?}"))),
    }
}

/// Line-oriented interactive match: Player II's cover is printed each round
/// with indexed parts; Player I answers `part K`, optionally refines with
/// `shrink t F…`, and `quit` triggers adjudication.
fn play(t: &TreeScheme) -> Result<u8, CliError> {
    let cut = 24;
    let ctx = SchemeCtx::new(t, cut);
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut mv = BasicOpen {
        anchor: NodeRef::Seg(ctx.scheme.root.clone(), 0),
        excluded: BTreeSet::new(),
    };
    let mut previous = None;
    let mut inter: BTreeSet<String> = ctx.rays.iter().cloned().collect();
    let mut part_anchors: Vec<NodeRef> = Vec::new();
    let mut pending: Option<String> = None;
    'rounds: loop {
        if let Err(e) = validate_move(&ctx, previous.as_ref(), &mv) {
            println!("{}", json!({"illegal": e.to_string()}));
            return Ok(1);
        }
        inter = inter.intersection(&ctx.members(&mv)).cloned().collect();
        let cover = canonical_strategy(&ctx, &mv)?;
        for (i, p) in cover.parts.iter().enumerate() {
            println!(
                "{}",
                json!({"part": i, "anchor": p.anchor.to_string(),
                       "excluded": p.excluded.iter().map(ToString::to_string).collect::<Vec<_>>(),
                       "rays": ctx.members(p)})
            );
        }
        std::io::stdout().flush().ok();
        let next = loop {
            let line = match pending.take() {
                Some(l) => l,
                None => match lines.next() {
                    Some(l) => l?,
                    None => break 'rounds,
                },
            };
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["quit"] => break 'rounds,
                ["part", k] => {
                    let Some(part) = k.parse::<usize>().ok().and_then(|k| cover.parts.get(k))
                    else {
                        println!("{}", json!({"illegal": format!("no part {k}")}));
                        continue;
                    };
                    let mut choice = part.clone();
                    // optional refinement on the following line
                    if let Some(next_line) = lines.next() {
                        let next_line = next_line?;
                        let w: Vec<&str> = next_line.split_whitespace().collect();
                        if let ["shrink", t, f @ ..] = w.as_slice() {
                            let anchor = parse_node(t)?;
                            let excluded = f
                                .iter()
                                .map(|x| parse_node(x))
                                .collect::<Result<BTreeSet<NodeRef>, _>>()?;
                            let shrunk = BasicOpen { anchor, excluded };
                            if ctx.members(&shrunk).is_subset(&ctx.members(part)) {
                                choice = shrunk;
                            } else {
                                println!("{}", json!({"illegal": "shrink escapes the chosen part"}));
                            }
                        } else {
                            pending = Some(next_line);
                        }
                    }
                    part_anchors.push(part.anchor.clone());
                    break choice;
                }
                _ => println!("{}", json!({"illegal": "expected `part K`, `shrink t F…` or `quit`"})),
            }
        };
        previous = Some(cover);
        mv = next;
    }
    // shadow-extend with a descending policy so the limit settles
    let target = inter.iter().next().cloned();
    for _ in 0..2 * cut {
        let cover = canonical_strategy(&ctx, &mv)?;
        let part = match target
            .as_ref()
            .and_then(|r| cover.parts.iter().find(|p| ctx.members(p).contains(r)))
            .or_else(|| cover.parts.iter().find(|p| !ctx.members(p).is_empty()))
        {
            Some(p) => p.clone(),
            None => break,
        };
        inter = inter.intersection(&ctx.members(&part)).cloned().collect();
        part_anchors.push(part.anchor.clone());
        mv = part;
    }
    let outcome = adjudicate_scheme(&ctx, &part_anchors, &inter);
    println!("{}", serde_json::to_string(&json!({"outcome": outcome}))?);
    Ok(0)
}

struct ItemResult {
    name: String,
    pass: bool,
    detail: String,
}

fn run_suite(cli: &Cli, seed: u64, n: usize, suite: &str) -> Result<u8, CliError> {
    let budget = cli.budget.unwrap_or(DEFAULT_ORACLE_BUDGET);
    let results: Vec<ItemResult> = match suite {
        "rho" | "tau" | "oracle" | "refine" => {
            par::map_items(corpus::presentation_corpus(seed, n), move |(name, p)| {
                presentation_item(suite_kind(suite), &name, &p, budget)
            })
        }
        "special" | "match" | "tgraph" => {
            par::map_items(corpus::scheme_corpus(seed, n), move |(name, t)| {
                scheme_item(suite_kind(suite), &name, &t)
            })
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown suite {other:?} (rho|tau|oracle|refine|special|match|tgraph)"
            )))
        }
    };
    let mut results = results;
    results.sort_by(|a, b| a.name.cmp(&b.name));
    let passed = results.iter().filter(|r| r.pass).count();
    let value = json!({
        "suite": suite,
        "total": results.len(),
        "pass": passed,
        "fail": results.len() - passed,
        "items": results.iter().map(|r| json!({
            "name": r.name, "pass": r.pass, "detail": r.detail,
        })).collect::<Vec<_>>(),
    });
    emit(cli, &value, || {
        format!("{suite}: {passed}/{} pass", results.len())
    });
    Ok(u8::from(passed != results.len()))
}

#[derive(Clone, Copy)]
enum Suite {
    Rho,
    Tau,
    Oracle,
    Refine,
    Special,
    Match,
    Tgraph,
}

fn suite_kind(s: &str) -> Suite {
    match s {
        "rho" => Suite::Rho,
        "tau" => Suite::Tau,
        "oracle" => Suite::Oracle,
        "refine" => Suite::Refine,
        "special" => Suite::Special,
        "match" => Suite::Match,
        _ => Suite::Tgraph,
    }
}

fn presentation_item(
    suite: Suite,
    name: &str,
    p: &GraphPresentation,
    budget: usize,
) -> ItemResult {
    let (pass, detail) = match suite {
        Suite::Rho => match verify_correspondence(p, Direction::Rho) {
            Ok(r) => (r.pass, r.flags.join("; ")),
            Err(e) => (false, e.to_string()),
        },
        Suite::Tau => match verify_correspondence(p, Direction::Tau) {
            Ok(r) => (r.pass, r.flags.join("; ")),
            Err(e @ TransformError::PreconditionViolated { .. }) => {
                (true, format!("precondition-violated: {e}"))
            }
            Err(e) => (false, e.to_string()),
        },
        Suite::Oracle => {
            let vertex_table = end_classes(p);
            let edge_table = edge_end_classes(p);
            let rays: Vec<&String> = p
                .generators
                .iter()
                .filter(|(_, k)| **k == presentation::GenKind::Ray)
                .map(|(g, _)| g)
                .collect();
            let mut bad = Vec::new();
            for (i, a) in rays.iter().enumerate() {
                for b in &rays[i + 1..] {
                    for (mode, table) in
                        [(Mode::Vertex, &vertex_table), (Mode::Edge, &edge_table)]
                    {
                        match oracle_equivalent(p, a, b, mode, 3, budget) {
                            Ok(v) if v == (table[*a] == table[*b]) => {}
                            Ok(_) => bad.push(format!("{a}/{b} {mode:?}")),
                            Err(e) => bad.push(format!("{a}/{b} {mode:?}: {e}")),
                        }
                    }
                }
            }
            (bad.is_empty(), bad.join("; "))
        }
        Suite::Refine => {
            let vertex_table = end_classes(p);
            let edge_table = edge_end_classes(p);
            let mut bad: Vec<String> = Vec::new();
            for (a, ca) in &vertex_table {
                for (b, cb) in &vertex_table {
                    if ca == cb && edge_table.get(a) != edge_table.get(b) {
                        bad.push(format!("{a}/{b}"));
                    }
                }
            }
            (bad.is_empty(), bad.join("; "))
        }
        _ => unreachable!("scheme suites take schemes"),
    };
    ItemResult {
        name: name.to_string(),
        pass,
        detail,
    }
}

fn scheme_item(suite: Suite, name: &str, t: &TreeScheme) -> ItemResult {
    let (pass, detail) = match suite {
        Suite::Special => match check_special(&SubbaseFamily::SchemeRaySpace {
            scheme: t.clone(),
            cut: 4,
        }) {
            Ok(r) => (r.pass(), format!("{:?}", r.layers.len())),
            Err(e) => (false, e.to_string()),
        },
        Suite::Match => {
            let ctx = SchemeCtx::new(t, 12);
            let mut policies = vec![PlayerIPolicy::Random { seed: 1 }];
            policies.extend(
                ctx.rays
                    .iter()
                    .map(|r| PlayerIPolicy::Descend { ray: r.clone() }),
            );
            let mut bad = Vec::new();
            for policy in policies {
                match run_match(t, &policy, 5) {
                    Ok(state) => match state.status {
                        MatchStatus::Adjudicated(Outcome::Capture { ref flags, .. })
                            if flags.is_empty() => {}
                        other => bad.push(format!("{policy:?}: {other:?}")),
                    },
                    Err(e) => bad.push(format!("{policy:?}: {e}")),
                }
            }
            (bad.is_empty(), bad.join("; "))
        }
        Suite::Tgraph => {
            match (
                endgraph::ordertree::rayspace_descriptor(t),
                endgraph::ordertree::uniform_tgraph(t).map(|p| end_space(&p)),
            ) {
                (Ok(d1), Ok(d2)) => (
                    homeomorphic(&d1, &d2),
                    format!("{:?} vs {:?}", d1.signature(), d2.signature()),
                ),
                (a, b) => (false, format!("{a:?} / {b:?}")),
            }
        }
        _ => unreachable!("presentation suites take presentations"),
    };
    ItemResult {
        name: name.to_string(),
        pass,
        detail,
    }
}
