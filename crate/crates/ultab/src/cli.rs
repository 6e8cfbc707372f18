//! Command-line surface. [`run`] is the whole program minus process exit.
//!
//! Exit codes: 0 success, 1 a `repro` check failed, 2 usage or input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ultab_core::bisim::{full_bisim, k_bisim, leq_k, max_bisim_level, BisimLevel};
use ultab_core::families::{boolean_sums_up_to, broken_combs_up_to, family, stack_profile};
use ultab_core::formula::{jankov_syntactic, parse};
use ultab_core::morphism::jankov_refutes;
use ultab_core::semantics::{eval, frame_validates_capped, reduce};
use ultab_core::uniformity::{
    certify_n_uniform, degree_of_class, frame_closure_capped, stack_bound_class, FrameClass, Verdict,
};
use ultab_core::{Model, Poset};

use crate::caps::Caps;
use crate::dot::{model_dot, poset_dot};
use crate::io::{model_json, parse_any, poset_json, read_source, Loaded, ModelFile, PosetFile};
use crate::repro::{self, level_value, Params, TARGETS};

#[derive(Parser, Debug)]
#[command(name = "ultab", version, about = "Finite posets, bounded bisimulation and uniform local tabularity")]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Inspect a poset (model files are read as their frame).
    Poset {
        #[arg(value_enum)]
        action: PosetAction,
        /// Poset or model file, `-` for standard input.
        #[arg(default_value = "-")]
        file: PathBuf,
        /// Graphviz Hasse diagram instead of the summary (with `show`).
        #[arg(long)]
        dot: bool,
    },
    /// Frame validity of a formula, or its truth set on a model.
    Validity {
        formula: String,
        #[arg(default_value = "-")]
        file: PathBuf,
    },
    /// Jankov formula of a rooted poset, optionally checked against a frame.
    Jankov {
        #[arg(default_value = "-")]
        file: PathBuf,
        /// Frame to test for refutation of the formula.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Full or k-bisimilarity of the roots of two models.
    Bisim {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Largest k with the roots k-bisimilar.
    Maxlevel {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 64)]
        cutoff: usize,
    },
    /// Bisimulation quotient of a model.
    Reduce {
        #[arg(default_value = "-")]
        file: PathBuf,
    },
    /// Degree of uniformity of the logic of a frame.
    Degree {
        file: Option<PathBuf>,
        #[command(flatten)]
        family: FamilyArgs,
        /// Variable bound; unbounded by default.
        #[arg(long)]
        v_max: Option<usize>,
    },
    /// Bounded n-uniformity check over a frame class.
    Certify {
        #[arg(long)]
        n: usize,
        /// Generator frames.
        files: Vec<PathBuf>,
        /// Built-in generator class instead of files.
        #[arg(long, value_enum)]
        class: Option<ClassName>,
        /// Size bound for built-in classes.
        #[arg(long, default_value_t = 6)]
        max: usize,
        /// Stack-depth bound for `stack-bound`.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        v_max: Option<usize>,
    },
    /// Print a member of a named family as a poset file.
    Family {
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        i: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        dot: bool,
    },
    /// Re-run a bounded reproduction target, or `all`.
    Repro {
        target: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        max: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PosetAction {
    Show,
    Upsets,
    Depth,
    Width,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ClassName {
    /// Boolean sums of stack depth at most 1.
    TwoUni,
    BooleanSums,
    BrokenCombs,
    /// Width <= 2, single top, stack depth <= k.
    StackBound,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
}

enum Failure {
    Usage(String),
    Check,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let caps = match Caps::from_env() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    match dispatch(&cli, &caps, out) {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn emit(out: &mut dyn Write, json: bool, value: Value, human: impl FnOnce() -> String) -> Outcome {
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
    } else {
        let text = human();
        write!(out, "{text}")?;
        if !text.ends_with('\n') {
            writeln!(out)?;
        }
    }
    Ok(())
}

fn load(file: &Path) -> Result<Loaded, Failure> {
    Ok(parse_any(&read_source(file)?)?)
}

fn load_frame(file: &Path) -> Result<Poset, Failure> {
    Ok(match load(file)? {
        Loaded::Poset(p) => p,
        Loaded::Model(m) => m.frame().clone(),
    })
}

fn load_model(file: &Path) -> Result<Model, Failure> {
    match load(file)? {
        Loaded::Model(m) => Ok(m),
        Loaded::Poset(_) => Err(Failure::Usage(format!("{}: expected a model file (with vars and colors)", file.display()))),
    }
}

fn set_names(p: &Poset, bits: u64) -> Vec<String> {
    (0..p.len()).filter(|&w| bits >> w & 1 == 1).map(|w| p.name(w).to_string()).collect()
}

fn braces(names: &[String]) -> String {
    format!("{{{}}}", names.join(","))
}

fn level_text(l: BisimLevel) -> String {
    match l {
        BisimLevel::Unrelated => "unrelated".into(),
        BisimLevel::Level(k) => k.to_string(),
        BisimLevel::Full => "full".into(),
    }
}

fn dispatch(cli: &Cli, caps: &Caps, out: &mut dyn Write) -> Outcome {
    let json = cli.json;
    match &cli.command {
        Command::Poset { action, file, dot } => poset_cmd(*action, file, *dot, json, out),
        Command::Validity { formula, file } => validity_cmd(formula, file, caps, json, out),
        Command::Jankov { file, against } => jankov_cmd(file, against.as_deref(), json, out),
        Command::Bisim { left, right, k } => bisim_cmd(left, right, *k, json, out),
        Command::Maxlevel { left, right, cutoff } => {
            let (m, n) = (load_model(left)?, load_model(right)?);
            let level = max_bisim_level(&m, &n, *cutoff)?;
            emit(out, json, json!({ "max_level": level_value(level) }), || level_text(level))
        }
        Command::Reduce { file } => {
            let (r, map) = reduce(&load_model(file)?);
            let value = json!({ "model": ModelFile::from_model(&r), "map": map });
            emit(out, json, value, || model_json(&r))
        }
        Command::Degree { file, family: fam, v_max } => {
            let p = match (file, &fam.family) {
                (Some(f), None) => load_frame(f)?,
                (None, Some(name)) => family(name, fam.n, fam.i, fam.k)?,
                _ => return Err(Failure::Usage("give either a frame file or --family".into())),
            };
            let fc = frame_closure_capped(std::slice::from_ref(&p), caps.frame_size, caps.search_nodes)?;
            let r = degree_of_class(&fc, *v_max)?;
            let value = json!({
                "degree": r.degree,
                "witness_level": r.witness.as_ref().map(|w| w.level),
                "witness": r.witness.as_ref().map(|w| json!({ "left": ModelFile::from_model(&w.left), "right": ModelFile::from_model(&w.right) })),
                "envelope": envelope_value(&r.envelope),
            });
            emit(out, json, value, || {
                format!("{}\nsearched: {}\n", r.degree, envelope_text(&r.envelope))
            })
        }
        Command::Certify { n, files, class, max, k, v_max } => {
            let gens: Vec<Poset> = match class {
                Some(c) => class_generators(*c, *max, *k)?,
                None if !files.is_empty() => files.iter().map(|f| load_frame(f)).collect::<Result<_, _>>()?,
                None => return Err(Failure::Usage("give generator files or --class".into())),
            };
            let fc = match class {
                Some(ClassName::StackBound) => stack_bound_class(*k, 2, *max)?,
                _ => frame_closure_capped(&gens, caps.frame_size, caps.search_nodes)?,
            };
            certify_cmd(&fc, *n, *v_max, json, out)
        }
        Command::Family { name, n, i, k, dot } => {
            let p = family(name, *n, *i, *k)?;
            if *dot {
                write!(out, "{}", poset_dot(&p))?;
                Ok(())
            } else {
                writeln!(out, "{}", poset_json(&p))?;
                Ok(())
            }
        }
        Command::Repro { target, n, k, max } => repro_cmd(target, Params { n: *n, k: *k, max: *max }, caps, json, out),
    }
}

fn poset_cmd(action: PosetAction, file: &Path, dot: bool, json: bool, out: &mut dyn Write) -> Outcome {
    let loaded = load(file)?;
    let p = match &loaded {
        Loaded::Poset(p) => p.clone(),
        Loaded::Model(m) => m.frame().clone(),
    };
    match action {
        PosetAction::Show if dot => {
            let text = match &loaded {
                Loaded::Model(m) => model_dot(m),
                Loaded::Poset(p) => poset_dot(p),
            };
            write!(out, "{text}")?;
            Ok(())
        }
        PosetAction::Show => {
            let ups = p.all_upsets(ultab_core::poset::DEFAULT_UPSET_CAP)?.len();
            let value = json!({
                "poset": PosetFile::from_poset(&p),
                "size": p.len(),
                "depth": p.depth(),
                "width": p.width(),
                "upsets": ups,
            });
            emit(out, json, value, || {
                let covers: Vec<String> = p.covers().iter().map(|&(a, b)| format!("{} < {}", p.name(a), p.name(b))).collect();
                format!(
                    "worlds: {}\nroot: {}\ncovers: {}\ndepth: {}\nwidth: {}\nupsets: {}\n",
                    p.names().join(" "),
                    p.root().map_or("none", |r| p.name(r)),
                    covers.join(", "),
                    p.depth(),
                    p.width(),
                    ups
                )
            })
        }
        PosetAction::Upsets => {
            let ups = p.all_upsets(ultab_core::poset::DEFAULT_UPSET_CAP)?;
            let sets: Vec<Vec<String>> = ups.iter().map(|u| set_names(&p, u.bits())).collect();
            emit(out, json, json!(sets), || sets.iter().map(|s| braces(s) + "\n").collect())
        }
        PosetAction::Depth => emit(out, json, json!(p.depth()), || p.depth().to_string()),
        PosetAction::Width => emit(out, json, json!(p.width()), || p.width().to_string()),
    }
}

fn validity_cmd(formula: &str, file: &Path, caps: &Caps, json: bool, out: &mut dyn Write) -> Outcome {
    let f = parse(formula)?;
    match load(file)? {
        Loaded::Model(m) => {
            let set = eval(&m, &f)?.bits();
            let at_root = set >> m.root() & 1 == 1;
            let names = set_names(m.frame(), set);
            emit(out, json, json!({ "formula": f.to_string(), "true_at": names, "root": at_root }), || {
                format!("true at: {}\nroot: {at_root}\n", braces(&names))
            })
        }
        Loaded::Poset(p) => {
            let v = frame_validates_capped(&p, &f, caps.valuations)?;
            let counter: Option<Vec<(String, Vec<String>)>> = v
                .counter
                .as_ref()
                .map(|c| c.assignments.iter().map(|(var, u)| (var.clone(), set_names(&p, u.bits()))).collect());
            let value = json!({ "formula": f.to_string(), "valid": v.valid, "counter": counter.as_ref().map(|c| c.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>()) });
            emit(out, json, value, || match &counter {
                None => "valid\n".into(),
                Some(c) => {
                    let mut s = String::from("refuted by\n");
                    for (var, set) in c {
                        s += &format!("  {var} = {}\n", braces(set));
                    }
                    s
                }
            })
        }
    }
}

fn jankov_cmd(file: &Path, against: Option<&Path>, json: bool, out: &mut dyn Write) -> Outcome {
    let q = load_frame(file)?;
    let f = jankov_syntactic(&q)?;
    let Some(against) = against else {
        return emit(out, json, json!({ "formula": f.to_string() }), || f.to_string());
    };
    let p = load_frame(against)?;
    let w = jankov_refutes(&p, &q)?;
    let value = json!({
        "formula": f.to_string(),
        "refuted": w.is_some(),
        "witness": w.as_ref().map(|w| json!({
            "point": p.name(w.point),
            "map": w.worlds.iter().zip(&w.map).map(|(&a, &b)| (p.name(a).to_string(), json!(q.name(b)))).collect::<serde_json::Map<_, _>>(),
        })),
    });
    emit(out, json, value, || match &w {
        None => "validated\n".into(),
        Some(w) => {
            let pairs: Vec<String> = w.worlds.iter().zip(&w.map).map(|(&a, &b)| format!("{} -> {}", p.name(a), q.name(b))).collect();
            format!("refuted at {}: {}\n", p.name(w.point), pairs.join(", "))
        }
    })
}

fn bisim_cmd(left: &Path, right: &Path, k: Option<usize>, json: bool, out: &mut dyn Write) -> Outcome {
    let (m, n) = (load_model(left)?, load_model(right)?);
    match k {
        None => {
            let rel = full_bisim(&m, &n)?;
            let pairs: Option<Vec<(String, String)>> = rel.as_ref().map(|r| {
                let mut v = Vec::new();
                for (x, row) in r.iter().enumerate() {
                    for y in 0..n.len() {
                        if row >> y & 1 == 1 {
                            v.push((m.frame().name(x).to_string(), n.frame().name(y).to_string()));
                        }
                    }
                }
                v
            });
            emit(out, json, json!({ "bisimilar": rel.is_some(), "relation": pairs }), || match &pairs {
                None => "not bisimilar\n".into(),
                Some(p) => format!("bisimilar\n{}\n", p.iter().map(|(a, b)| format!("{a} ~ {b}")).collect::<Vec<_>>().join("\n")),
            })
        }
        Some(k) => {
            let yes = k_bisim(&m, &n, k)?.is_some();
            let (lr, rl) = (leq_k(&m, &n, k)?, leq_k(&n, &m, k)?);
            emit(out, json, json!({ "k": k, "k_bisimilar": yes, "left_leq_right": lr, "right_leq_left": rl }), || {
                format!("{k}-bisimilar: {yes}\nleft <=_{k} right: {lr}\nright <=_{k} left: {rl}\n")
            })
        }
    }
}

fn class_generators(c: ClassName, max: usize, k: usize) -> Result<Vec<Poset>, Failure> {
    Ok(match c {
        ClassName::TwoUni => boolean_sums_up_to(max).into_iter().filter(|p| stack_profile(p).stack_depth <= 1).collect(),
        ClassName::BooleanSums => boolean_sums_up_to(max),
        ClassName::BrokenCombs => broken_combs_up_to(max)?,
        ClassName::StackBound => stack_bound_class(k, 2, max)?.generators,
    })
}

fn envelope_value(e: &ultab_core::uniformity::Envelope) -> Value {
    json!({ "frames": e.frames, "max_frame_size": e.max_frame_size, "v_max": e.v_max, "colorings": e.colorings, "nodes": e.nodes })
}

fn envelope_text(e: &ultab_core::uniformity::Envelope) -> String {
    let v = e.v_max.map_or("unbounded".to_string(), |v| v.to_string());
    format!(
        "{} frames up to {} points, variables {v}, {} colorings, {} search nodes",
        e.frames, e.max_frame_size, e.colorings, e.nodes
    )
}

fn certify_cmd(fc: &FrameClass, n: usize, v_max: Option<usize>, json: bool, out: &mut dyn Write) -> Outcome {
    let r = certify_n_uniform(fc, n, v_max)?;
    let value = match &r.verdict {
        Verdict::Certified(n) => json!({ "certified": n, "envelope": envelope_value(&r.envelope) }),
        Verdict::Refuted(w) => json!({
            "refuted": n,
            "level": w.level,
            "left": ModelFile::from_model(&w.left),
            "right": ModelFile::from_model(&w.right),
            "envelope": envelope_value(&r.envelope),
        }),
    };
    emit(out, json, value, || match &r.verdict {
        Verdict::Certified(n) => format!("certified {n}-uniform (bounded)\nsearched: {}\n", envelope_text(&r.envelope)),
        Verdict::Refuted(w) => format!(
            "refuted: roots are {}-bisimilar but not bisimilar\nleft:\n{}\nright:\n{}\nsearched: {}\n",
            w.level,
            model_json(&w.left),
            model_json(&w.right),
            envelope_text(&r.envelope)
        ),
    })
}

fn repro_cmd(target: &str, params: Params, caps: &Caps, json: bool, out: &mut dyn Write) -> Outcome {
    let ids: Vec<&str> = if target == "all" { TARGETS.iter().map(|t| t.id).collect() } else { vec![target] };
    if target != "all" && repro::target(target).is_none() {
        let known: Vec<&str> = TARGETS.iter().map(|t| t.id).collect();
        return Err(Failure::Usage(format!("unknown repro target `{target}` (known: {}, all)", known.join(", "))));
    }
    let mut outcomes = Vec::new();
    for id in ids {
        let o = repro::run(id, &params, caps)?;
        if !json {
            writeln!(
                out,
                "{} {} [criterion {}] {} ({} ms)",
                if o.pass { "PASS" } else { "FAIL" },
                o.target,
                o.criterion,
                o.summary,
                o.elapsed_ms
            )?;
            if !o.pass {
                writeln!(out, "  evidence: {}", serde_json::to_string(&o.evidence)?)?;
            }
        }
        outcomes.push(o);
    }
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&outcomes)?)?;
    }
    if outcomes.iter().all(|o| o.pass) {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}
