//! Command-line front end for robust satisfiability checks, the reduction chain and the
//! semigroup constructions.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use robustcsp::flex::{first_rigid_assignment, frozen_report, power_embedding, PowerEmbedding};
use robustcsp::format;
use robustcsp::pipeline::{self, ChainOptions, Stage, VerifyOptions};
use robustcsp::semigroup::{
    self, build_s_i, build_t_mod_u, check_identity, eulerian_law, graph_algebra, green, isomorphic, parse_identity,
    satisfies_lds, FiniteGroupoid, FiniteSemigroup,
};
use robustcsp::{builtin, Error, FiniteStructure, RelationRef, Solver};

const DEFAULT_GUARD: usize = 1 << 20;

#[derive(Debug, Parser)]
#[command(name = "robustcsp", version, about = "Flexible satisfiability, reduction chains and finite semigroups")]
struct Cli {
    /// Seed for randomized generators; every current command is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Resource limit on enumerated objects.
    #[arg(long, global = true, env = "ROBUSTCSP_GUARD", default_value_t = DEFAULT_GUARD)]
    guard: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Robustness and frozen-relation checks.
    #[command(subcommand)]
    Check(CheckCommand),
    /// The reduction chain.
    #[command(subcommand)]
    Pipeline(PipelineCommand),
    /// Semigroup constructions and tests.
    #[command(subcommand)]
    Semigroup(SemigroupCommand),
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Builtin name (K3, C3, D3, TWO) or structure file.
    #[arg(long)]
    template: String,
    /// Structure, DIMACS edge or 1-in-3 file.
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
}

#[derive(Debug, Subcommand)]
enum CheckCommand {
    /// Whether every locally compatible partial assignment on at most k elements extends.
    Robust {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        io: InstanceArgs,
    },
    /// Tuples outside a relation that every or no homomorphism places inside it.
    Frozen {
        /// Relation symbol, or `eq` for equality.
        #[arg(long)]
        relation: String,
        #[command(flatten)]
        io: InstanceArgs,
    },
    /// Membership in the universal Horn class of the template.
    Uhc {
        #[command(flatten)]
        io: InstanceArgs,
    },
}

#[derive(Debug, Subcommand)]
enum PipelineCommand {
    Run {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// Comma-separated prefix of amplify,split,graph,1in3,semigroup.
        #[arg(long)]
        stages: Option<String>,
        /// Start at the graph stage.
        #[arg(long)]
        skip_amplification: bool,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    Verify {
        run: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum SemigroupCommand {
    BuildSi {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    Tmodu {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    Iso {
        first: String,
        second: String,
    },
    Green {
        semigroup: String,
    },
    /// Identity in word syntax, e.g. `xyx=x`; single-letter element names act as constants.
    CheckId {
        semigroup: String,
        identity: String,
    },
    Lds {
        semigroup: String,
    },
    GraphAlgebra {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

/// What a command found: `verdict` drives the exit code when present.
struct Outcome {
    verdict: Option<bool>,
    text: String,
    json: Value,
}

impl Outcome {
    fn report(text: String, json: Value) -> Self {
        Outcome { verdict: None, text, json }
    }

    fn verdict(ok: bool, text: String, json: Value) -> Self {
        Outcome { verdict: Some(ok), text, json }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.root() {
                Error::Guard { .. } => 3,
                Error::Unsatisfiable => 1,
                _ => 2,
            },
            CliError::Io(..) => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_template(spec: &str) -> CliResult<FiniteStructure> {
    match builtin(spec) {
        Ok(s) => Ok(s),
        Err(_) => Ok(format::read_structure(&read(Path::new(spec))?)?),
    }
}

fn load_instance(path: &Path) -> CliResult<FiniteStructure> {
    let text = read(path)?;
    let is_one_in_three = text.lines().any(|l| l.split_whitespace().take(2).eq(["p", "1in3"]));
    if is_one_in_three {
        Ok(format::read_one_in_three(&text)?.to_structure())
    } else {
        Ok(format::read_structure(&text)?)
    }
}

fn load_semigroup(spec: &str) -> CliResult<FiniteSemigroup> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Ok(s) = semigroup::builtin_semigroup(spec) {
            return Ok(s);
        }
    }
    Ok(format::read_semigroup(&read(path)?)?)
}

fn load_groupoid(spec: &str) -> CliResult<FiniteGroupoid> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Ok(s) = semigroup::builtin_semigroup(spec) {
            return Ok(s.into_groupoid());
        }
    }
    Ok(format::read_groupoid(&read(path)?)?)
}

fn one_based(tuple: &[usize]) -> Vec<usize> {
    tuple.iter().map(|x| x + 1).collect()
}

fn render_tuples(tuples: &[Vec<usize>]) -> String {
    let parts: Vec<String> = tuples.iter().map(|t| format!("({})", one_based(t).iter().map(usize::to_string).collect::<Vec<_>>().join(" "))).collect();
    if parts.is_empty() { "none".into() } else { parts.join(" ") }
}

/// Partial assignments on at most `k` of `n` elements with `m` values.
fn partial_assignments(n: usize, m: usize, k: usize) -> u128 {
    let mut total = 0u128;
    let mut choose = 1u128;
    for i in 0..=k.min(n) {
        if i > 0 {
            choose = choose * (n - i + 1) as u128 / i as u128;
        }
        total = total.saturating_add(choose.saturating_mul((m as u128).saturating_pow(i as u32)));
    }
    total
}

fn guard_homs(instance: &FiniteStructure, template: &FiniteStructure, guard: usize) -> CliResult<()> {
    if Solver::new(instance, template)?.all_up_to(guard).is_none() {
        return Err(Error::guard("homomorphisms", guard).into());
    }
    Ok(())
}

fn check(cmd: CheckCommand, guard: usize) -> CliResult<Outcome> {
    match cmd {
        CheckCommand::Robust { k, io } => {
            let (instance, template) = (load_instance(&io.input)?, load_template(&io.template)?);
            if partial_assignments(instance.domain_size(), template.domain_size(), k) > guard as u128 {
                return Err(Error::guard("partial assignments", guard).into());
            }
            let rigid = first_rigid_assignment(&instance, &template, k)?;
            let witness: Option<Vec<[usize; 2]>> = rigid.map(|p| p.iter().map(|(b, v)| [b + 1, v + 1]).collect());
            let text = match &witness {
                None => "true".to_string(),
                Some(w) => {
                    let pins: Vec<String> = w.iter().map(|[b, v]| format!("{b}->{v}")).collect();
                    format!("false\nrigid: {}", if pins.is_empty() { "(empty)".into() } else { pins.join(" ") })
                }
            };
            Ok(Outcome::verdict(witness.is_none(), text, json!({ "k": k, "robust": witness.is_none(), "witness": witness })))
        }
        CheckCommand::Frozen { relation, io } => {
            let (instance, template) = (load_instance(&io.input)?, load_template(&io.template)?);
            guard_homs(&instance, &template, guard)?;
            let report = frozen_report(&instance, &template, &RelationRef::parse(&relation))?;
            let text = format!(
                "relation {}\nsatisfiable {}\nfrozen-in {}\nfrozen-out {}",
                report.relation,
                report.satisfiable,
                render_tuples(&report.frozen_in),
                render_tuples(&report.frozen_out)
            );
            let json = json!({
                "relation": report.relation.to_string(),
                "satisfiable": report.satisfiable,
                "frozen_in": report.frozen_in.iter().map(|t| one_based(t)).collect::<Vec<_>>(),
                "frozen_out": report.frozen_out.iter().map(|t| one_based(t)).collect::<Vec<_>>(),
            });
            Ok(Outcome::report(text, json))
        }
        CheckCommand::Uhc { io } => {
            let (instance, template) = (load_instance(&io.input)?, load_template(&io.template)?);
            guard_homs(&instance, &template, guard)?;
            let embedding = power_embedding(&instance, &template, &RelationRef::full_set(&instance))?;
            let (member, why) = match &embedding {
                PowerEmbedding::Present { exponent, .. } => (true, json!({ "exponent": exponent })),
                PowerEmbedding::Absent { relation, tuple } => {
                    (false, json!({ "relation": relation.to_string(), "frozen_in": one_based(tuple) }))
                }
                PowerEmbedding::Unsatisfiable => (false, json!({ "unsatisfiable": true })),
            };
            let text = match &embedding {
                PowerEmbedding::Present { exponent, .. } => format!("true\nembeds in power {exponent}"),
                PowerEmbedding::Absent { relation, tuple } => {
                    format!("false\n{relation} frozen-in at {}", render_tuples(std::slice::from_ref(tuple)))
                }
                PowerEmbedding::Unsatisfiable => "false\nunsatisfiable".into(),
            };
            Ok(Outcome::verdict(member, text, json!({ "member": member, "witness": why })))
        }
    }
}

fn run_pipeline(cmd: PipelineCommand, guard: usize) -> CliResult<Outcome> {
    match cmd {
        PipelineCommand::Run { input, k, stages, skip_amplification, output } => {
            let inst = pipeline::PipelineRun::normalize_input(format::read_nae(&read(&input)?)?)?;
            let stages = stages.map(|s| Stage::parse_list(&s)).transpose()?.unwrap_or_default();
            let options = ChainOptions { k, skip_amplification, stages, ..ChainOptions::default() };
            let run = pipeline::run_chain(&inst, &options)?;
            pipeline::save_run(&run, &output)?;
            let mut sizes = Vec::new();
            if let Some(a) = &run.amplified {
                sizes.push(("amplify", json!({ "variables": a.instance().variable_count(), "clauses": a.instance().clauses().len() })));
            }
            if let Some(s) = &run.split {
                sizes.push(("split", json!({ "variables": s.instance().variable_count(), "clauses": s.instance().clauses().len() })));
            }
            if let Some(g) = &run.graph {
                sizes.push(("graph", json!({ "vertices": g.vertex_count(), "edges": g.edge_count() })));
            }
            if let Some(i) = &run.one_in_three {
                sizes.push(("1in3", json!({ "variables": i.variable_count(), "clauses": i.clauses().len() })));
            }
            if let Some(s) = &run.semigroup {
                sizes.push(("semigroup", json!({ "elements": s.len() })));
            }
            let text = sizes
                .iter()
                .map(|(stage, v)| {
                    let fields: Vec<String> = v.as_object().expect("object").iter().map(|(k, v)| format!("{k} {v}")).collect();
                    format!("{stage}: {}", fields.join(", "))
                })
                .collect::<Vec<_>>()
                .join("\n");
            let json = Value::Object(sizes.into_iter().map(|(s, v)| (s.to_string(), v)).collect());
            Ok(Outcome::report(text, json))
        }
        PipelineCommand::Verify { run, report } => {
            let loaded = pipeline::load_run(&run)?;
            let options = VerifyOptions { guard, ..VerifyOptions::default() };
            let result = pipeline::verify_chain(&loaded, &options);
            let json = serde_json::to_value(&result).expect("report serializes");
            if let Some(path) = report {
                write(&path, &(serde_json::to_string_pretty(&json).expect("report serializes") + "\n"))?;
            }
            let text = result
                .rows
                .iter()
                .map(|r| {
                    let w = r.witness.as_deref().map(|w| format!("  {w}")).unwrap_or_default();
                    format!("{:<9} {:<10} {:<28}{w}", r.status.to_string(), r.stage, r.check)
                })
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Outcome::verdict(!result.failed(), text, json))
        }
    }
}

fn write_or_report(g: &FiniteGroupoid, output: Option<PathBuf>, summary: String) -> CliResult<Outcome> {
    let table = format::write_groupoid(g);
    let json: Value = serde_json::from_str(&table).expect("writer emits JSON");
    match output {
        Some(path) => {
            write(&path, &table)?;
            Ok(Outcome::report(summary, json))
        }
        None => Ok(Outcome::report(format!("{summary}\n{}", table.trim_end()), json)),
    }
}

fn names(s: &FiniteGroupoid, xs: &[usize]) -> Vec<String> {
    xs.iter().map(|&x| s.name(x).to_string()).collect()
}

fn semigroup_cmd(cmd: SemigroupCommand, guard: usize) -> CliResult<Outcome> {
    let element_limit = semigroup::DEFAULT_ELEMENT_LIMIT.min(guard);
    match cmd {
        SemigroupCommand::BuildSi { input, output } => {
            let inst = format::read_one_in_three(&read(&input)?)?;
            let si = build_s_i(&inst, element_limit)?;
            let summary = format!("{} elements", si.semigroup.len());
            write_or_report(&si.semigroup, output, summary)
        }
        SemigroupCommand::Tmodu { input, output } => {
            let inst = format::read_one_in_three(&read(&input)?)?;
            let tu = build_t_mod_u(&inst, guard, element_limit)?;
            let summary = format!("{} elements over {} solutions", tu.semigroup.len(), tu.homs.len());
            write_or_report(&tu.semigroup, output, summary)
        }
        SemigroupCommand::Iso { first, second } => {
            let (s, t) = (load_semigroup(&first)?, load_semigroup(&second)?);
            let map = isomorphic(&s, &t);
            let pairs: Option<Vec<[String; 2]>> =
                map.map(|m| m.iter().enumerate().map(|(x, &y)| [s.name(x).to_string(), t.name(y).to_string()]).collect());
            let text = match &pairs {
                Some(p) => format!("true\n{}", p.iter().map(|[a, b]| format!("{a} -> {b}")).collect::<Vec<_>>().join("\n")),
                None => "false".into(),
            };
            Ok(Outcome::verdict(pairs.is_some(), text, json!({ "isomorphic": pairs.is_some(), "map": pairs })))
        }
        SemigroupCommand::Green { semigroup } => {
            let s = load_semigroup(&semigroup)?;
            let g = green(&s, element_limit)?;
            let classes = |cs: Vec<Vec<usize>>| -> Vec<Vec<String>> { cs.iter().map(|c| names(&s, c)).collect() };
            let json = json!({
                "L": classes(g.l_classes()),
                "R": classes(g.r_classes()),
                "H": classes(g.h_classes()),
                "J": classes(g.j_classes()),
                "h_trivial": g.is_h_trivial(),
            });
            let render = |cs: Vec<Vec<usize>>| cs.iter().map(|c| format!("{{{}}}", names(&s, c).join(", "))).collect::<Vec<_>>().join(" ");
            let text = format!(
                "L {}\nR {}\nH {}\nJ {}\nH-trivial {}",
                render(g.l_classes()),
                render(g.r_classes()),
                render(g.h_classes()),
                render(g.j_classes()),
                g.is_h_trivial()
            );
            Ok(Outcome::report(text, json))
        }
        SemigroupCommand::CheckId { semigroup, identity } => {
            let s = load_groupoid(&semigroup)?;
            let (u, v) = parse_identity(&identity, &s)?;
            let counter = check_identity(&s, &u, &v, guard)?;
            let witness: Option<Vec<[String; 2]>> =
                counter.map(|c| c.into_iter().map(|(var, x)| [var, s.name(x).to_string()]).collect());
            let text = match &witness {
                None => "true".into(),
                Some(w) => format!("false\n{}", w.iter().map(|[a, b]| format!("{a} = {b}")).collect::<Vec<_>>().join(", ")),
            };
            Ok(Outcome::verdict(witness.is_none(), text, json!({ "holds": witness.is_none(), "counterexample": witness })))
        }
        SemigroupCommand::Lds { semigroup } => {
            let s = load_semigroup(&semigroup)?;
            let counter = satisfies_lds(&s, guard)?;
            let witness = counter.map(|c| {
                json!({ "x": s.name(c.x), "y1": s.name(c.y1), "z": s.name(c.z), "y2": s.name(c.y2) })
            });
            let text = match &witness {
                None => "true".into(),
                Some(w) => format!("false\n{w}"),
            };
            Ok(Outcome::verdict(witness.is_none(), text, json!({ "holds": witness.is_none(), "counterexample": witness })))
        }
        SemigroupCommand::GraphAlgebra { input, output } => {
            let graph = format::read_graph(&read(&input)?)?;
            let algebra = graph_algebra(&graph)?;
            let law = eulerian_law(&graph).ok();
            let summary = match &law {
                Some(l) => format!("{} elements\nlaw {} = {}", algebra.len(), l.word, l.square),
                None => format!("{} elements\nlaw undefined: graph is disconnected or has no edges", algebra.len()),
            };
            let mut out = write_or_report(&algebra, output, summary)?;
            if let Some(l) = law {
                out.json = json!({ "algebra": out.json, "law": format!("{} = {}", l.word, l.square) });
            }
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(c) => check(c, cli.guard),
        Command::Pipeline(c) => run_pipeline(c, cli.guard),
        Command::Semigroup(c) => semigroup_cmd(c, cli.guard),
    };
    match result {
        Ok(outcome) => {
            match cli.format {
                OutputFormat::Text => println!("{}", outcome.text),
                OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&outcome.json).expect("values serialize")),
            }
            ExitCode::from(if outcome.verdict == Some(false) { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
