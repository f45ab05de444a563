use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gtl::datagen::{self, SwarmScenario};
use gtl::io::{self, IoError};
use gtl::par;
use gtl_core::automata::to_dfa_with_limit;
use gtl_core::classify::{infer_classifier_with, ClassifierConfig, PsoConfig};
use gtl_core::eval::{misclassification_rate, sat_table, LabeledSet};
use gtl_core::formula::{parse, ParameterBox};
use gtl_core::graph::NodeId;
use gtl_core::identify::{identify_with, IdentifyConfig, Identification};
use gtl_core::prob::{compute_ig, InfoGainReport, PriorModel};
use gtl_core::templates::{self, DataStats, Template};
use gtl_core::{LabeledGraph, Trajectory};
use serde_json::{json, Map, Value};

#[derive(Parser, Debug)]
#[command(name = "gtl", version, about = "Graph temporal logic inference toolkit")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, global = true, default_value = "json")]
    format: Format,
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Random seed.
    #[arg(long, global = true, env = "GTL_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Library {
    TypeI,
    TypeII,
    All,
    /// Both families with both threshold directions.
    Classify,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a formula on trajectories.
    Eval(EvalArgs),
    /// Build the automaton of a formula.
    Dfa(DfaArgs),
    /// Information gain of a formula under a prior.
    Ig(IgArgs),
    /// Identify the most informative formula from templates.
    Identify(IdentifyArgs),
    /// Infer a formula separating labeled trajectories.
    Classify(ClassifyArgs),
    /// Generate synthetic data.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args, Debug)]
struct Inputs {
    /// Graph file, overriding graphs referenced by the inputs.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    trajectories: PathBuf,
    #[arg(long)]
    formula: String,
    /// Report only this node.
    #[arg(long)]
    node: Option<String>,
    /// Report the satisfaction of every node.
    #[arg(long)]
    per_node: bool,
    #[command(flatten)]
    io: Inputs,
}

#[derive(Args, Debug)]
struct DfaArgs {
    #[arg(long)]
    formula: String,
    /// Horizon.
    #[arg(long = "L", alias = "len")]
    len: usize,
    /// Print Graphviz DOT instead of a report.
    #[arg(long)]
    dot: bool,
    #[arg(long, default_value_t = gtl_core::automata::DEFAULT_STATE_LIMIT)]
    state_limit: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IgArgs {
    #[arg(long)]
    prior: PathBuf,
    #[arg(long)]
    formula: String,
    /// Comma-separated node subset.
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<String>,
    #[command(flatten)]
    io: Inputs,
}

#[derive(Args, Debug)]
struct TemplateArgs {
    /// Template file (one object or an array).
    #[arg(long, conflicts_with = "library")]
    templates: Option<PathBuf>,
    /// Built-in template library, used when no template file is given.
    #[arg(long, value_enum)]
    library: Option<Library>,
}

#[derive(Args, Debug)]
struct IdentifyArgs {
    #[arg(long)]
    trajectories: PathBuf,
    #[arg(long)]
    prior: PathBuf,
    #[command(flatten)]
    templates: TemplateArgs,
    #[arg(long, default_value_t = gtl_core::identify::DEFAULT_P_TH)]
    pth: f64,
    #[arg(long, default_value_t = gtl_core::identify::DEFAULT_EPSILON)]
    eps: f64,
    #[arg(long, default_value_t = gtl_core::identify::DEFAULT_BUDGET)]
    budget: usize,
    /// Leave the full query log out of the report.
    #[arg(long)]
    no_query_log: bool,
    #[command(flatten)]
    io: Inputs,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    trajectories: PathBuf,
    #[command(flatten)]
    templates: TemplateArgs,
    #[arg(long, default_value_t = gtl_core::classify::DEFAULT_M_TH)]
    mth: f64,
    #[arg(long, default_value_t = gtl_core::classify::DEFAULT_ETA_TH)]
    eta: usize,
    #[arg(long, default_value_t = gtl_core::classify::DEFAULT_M_HAT)]
    mhat: f64,
    #[arg(long, default_value_t = 40)]
    swarm: usize,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    /// Reuse first-stage parameters in combinations instead of re-optimizing them.
    #[arg(long)]
    frozen: bool,
    /// Leave negated templates out of the pool.
    #[arg(long)]
    no_negations: bool,
    /// Labeled held-out set to report the misclassification rate on.
    #[arg(long)]
    validate: Option<PathBuf>,
    #[command(flatten)]
    io: Inputs,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Density trajectories of a swarm obeying the crowding constraint.
    Swarm(SwarmArgs),
    /// Two-class set planted around a separating formula.
    Planted(PlantedArgs),
    /// Independent draws from a prior.
    PriorSample(PriorSampleArgs),
}

#[derive(Args, Debug)]
struct SwarmArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long = "L", alias = "len", default_value_t = 12)]
    len: usize,
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    cols: usize,
    #[arg(long, default_value_t = 0.5)]
    concentration: f64,
    #[arg(long, default_value_t = 0.5)]
    smoothing: f64,
    /// Also write a histogram prior of unconstrained proposals here.
    #[arg(long)]
    prior_out: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    prior_samples: usize,
    #[arg(long, default_value_t = 18)]
    bins: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlantedArgs {
    #[arg(long)]
    formula: String,
    #[arg(long)]
    prior: PathBuf,
    #[arg(long, default_value_t = 5)]
    npos: usize,
    #[arg(long, default_value_t = 5)]
    nneg: usize,
    #[command(flatten)]
    io: Inputs,
}

#[derive(Args, Debug)]
struct PriorSampleArgs {
    #[arg(long)]
    prior: PathBuf,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    io: Inputs,
}

/// Error category, mapped to the exit code and the `code` field of JSON errors.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Infeasible(Value),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.into())
    }
}

impl From<gtl_core::Error> for Failure {
    fn from(e: gtl_core::Error) -> Self {
        Failure::Input(e.into())
    }
}

impl From<datagen::GenError> for Failure {
    fn from(e: datagen::GenError) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<Value, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let started = Instant::now();
    let format = cli.format;
    let workers = cli.workers;
    let outcome = par::with_workers(workers, || run(&cli));
    let elapsed = started.elapsed().as_secs_f64() * 1000.0;
    match outcome {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some((report, out))) => {
            let report = envelope(&cli, report, elapsed);
            match emit(&report, out.as_deref(), format) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(format, "input", &format!("{e:#}"), 1),
            }
        }
        Err(Failure::Input(e)) => fail(format, "input", &format!("{e:#}"), 1),
        Err(Failure::Infeasible(report)) => {
            let report = envelope(&cli, report, elapsed);
            let out = output_path(&cli.command);
            if let Err(e) = emit(&report, out.as_deref(), format) {
                return fail(format, "input", &format!("{e:#}"), 1);
            }
            fail(format, "infeasible", "no candidate satisfies the constraints", 2)
        }
    }
}

fn fail(format: Format, code: &str, message: &str, exit: u8) -> ExitCode {
    match format {
        Format::Json => eprintln!("{}", json!({"error": {"code": code, "message": message}})),
        Format::Text => eprintln!("error ({code}): {message}"),
    }
    ExitCode::from(exit)
}

fn output_path(c: &Command) -> Option<PathBuf> {
    match c {
        Command::Eval(a) => a.io.out.clone(),
        Command::Dfa(a) => a.out.clone(),
        Command::Ig(a) => a.io.out.clone(),
        Command::Identify(a) => a.io.out.clone(),
        Command::Classify(a) => a.io.out.clone(),
        Command::Gen(_) => None,
    }
}

fn envelope(cli: &Cli, result: Value, elapsed_ms: f64) -> Value {
    json!({
        "tool": "gtl",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&cli.command),
        "config": {
            "seed": cli.seed,
            "workers": cli.workers,
            "arguments": format!("{:?}", cli.command),
        },
        "timings": {"total_ms": elapsed_ms},
        "result": result,
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eval(_) => "eval",
        Command::Dfa(_) => "dfa",
        Command::Ig(_) => "ig",
        Command::Identify(_) => "identify",
        Command::Classify(_) => "classify",
        Command::Gen(GenCommand::Swarm(_)) => "gen swarm",
        Command::Gen(GenCommand::Planted(_)) => "gen planted",
        Command::Gen(GenCommand::PriorSample(_)) => "gen prior-sample",
    }
}

fn emit(report: &Value, out: Option<&Path>, format: Format) -> anyhow::Result<()> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(report)? + "\n",
        Format::Text => {
            let mut s = String::new();
            render(report, 0, &mut s);
            s
        }
    };
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write `{}`", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Indented `key: value` rendering of a JSON value.
fn render(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if x.is_object() || (x.is_array() && !is_flat(x)) {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render(x, depth + 1, out);
                } else {
                    out.push_str(&format!("{pad}{k}: {}\n", inline(x)));
                }
            }
        }
        Value::Array(a) if !is_flat(v) => {
            for (i, x) in a.iter().enumerate() {
                out.push_str(&format!("{pad}- [{i}]\n"));
                render(x, depth + 1, out);
            }
        }
        x => out.push_str(&format!("{pad}{}\n", inline(x))),
    }
}

fn is_flat(v: &Value) -> bool {
    v.as_array()
        .is_some_and(|a| a.iter().all(|x| !x.is_object() && !x.is_array()))
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        x => x.to_string(),
    }
}

type Run = Result<Option<(Value, Option<PathBuf>)>, Failure>;

fn run(cli: &Cli) -> Run {
    let with_out = |r: Outcome, out: &Option<PathBuf>| r.map(|v| Some((v, out.clone())));
    match &cli.command {
        Command::Eval(a) => with_out(eval(a), &a.io.out),
        Command::Dfa(a) => dfa(a),
        Command::Ig(a) => with_out(ig(a), &a.io.out),
        Command::Identify(a) => with_out(identify(a), &a.io.out),
        Command::Classify(a) => with_out(classify(a, cli.seed), &a.io.out),
        Command::Gen(g) => generate(g, cli.seed).map(|()| None),
    }
}

fn load_graph(p: &Option<PathBuf>) -> anyhow::Result<Option<Arc<LabeledGraph>>> {
    Ok(match p {
        Some(p) => Some(Arc::new(io::load_graph(p)?)),
        None => None,
    })
}

fn node_id(g: &LabeledGraph, name: &str) -> anyhow::Result<NodeId> {
    g.node(name).ok_or_else(|| anyhow!("unknown node `{name}`"))
}

fn eval(a: &EvalArgs) -> Outcome {
    let graph = load_graph(&a.io.graph)?;
    let items = io::load_trajectories(&a.trajectories, graph)?;
    if items.is_empty() {
        return Err(anyhow!("no trajectories in `{}`", a.trajectories.display()).into());
    }
    let f = parse(&a.formula)?;
    let g = items[0].0.graph_arc().clone();
    let only = a.node.as_deref().map(|n| node_id(&g, n)).transpose()?;
    let mut rows = Vec::new();
    for (i, (t, label)) in items.iter().enumerate() {
        let table = sat_table(t, &f)?;
        let mut row = Map::new();
        row.insert("index".into(), json!(i));
        if let Some(l) = label {
            row.insert("label".into(), json!(l));
        }
        row.insert("satisfied".into(), json!(table.count_at_start()));
        if a.per_node || only.is_some() {
            let nodes: Map<String, Value> = g
                .nodes()
                .filter(|v| only.is_none_or(|o| o == *v))
                .map(|v| (g.node_name(v).to_string(), json!(table.get(v, 0))))
                .collect();
            row.insert("nodes".into(), Value::Object(nodes));
        }
        rows.push(Value::Object(row));
    }
    let set: Vec<Trajectory> = items.iter().map(|(t, _)| t.clone()).collect();
    let mut report = json!({
        "formula": f.to_string(),
        "trajectories": rows,
        "coverage": par::coverage(&set, &f)?,
    });
    if items.iter().all(|(_, l)| l.is_some()) {
        let data = LabeledSet::new(items)?;
        report["misclassification_rate"] = json!(misclassification_rate(&data, &f)?);
    }
    Ok(report)
}

fn dfa(a: &DfaArgs) -> Run {
    let f = parse(&a.formula)?;
    let aut = to_dfa_with_limit(&f, a.len, a.state_limit)?;
    if a.dot {
        let dot = aut.to_dot();
        match &a.out {
            Some(p) => std::fs::write(p, dot)
                .with_context(|| format!("cannot write `{}`", p.display()))?,
            None => print!("{dot}"),
        }
        return Ok(None);
    }
    let d = &aut.dfa;
    let states = d.state_count() as u32;
    let report = json!({
        "formula": f.to_string(),
        "horizon": a.len,
        "negated": aut.negated,
        "predicates": aut.predicates.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "states": states,
        "letters": d.letter_count(),
        "initial": 0,
        "accepting": (0..states).filter(|&q| d.is_accepting(q)).collect::<Vec<_>>(),
        "transitions": (0..states).map(|q| d.row(q).to_vec()).collect::<Vec<_>>(),
    });
    Ok(Some((report, a.out.clone())))
}

fn ig_json(prior: &PriorModel, r: &InfoGainReport) -> Value {
    let g = prior.graph();
    let per_node: Map<String, Value> = r
        .nodes
        .iter()
        .zip(r.probabilities.iter().zip(&r.gains))
        .map(|(v, (p, i))| {
            (
                g.node_name(*v).to_string(),
                json!({"probability": p, "information_gain": i}),
            )
        })
        .collect();
    json!({"average": r.average, "log_base": "e", "nodes": per_node})
}

fn ig(a: &IgArgs) -> Outcome {
    let prior = io::load_prior(&a.prior, load_graph(&a.io.graph)?)?;
    let f = parse(&a.formula)?;
    let nodes = a
        .nodes
        .iter()
        .map(|n| node_id(prior.graph(), n))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let subset = (!nodes.is_empty()).then_some(nodes.as_slice());
    let r = compute_ig(&prior, &f, subset)?;
    Ok(json!({"formula": f.to_string(), "information_gain": ig_json(&prior, &r)}))
}

fn templates_for(t: &TemplateArgs, stats: &DataStats) -> anyhow::Result<Vec<(Template, ParameterBox)>> {
    if let Some(p) = &t.templates {
        return Ok(io::load_templates(p, stats)?);
    }
    let lib = match t.library.unwrap_or(Library::All) {
        Library::TypeI => templates::type_i(),
        Library::TypeII => templates::type_ii(),
        Library::All => {
            let mut v = templates::type_i();
            v.extend(templates::type_ii());
            v
        }
        Library::Classify => templates::all_directions(),
    };
    Ok(io::library_templates(lib, stats)?)
}

fn valuation_json(t: &gtl_core::ParameterValuation) -> Value {
    Value::Object(t.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

fn identification_json(
    name: &str,
    r: &Identification,
    prior: &PriorModel,
    log: bool,
) -> anyhow::Result<Value> {
    let mut v = json!({
        "name": name,
        "template": r.template.to_string(),
        "coordinates": r.coordinate_names,
        "feasible": r.feasible,
        "approximate": r.approximate,
        "hausdorff": r.gap,
        "evaluations": r.evaluations,
        "queries": r.queries.len(),
        "front": r.front.iter().map(|p| json!({
            "omega": p.omega,
            "theta": valuation_json(&p.theta),
            "coverage": p.coverage,
            "average_ig": p.average_ig,
        })).collect::<Vec<_>>(),
        "knees": r.knees,
    });
    if let Some((f, p)) = &r.best {
        let report = compute_ig(prior, f, None)?;
        v["best"] = json!({
            "formula": f.to_string(),
            "theta": valuation_json(&p.theta),
            "omega": p.omega,
            "coverage": p.coverage,
            "information_gain": ig_json(prior, &report),
        });
    }
    if log {
        v["query_log"] = r
            .queries
            .iter()
            .map(|q| {
                json!({
                    "omega": q.omega,
                    "theta": valuation_json(&q.theta),
                    "coverage": q.coverage,
                    "satisfied": q.satisfied,
                    "cached": q.cached,
                })
            })
            .collect();
    }
    Ok(v)
}

fn identify(a: &IdentifyArgs) -> Outcome {
    use rayon::prelude::*;
    let graph = load_graph(&a.io.graph)?;
    let items = io::load_trajectories(&a.trajectories, graph.clone())?;
    let set: Vec<Trajectory> = items.into_iter().map(|(t, _)| t).collect();
    if set.is_empty() {
        return Err(anyhow!("no trajectories in `{}`", a.trajectories.display()).into());
    }
    let prior = io::load_prior(&a.prior, Some(set[0].graph_arc().clone()))?;
    let stats = DataStats::from_trajectories(&set)?;
    let templates = templates_for(&a.templates, &stats)?;
    let config = IdentifyConfig {
        p_th: a.pth,
        epsilon: a.eps,
        budget: a.budget,
    };
    config.validate()?;
    let results: Vec<Value> = templates
        .par_iter()
        .map(|(t, pbox)| {
            let r = identify_with(
                &t.formula,
                pbox,
                &config,
                &mut |f| par::coverage(&set, f),
                &mut |f| compute_ig(&prior, f, None).map(|r| r.average),
            );
            match r {
                Ok(r) => identification_json(&t.name, &r, &prior, !a.no_query_log)
                    .unwrap_or_else(|e| json!({"name": t.name, "error": format!("{e:#}")})),
                Err(e) => json!({"name": t.name, "template": t.formula.to_string(), "error": e.to_string()}),
            }
        })
        .collect();
    let mut ranking: Vec<(usize, f64)> = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            r["best"]["information_gain"]["average"]
                .as_f64()
                .map(|ig| (i, ig))
        })
        .collect();
    ranking.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let report = json!({
        "p_th": a.pth,
        "epsilon": a.eps,
        "budget": a.budget,
        "ranking": ranking.iter().map(|(i, ig)| json!({
            "name": results[*i]["name"],
            "formula": results[*i]["best"]["formula"],
            "average_ig": ig,
        })).collect::<Vec<_>>(),
        "templates": results,
    });
    if ranking.is_empty() {
        return Err(Failure::Infeasible(report));
    }
    Ok(report)
}

fn labeled(path: &Path, graph: Option<Arc<LabeledGraph>>) -> anyhow::Result<LabeledSet> {
    let items = io::load_trajectories(path, graph)?;
    if items.is_empty() {
        bail!("no trajectories in `{}`", path.display());
    }
    LabeledSet::new(items).with_context(|| format!("in `{}`", path.display()))
}

fn classify(a: &ClassifyArgs, seed: u64) -> Outcome {
    let data = labeled(&a.trajectories, load_graph(&a.io.graph)?)?;
    let stats = DataStats::from_trajectories(data.trajectories())?;
    let templates = templates_for(&a.templates, &stats)?;
    let cfg = ClassifierConfig {
        m_th: a.mth,
        eta_th: a.eta,
        m_hat: a.mhat,
        pso: PsoConfig {
            swarm: a.swarm,
            iterations: a.iterations,
            seed,
            ..PsoConfig::default()
        },
        joint: !a.frozen,
        negations: !a.no_negations,
    };
    let r = infer_classifier_with(&templates, &cfg, &mut |fs| par::misclassification_rates(&data, fs))?;
    let mut report = json!({
        "success": r.success,
        "formula": r.formula.to_string(),
        "misclassification_rate": r.mr,
        "size": r.size,
        "m_th": a.mth,
        "eta_th": a.eta,
        "m_hat": a.mhat,
        "joint_reoptimization": !a.frozen,
        "evaluations": r.evaluations,
        "primitives": r.primitives.iter().map(|p| json!({
            "name": p.name,
            "template": p.template.to_string(),
            "theta": valuation_json(&p.theta),
            "misclassification_rate": p.mr,
        })).collect::<Vec<_>>(),
        "kept": r.kept,
        "log": r.log.iter().map(|s| json!({
            "stage": s.stage,
            "candidate": s.description,
            "misclassification_rate": s.mr,
            "evaluations": s.evaluations,
        })).collect::<Vec<_>>(),
    });
    if let Some(p) = &a.validate {
        let held = labeled(p, Some(data.trajectories()[0].graph_arc().clone()))?;
        report["validation_misclassification_rate"] = json!(misclassification_rate(&held, &r.formula)?);
    }
    if !r.success {
        return Err(Failure::Infeasible(report));
    }
    Ok(report)
}

fn write_set(out: &Option<PathBuf>, set: &[(Trajectory, Option<i8>)]) -> anyhow::Result<()> {
    match out {
        Some(p) => io::save_trajectories(p, set)?,
        None => {
            let files: Vec<_> = set
                .iter()
                .map(|(t, l)| io::TrajectoryFile::from_trajectory(t, *l, true))
                .collect();
            println!("{}", serde_json::to_string_pretty(&files)?);
        }
    }
    Ok(())
}

fn generate(g: &GenCommand, seed: u64) -> Result<(), Failure> {
    match g {
        GenCommand::Swarm(a) => {
            let scenario = SwarmScenario {
                rows: a.rows,
                cols: a.cols,
                len: a.len,
                seed,
                concentration: a.concentration,
                smoothing: a.smoothing,
            };
            let set = datagen::gen_swarm(&scenario, a.n)?;
            let set: Vec<_> = set.into_iter().map(|t| (t, None)).collect();
            write_set(&a.out, &set)?;
            if let Some(p) = &a.prior_out {
                let prior = datagen::swarm_prior(&scenario, a.prior_samples, a.bins)?;
                io::save_prior(p, &prior)?;
            }
        }
        GenCommand::Planted(a) => {
            let prior = io::load_prior(&a.prior, load_graph(&a.io.graph)?)?;
            let f = parse(&a.formula)?;
            let set = datagen::gen_planted(&f, &prior, a.npos, a.nneg, seed)?;
            let set: Vec<_> = set.into_iter().map(|(t, l)| (t, Some(l))).collect();
            write_set(&a.io.out, &set)?;
        }
        GenCommand::PriorSample(a) => {
            let prior = io::load_prior(&a.prior, load_graph(&a.io.graph)?)?;
            let set: Vec<_> = datagen::sample_prior(&prior, a.n, seed)
                .into_iter()
                .map(|t| (t, None))
                .collect();
            write_set(&a.io.out, &set)?;
        }
    }
    Ok(())
}
