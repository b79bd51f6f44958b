//! Command-line front end. Every command renders either a short text report
//! or pretty JSON; the JSON form is a pure function of the inputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use tokencolor::catalog::{build_algorithm, build_spoiler};
use tokencolor::engine::{GameConfig, GraphSource, MoveRecord, Transcript};
use tokencolor::graph::{Graph, NamedGraph};
use tokencolor::line::{
    run_line_game, Greedy, LineAlgorithm, LineSpoiler, LineTranscript, RandomFit, RandomLine, ThreeStage,
};
use tokencolor::perfection::{is_online_perfect, RecognitionResult};
use tokencolor::solver::{algorithm_best_response, exact_value, spoiler_best_response, Budget, GameValue};
use tokencolor::strategies::{run_duel, ScriptedSpoiler};

pub const EXIT_OK: u8 = 0;
/// `recognize`: not online-perfect. `duel --replay`: colours differ.
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "tokencolor", version, about = "Online token-colouring workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a graph is online-perfect.
    Recognize(RecognizeArgs),
    /// Compute the exact game value.
    Solve(SolveArgs),
    /// Play an Algorithm strategy against a Spoiler strategy.
    Duel(DuelArgs),
    /// Play the interval game on the real line.
    Line(LineArgs),
    /// Run the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Named graph: path, cycle, complete, c5plus, p5sq, bull, petersen.
    #[arg(long)]
    pub graph: Option<String>,
    /// Size parameter for path, cycle and complete.
    #[arg(long)]
    pub param: Option<usize>,
    /// Graph JSON file: {"vertices": n, "edges": [[i, j], ...]}.
    #[arg(long, conflicts_with_all = ["graph", "param"])]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Stop after visiting this many positions.
    #[arg(long, default_value_t = tokencolor::solver::DEFAULT_MAX_STATES)]
    pub max_states: u64,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = tokencolor::solver::DEFAULT_TIME_LIMIT.as_secs_f64())]
    pub time_limit: f64,
}

#[derive(Debug, Args)]
pub struct RecognizeArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub width: u32,
    /// At most one token per vertex.
    #[arg(long)]
    pub restricted: bool,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DuelArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, required_unless_present = "replay")]
    pub width: Option<u32>,
    #[arg(long)]
    pub restricted: bool,
    /// bipartite, fractional, p5sq, first-fit, clone-lift or exhaustive.
    #[arg(long, required_unless_present = "replay")]
    pub algorithm: Option<String>,
    /// parity-path, bull, general, random or exhaustive.
    #[arg(long, required_unless_present = "replay", conflicts_with = "replay")]
    pub spoiler: Option<String>,
    /// JSON parameters for the Algorithm strategy.
    #[arg(long)]
    pub algorithm_params: Option<String>,
    /// JSON parameters for the Spoiler strategy.
    #[arg(long)]
    pub spoiler_params: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replay a transcript file, optionally re-deriving its colours with --algorithm.
    #[arg(long, conflicts_with_all = ["graph", "param", "file", "width", "restricted"])]
    pub replay: Option<PathBuf>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LineAlgorithmName {
    Greedy,
    RandomFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LineSpoilerName {
    ThreeStage,
    Random,
}

#[derive(Debug, Args)]
pub struct LineArgs {
    #[arg(long)]
    pub width: u32,
    #[arg(long, value_enum)]
    pub algorithm: LineAlgorithmName,
    #[arg(long, value_enum, default_value_t = LineSpoilerName::ThreeStage)]
    pub spoiler: LineSpoilerName,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on the number of points.
    #[arg(long, default_value_t = 1000)]
    pub moves: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "TOKENCOLOR_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Most sessions kept before the least recently used is dropped.
    #[arg(long, default_value_t = 256)]
    pub max_sessions: usize,
    /// Idle seconds before a session expires.
    #[arg(long, default_value_t = 3600)]
    pub session_ttl: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error("cannot start the service: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Failed(_) | CliError::Io(_) => EXIT_NEGATIVE,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Rendered output and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

fn render<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String, code: u8) -> Outcome {
    let stdout = match format {
        Format::Json => serde_json::to_string_pretty(value).expect("output serializes") + "\n",
        Format::Text => text(),
    };
    Outcome { stdout, code }
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("cannot parse {}: {e}", path.display())))
}

pub fn graph_source(args: &GraphArgs) -> Result<GraphSource, CliError> {
    match (&args.graph, &args.file) {
        (Some(name), None) => {
            let named = match args.param {
                Some(p) => NamedGraph::new(name, Some(p)),
                None => name.parse(),
            };
            named.map(GraphSource::Named).map_err(input)
        }
        (None, Some(path)) => read_json::<Graph>(path).map(GraphSource::Explicit),
        _ => Err(input("give a graph with --graph NAME [--param N] or --file PATH")),
    }
}

fn budget(args: &BudgetArgs) -> Result<Budget, CliError> {
    let time_limit = Duration::try_from_secs_f64(args.time_limit).map_err(|e| input(format!("--time-limit: {e}")))?;
    Ok(Budget {
        max_states: args.max_states,
        time_limit,
    })
}

fn strategy_params(text: &Option<String>, flag: &str) -> Result<Option<Value>, CliError> {
    text.as_deref()
        .map(|t| serde_json::from_str(t).map_err(|e| input(format!("{flag}: {e}"))))
        .transpose()
}

fn edge_list(g: &Graph) -> String {
    let edges: Vec<String> = g.edges().map(|(u, v)| format!("{u}-{v}")).collect();
    if edges.is_empty() {
        "no edges".into()
    } else {
        edges.join(" ")
    }
}

fn move_list(moves: &[MoveRecord]) -> String {
    moves
        .iter()
        .map(|m| format!("{}:{}", m.vertex, m.color))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn recognize(args: &RecognizeArgs) -> Result<Outcome, CliError> {
    let graph = graph_source(&args.graph)?.build();
    let result: RecognitionResult = is_online_perfect(&graph).map_err(input)?;
    let code = if result.online_perfect { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(render(
        args.format,
        &result,
        || {
            let mut s = String::new();
            let verdict = if result.online_perfect {
                "online-perfect"
            } else {
                "not online-perfect"
            };
            let _ = writeln!(s, "{verdict}");
            let _ = writeln!(
                s,
                "core: {} vertices {:?}, {}",
                result.core.n(),
                result.core_vertices,
                edge_list(&result.core)
            );
            let _ = writeln!(s, "twin deletions: {}", result.trace.len());
            if let Some(w) = &result.witness {
                let _ = writeln!(s, "witness: {} on {:?}", w.kind, w.vertices);
            }
            s
        },
        code,
    ))
}

#[derive(Serialize)]
struct SolveReport<'a> {
    config: &'a GameConfig,
    #[serde(flatten)]
    value: &'a GameValue,
}

fn value_text(label: &str, v: &GameValue) -> String {
    let mut s = String::new();
    if v.exact {
        let _ = writeln!(s, "{label}: {} (exact)", v.value);
    } else {
        let _ = writeln!(s, "{label}: budget exhausted, bound {}", v.value);
    }
    let _ = writeln!(s, "states: {}", v.states);
    if !v.principal_variation.is_empty() {
        let _ = writeln!(s, "line: {}", move_list(&v.principal_variation));
    }
    s
}

pub fn solve(args: &SolveArgs) -> Result<Outcome, CliError> {
    let config = GameConfig::new(graph_source(&args.graph)?, args.width, args.restricted).map_err(input)?;
    let value = exact_value(&config, budget(&args.budget)?).map_err(|e| CliError::Failed(e.to_string()))?;
    let code = if value.exact { EXIT_OK } else { EXIT_BUDGET };
    let report = SolveReport {
        config: &config,
        value: &value,
    };
    Ok(render(args.format, &report, || value_text("value", &value), code))
}

#[derive(Serialize)]
struct DuelReport {
    algorithm: String,
    spoiler: String,
    colors_used: usize,
    /// Set when a side was played by exhaustive search.
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<bool>,
    /// Set on replays that re-derive colours with an Algorithm.
    #[serde(skip_serializing_if = "Option::is_none")]
    matches: Option<bool>,
    transcript: Transcript,
}

fn duel_text(r: &DuelReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} vs {}", r.algorithm, r.spoiler);
    match r.exact {
        Some(false) => {
            let _ = writeln!(s, "budget exhausted, bound {}", r.colors_used);
        }
        _ => {
            let _ = writeln!(s, "colors used: {}", r.colors_used);
        }
    }
    if let Some(m) = r.matches {
        let _ = writeln!(s, "colors reproduced: {}", if m { "yes" } else { "no" });
    }
    let _ = writeln!(s, "moves: {}", move_list(&r.transcript.moves));
    s
}

fn replay(args: &DuelArgs, path: &Path) -> Result<Outcome, CliError> {
    let transcript: Transcript = read_json(path)?;
    let game = transcript
        .replay()
        .map_err(|e| input(format!("transcript does not replay: {e}")))?;
    let (algorithm, matches) = match args.algorithm.as_deref() {
        None => ("replay".to_string(), None),
        Some("exhaustive") => return Err(input("replays re-derive colours with a strategy, not a search")),
        Some(name) => {
            let params = strategy_params(&args.algorithm_params, "--algorithm-params")?;
            let mut alg = build_algorithm(name, &transcript.config, params.as_ref()).map_err(input)?;
            let vertices = transcript.moves.iter().map(|m| m.vertex).collect();
            let mut spoiler = ScriptedSpoiler::new(vertices);
            let rerun = run_duel(alg.as_mut(), &mut spoiler, transcript.config.clone())
                .map_err(|e| CliError::Failed(e.to_string()))?;
            (name.to_string(), Some(rerun.moves == transcript.moves))
        }
    };
    let report = DuelReport {
        algorithm,
        spoiler: "replay".into(),
        colors_used: game.colors_used(),
        exact: None,
        matches,
        transcript,
    };
    let code = if matches == Some(false) { EXIT_NEGATIVE } else { EXIT_OK };
    Ok(render(args.format, &report, || duel_text(&report), code))
}

pub fn duel(args: &DuelArgs) -> Result<Outcome, CliError> {
    if let Some(path) = &args.replay {
        return replay(args, path);
    }
    let width = args.width.ok_or_else(|| input("--width is required"))?;
    let config = GameConfig::new(graph_source(&args.graph)?, width, args.restricted).map_err(input)?;
    let alg_name = args.algorithm.clone().ok_or_else(|| input("--algorithm is required"))?;
    let spoiler_name = args.spoiler.clone().ok_or_else(|| input("--spoiler is required"))?;
    let alg_params = strategy_params(&args.algorithm_params, "--algorithm-params")?;
    let spoiler_params = strategy_params(&args.spoiler_params, "--spoiler-params")?;
    let budget = budget(&args.budget)?;
    let failed = |e: tokencolor::solver::SolverError| CliError::Failed(e.to_string());

    let searched = match (alg_name.as_str(), spoiler_name.as_str()) {
        ("exhaustive", "exhaustive") => Some(exact_value(&config, budget).map_err(failed)?),
        ("exhaustive", s) => {
            let spoiler = build_spoiler(s, &config, spoiler_params.as_ref(), args.seed).map_err(input)?;
            Some(algorithm_best_response(spoiler.as_ref(), &config, budget).map_err(failed)?)
        }
        (a, "exhaustive") => {
            let alg = build_algorithm(a, &config, alg_params.as_ref()).map_err(input)?;
            Some(spoiler_best_response(alg.as_ref(), &config, budget).map_err(failed)?)
        }
        _ => None,
    };
    let report = match searched {
        Some(v) => DuelReport {
            algorithm: alg_name,
            spoiler: spoiler_name,
            colors_used: v.value as usize,
            exact: Some(v.exact),
            matches: None,
            transcript: Transcript {
                config,
                moves: v.principal_variation,
            },
        },
        None => {
            let mut alg = build_algorithm(&alg_name, &config, alg_params.as_ref()).map_err(input)?;
            let mut spoiler =
                build_spoiler(&spoiler_name, &config, spoiler_params.as_ref(), args.seed).map_err(input)?;
            let transcript =
                run_duel(alg.as_mut(), spoiler.as_mut(), config).map_err(|e| CliError::Failed(e.to_string()))?;
            DuelReport {
                algorithm: alg_name,
                spoiler: spoiler_name,
                colors_used: transcript.colors_used(),
                exact: None,
                matches: None,
                transcript,
            }
        }
    };
    let code = if report.exact == Some(false) {
        EXIT_BUDGET
    } else {
        EXIT_OK
    };
    Ok(render(args.format, &report, || duel_text(&report), code))
}

#[derive(Serialize)]
struct LineReport {
    algorithm: &'static str,
    spoiler: &'static str,
    colors_used: usize,
    transcript: LineTranscript,
}

pub fn line(args: &LineArgs) -> Result<Outcome, CliError> {
    let mut alg: Box<dyn LineAlgorithm> = match args.algorithm {
        LineAlgorithmName::Greedy => Box::new(Greedy),
        LineAlgorithmName::RandomFit => Box::new(RandomFit::new(args.seed)),
    };
    let mut spoiler: Box<dyn LineSpoiler> = match args.spoiler {
        LineSpoilerName::ThreeStage => Box::new(ThreeStage::new(args.width)),
        LineSpoilerName::Random => Box::new(RandomLine::new(args.seed)),
    };
    let transcript = run_line_game(alg.as_mut(), spoiler.as_mut(), args.width, args.moves).map_err(input)?;
    let report = LineReport {
        algorithm: alg.name(),
        spoiler: spoiler.name(),
        colors_used: transcript.colors_used(),
        transcript,
    };
    Ok(render(
        args.format,
        &report,
        || {
            let points: Vec<String> = report
                .transcript
                .moves
                .iter()
                .map(|m| format!("{}:{}", m.x, m.color))
                .collect();
            format!(
                "{} vs {} at width {}\ncolors used: {}\npoints: {}\n",
                report.algorithm,
                report.spoiler,
                args.width,
                report.colors_used,
                points.join(" ")
            )
        },
        EXIT_OK,
    ))
}

/// Runs one command. `serve` blocks until the server stops.
pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Recognize(a) => recognize(&a),
        Command::Solve(a) => solve(&a),
        Command::Duel(a) => duel(&a),
        Command::Line(a) => line(&a),
        Command::Serve(a) => {
            let options = crate::server::ServiceOptions {
                max_sessions: a.max_sessions.max(1),
                ttl: Duration::from_secs(a.session_ttl),
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::server::serve(&a.host, a.port, options))?;
            Ok(Outcome {
                stdout: String::new(),
                code: EXIT_OK,
            })
        }
    }
}
