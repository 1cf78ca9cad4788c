//! Command-line surface: solving, profiling, simulation, strategy
//! verification, decomposition inspection, generation, open-question surveys,
//! and a terminal play mode. Every run emits one JSON report on stdout;
//! interactive prompts go to stderr.
//!
//! Exit codes: 0 success/pass, 1 verification or strategy failure, 2 usage
//! error, 3 resource budget exhausted.

use std::io::{BufRead, Write};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde_json::{json, Value};

use congame::constructions::{
    enumerate_maximal_outerplanar, figure2_graph, gk_construction, knn_minus_matching,
    projective_plane_incidence, ApexPolicy, GkMetadata,
};
use congame::engine::{new_game, GameKind, GameSpec, Move, Player};
use congame::graph::{
    digest, is_connected, parse_graph, write_edge_list, write_graph6, Graph, GraphFormat,
};
use congame::outerplanar::{decompose, maximal_completion};
use congame::report::{emit_report, graph_summary, RunReport};
use congame::solver::{
    game_parameter, solve_with, winner_profile, SolveError, SolverConfig,
};
use congame::strategies::{
    adversarial_verify, simulate, DeterministicAlice, GkContext, OuterplanarContext, Strategy,
    StrategyError, Trace, VerifyLimits, VerifyOutcome,
};

#[derive(Parser)]
#[command(name = "congame", version, about = "Connected coloring and marking games: exact solving, strategies, generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GameOpt {
    Coloring,
    Marking,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatOpt {
    Auto,
    EdgeList,
    Graph6,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyOpt {
    FirstLegal,
    Random,
    Greedy,
    Lookahead,
    Solver,
    Bipartite,
    Outerplanar,
    Gk,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyStrategyOpt {
    OuterplanarMarking,
    BipartiteColoring,
    FirstLegal,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyOpt {
    Figure2,
    KnnMinusM,
    PgIncidence,
    Gk,
    Triangulations,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuestionOpt {
    Q3Nonmonotone,
    Q4Monotonicity,
    Q5ConnectivityGap,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideOpt {
    Alice,
    Bob,
}

#[derive(Args, Clone)]
struct GraphArg {
    /// Graph source: a file path, or one of figure2, path:N, cycle:N, fan:N,
    /// knn-minus-m:N, pg:Q, gk:K,Q[,CAP], triangulation:N,I
    #[arg(long)]
    graph: String,
    /// File format; auto keys on the .g6 extension.
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatOpt,
}

#[derive(Args, Clone)]
struct GameArg {
    #[arg(long, value_enum)]
    game: GameOpt,
    /// Restricts play so the assigned set always induces a connected subgraph.
    #[arg(long)]
    connected: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the winner of one game under optimal play.
    Solve {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        game: GameArg,
        #[arg(long)]
        k: u8,
        /// Include a principal variation in the payload.
        #[arg(long)]
        pv: bool,
        #[arg(long)]
        node_limit: Option<u64>,
    },
    /// Winners over a range of k, plus the least k Alice wins.
    Profile {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        game: GameArg,
        #[arg(long)]
        k_min: u8,
        #[arg(long)]
        k_max: u8,
    },
    /// Play two strategies against each other and emit the trace.
    Simulate {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        game: GameArg,
        #[arg(long)]
        k: u8,
        #[arg(long, value_enum)]
        alice: StrategyOpt,
        #[arg(long, value_enum)]
        bob: StrategyOpt,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exhaust every Bob reply against a deterministic Alice.
    VerifyStrategy {
        /// triangulations (all of size --n) or file (single graph via --graph).
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        graph: Option<String>,
        #[arg(long, value_enum)]
        strategy: VerifyStrategyOpt,
        #[arg(long)]
        k: u8,
    },
    /// Trapezoidal decomposition of an outerplanar graph.
    Decompose {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, num_args = 2, value_names = ["U", "V"])]
        root_edge: Vec<u32>,
    },
    /// Emit a graph family in edge-list or graph6 form.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyOpt,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        k: Option<u8>,
        /// Cap on the number of apex vertices for the gk family.
        #[arg(long)]
        cap: Option<usize>,
        /// Emit only the triangulation with this index.
        #[arg(long)]
        index: Option<usize>,
        #[arg(long, value_enum, default_value = "edge-list")]
        format: FormatOpt,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Search small graphs for behavior relevant to the open questions;
    /// reports candidates only, never claims answers.
    Survey {
        #[arg(long, value_enum)]
        question: QuestionOpt,
        #[arg(long)]
        n_max: usize,
        /// Random connected graphs per size beyond the exhaustive range.
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Interactive terminal game against the solver.
    Play {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        game: GameArg,
        #[arg(long)]
        k: u8,
        #[arg(long, value_enum)]
        human: SideOpt,
    },
}

enum CliError {
    Usage(String),
    Failure(String),
    Budget(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
            CliError::Budget(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Failure(_) => "failure",
            CliError::Budget(_) => "budget",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) | CliError::Budget(m) => m,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> CliError {
        match e {
            SolveError::NodeBudget(_) | SolveError::MemoBudget(_) => CliError::Budget(e.to_string()),
            SolveError::Setup(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<StrategyError> for CliError {
    fn from(e: StrategyError) -> CliError {
        match e {
            StrategyError::Budget(_) => CliError::Budget(e.to_string()),
            StrategyError::Solve(s) => s.into(),
            StrategyError::NotApplicable(_)
            | StrategyError::NotBipartite
            | StrategyError::HistoryRequired => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

struct Outcome {
    graph: Option<Value>,
    payload: Value,
    stats: Value,
    exit: i32,
}

impl Outcome {
    fn ok(graph: Option<Value>, payload: Value, stats: Value) -> Outcome {
        Outcome { graph, payload, stats, exit: 0 }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/usage itself; fold its exit into ours.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            e.print().ok();
            std::process::exit(if is_help { 0 } else { 2 });
        }
    };
    let command_echo: String = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let start = Instant::now();
    let result = dispatch(cli.command);
    let (outcome, exit) = match result {
        Ok(o) => {
            let exit = o.exit;
            (o, exit)
        }
        Err(e) => {
            let exit = e.exit_code();
            (
                Outcome {
                    graph: None,
                    payload: json!({"error": {"kind": e.kind(), "message": e.message()}}),
                    stats: json!({}),
                    exit,
                },
                exit,
            )
        }
    };
    let report = RunReport {
        command: command_echo,
        graph: outcome.graph,
        payload: outcome.payload,
        stats: outcome.stats,
        wall_ms: start.elapsed().as_millis(),
    };
    let mut stdout = std::io::stdout().lock();
    if emit_report(&report, &mut stdout).is_err() {
        std::process::exit(2);
    }
    std::process::exit(exit);
}

fn dispatch(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Solve { graph, game, k, pv, node_limit } => cmd_solve(graph, game, k, pv, node_limit),
        Command::Profile { graph, game, k_min, k_max } => cmd_profile(graph, game, k_min, k_max),
        Command::Simulate { graph, game, k, alice, bob, seed } => {
            cmd_simulate(graph, game, k, alice, bob, seed)
        }
        Command::VerifyStrategy { family, n, graph, strategy, k } => {
            cmd_verify(family, n, graph, strategy, k)
        }
        Command::Decompose { graph, root_edge } => cmd_decompose(graph, root_edge),
        Command::Generate { family, n, q, k, cap, index, format, out } => {
            cmd_generate(family, n, q, k, cap, index, format, out)
        }
        Command::Survey { question, n_max, samples, seed } => {
            cmd_survey(question, n_max, samples, seed)
        }
        Command::Play { graph, game, k, human } => cmd_play(graph, game, k, human),
    }
}

// ---------------------------------------------------------------------------
// Graph loading
// ---------------------------------------------------------------------------

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_builtin(spec: &str) -> Result<Option<(Graph, Option<GkMetadata>)>, CliError> {
    if spec == "figure2" {
        return Ok(Some((figure2_graph(), None)));
    }
    let Some((family, params)) = spec.split_once(':') else {
        return Ok(None);
    };
    let nums: Vec<&str> = params.split(',').collect();
    let int = |s: &str| s.trim().parse::<usize>().map_err(|_| usage(format!("bad parameter {s:?} in {spec:?}")));
    match family {
        "path" => {
            let n = int(nums[0])?;
            let edges: Vec<(u32, u32)> = (1..n).map(|i| (i as u32 - 1, i as u32)).collect();
            Ok(Some((Graph::from_edges(n, &edges).map_err(|e| usage(e.to_string()))?, None)))
        }
        "cycle" => {
            let n = int(nums[0])?;
            if n < 3 {
                return Err(usage("cycle needs n >= 3"));
            }
            let mut edges: Vec<(u32, u32)> = (1..n).map(|i| (i as u32 - 1, i as u32)).collect();
            edges.push((n as u32 - 1, 0));
            Ok(Some((Graph::from_edges(n, &edges).map_err(|e| usage(e.to_string()))?, None)))
        }
        "fan" => {
            // Cycle 0..n-1 with chords from vertex 0.
            let n = int(nums[0])?;
            if n < 3 {
                return Err(usage("fan needs n >= 3"));
            }
            let mut edges: Vec<(u32, u32)> = (1..n).map(|i| (i as u32 - 1, i as u32)).collect();
            edges.push((n as u32 - 1, 0));
            for i in 2..n as u32 - 1 {
                edges.push((0, i));
            }
            Ok(Some((Graph::from_edges(n, &edges).map_err(|e| usage(e.to_string()))?, None)))
        }
        "knn-minus-m" => {
            let n = int(nums[0])?;
            Ok(Some((knn_minus_matching(n).map_err(|e| usage(e.to_string()))?, None)))
        }
        "pg" => {
            let q = int(nums[0])? as u32;
            let (g, _) = projective_plane_incidence(q).map_err(|e| usage(e.to_string()))?;
            Ok(Some((g, None)))
        }
        "gk" => {
            if nums.len() < 2 {
                return Err(usage("gk needs k and q, e.g. gk:3,11 or gk:3,11,10000"));
            }
            let k = int(nums[0])? as u8;
            let q = int(nums[1])? as u32;
            let policy = match nums.get(2) {
                Some(c) => ApexPolicy::Capped(int(c)?),
                None => ApexPolicy::Full,
            };
            let (g, meta) = gk_construction(k, q, policy).map_err(|e| usage(e.to_string()))?;
            Ok(Some((g, Some(meta))))
        }
        "triangulation" => {
            if nums.len() != 2 {
                return Err(usage("triangulation needs n and an index, e.g. triangulation:7,0"));
            }
            let n = int(nums[0])?;
            let idx = int(nums[1])?;
            let m = enumerate_maximal_outerplanar(n)
                .map_err(|e| usage(e.to_string()))?
                .nth(idx)
                .ok_or_else(|| usage(format!("triangulation index {idx} out of range")))?;
            Ok(Some((m.gm().clone(), None)))
        }
        _ => Ok(None),
    }
}

fn load_graph(arg: &GraphArg) -> Result<(Graph, Option<GkMetadata>), CliError> {
    if let Some(hit) = parse_builtin(&arg.graph)? {
        return Ok(hit);
    }
    let path = std::path::Path::new(&arg.graph);
    let bytes = std::fs::read(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", arg.graph)))?;
    let format = match arg.format {
        FormatOpt::EdgeList => GraphFormat::EdgeList,
        FormatOpt::Graph6 => GraphFormat::Graph6,
        FormatOpt::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("g6") | Some("graph6") => GraphFormat::Graph6,
            _ => GraphFormat::EdgeList,
        },
    };
    let g = parse_graph(&bytes, format).map_err(|e| usage(format!("{}: {e}", arg.graph)))?;
    Ok((g, None))
}

fn game_spec(game: &GameArg, k: u8) -> GameSpec {
    GameSpec {
        kind: match game.game {
            GameOpt::Coloring => GameKind::Coloring,
            GameOpt::Marking => GameKind::Marking,
        },
        connected: game.connected,
        k,
    }
}

fn player_str(p: Player) -> &'static str {
    match p {
        Player::Alice => "Alice",
        Player::Bob => "Bob",
    }
}

fn trace_json(t: &Trace) -> Value {
    serde_json::to_value(t).expect("trace serializes")
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_solve(
    graph: GraphArg,
    game: GameArg,
    k: u8,
    pv: bool,
    node_limit: Option<u64>,
) -> Result<Outcome, CliError> {
    let (g, _) = load_graph(&graph)?;
    let g = Arc::new(g);
    let spec = game_spec(&game, k);
    let mut cfg = SolverConfig { want_pv: pv, ..SolverConfig::default() };
    if let Some(limit) = node_limit {
        cfg.node_limit = limit;
    }
    let result = solve_with(&g, spec, &cfg)?;
    let payload = json!({
        "game": spec,
        "winner": player_str(result.winner),
        "pv": result.principal_variation,
    });
    let stats = json!({
        "nodes_expanded": result.nodes_expanded,
        "memo_hits": result.memo_hits,
    });
    Ok(Outcome::ok(Some(graph_summary(&g)), payload, stats))
}

fn cmd_profile(graph: GraphArg, game: GameArg, k_min: u8, k_max: u8) -> Result<Outcome, CliError> {
    if k_min == 0 || k_min > k_max {
        return Err(usage("need 1 <= k-min <= k-max"));
    }
    let (g, _) = load_graph(&graph)?;
    let g = Arc::new(g);
    let kind = match game.game {
        GameOpt::Coloring => GameKind::Coloring,
        GameOpt::Marking => GameKind::Marking,
    };
    let profile = winner_profile(&g, kind, game.connected, k_min..=k_max, &SolverConfig::default())?;
    let winners: Vec<Value> = profile
        .winners
        .iter()
        .map(|&(k, w)| json!({"k": k, "winner": player_str(w)}))
        .collect();
    let payload = json!({
        "game": {"kind": kind, "connected": game.connected},
        "winners": winners,
        "min_winning_k": profile.min_winning_k,
    });
    let stats = json!({"nodes_expanded": profile.nodes_expanded});
    Ok(Outcome::ok(Some(graph_summary(&g)), payload, stats))
}

fn build_strategy(
    opt: StrategyOpt,
    g: &Graph,
    meta: &Option<GkMetadata>,
) -> Result<Strategy, CliError> {
    Ok(match opt {
        StrategyOpt::FirstLegal => Strategy::FirstLegal,
        StrategyOpt::Random => Strategy::Random,
        StrategyOpt::Greedy => Strategy::Greedy,
        StrategyOpt::Lookahead => Strategy::SolverLimited { node_limit: 200_000 },
        StrategyOpt::Solver => Strategy::Solver,
        StrategyOpt::Bipartite => Strategy::AliceBipartite,
        StrategyOpt::Outerplanar => Strategy::AliceOuterplanar(OuterplanarContext::for_graph(g)?),
        StrategyOpt::Gk => {
            let meta = meta
                .clone()
                .ok_or_else(|| usage("the gk strategy needs a gk:K,Q graph source"))?;
            Strategy::BobGk(GkContext::new(Arc::new(meta)))
        }
    })
}

fn cmd_simulate(
    graph: GraphArg,
    game: GameArg,
    k: u8,
    alice: StrategyOpt,
    bob: StrategyOpt,
    seed: u64,
) -> Result<Outcome, CliError> {
    let (g, meta) = load_graph(&graph)?;
    let g = Arc::new(g);
    let spec = game_spec(&game, k);
    let mut alice = build_strategy(alice, &g, &meta)?;
    let mut bob = build_strategy(bob, &g, &meta)?;
    let trace = simulate(&g, spec, &mut alice, &mut bob, seed)?;
    let payload = json!({
        "seed": seed,
        "verdict": player_str(trace.verdict),
        "trace": trace_json(&trace),
    });
    let stats = json!({"plies": trace.moves.len()});
    Ok(Outcome::ok(Some(graph_summary(&g)), payload, stats))
}

fn cmd_verify(
    family: String,
    n: Option<usize>,
    graph: Option<String>,
    strategy: VerifyStrategyOpt,
    k: u8,
) -> Result<Outcome, CliError> {
    let limits = VerifyLimits::default();
    let verify_one = |g: &Arc<Graph>,
                      ctx_graph: &Graph|
     -> Result<(GameSpec, VerifyOutcome), CliError> {
        let (spec, alice) = match strategy {
            VerifyStrategyOpt::OuterplanarMarking => (
                GameSpec::marking(true, k),
                DeterministicAlice::Outerplanar(OuterplanarContext::for_graph(ctx_graph)?),
            ),
            VerifyStrategyOpt::BipartiteColoring => {
                if k != 2 {
                    return Err(usage("the bipartite strategy plays with k = 2"));
                }
                (GameSpec::coloring(true, 2), DeterministicAlice::Bipartite)
            }
            VerifyStrategyOpt::FirstLegal => {
                (GameSpec::coloring(true, k), DeterministicAlice::FirstLegal)
            }
        };
        let out = adversarial_verify(g, spec, &alice, limits)?;
        Ok((spec, out))
    };

    match family.as_str() {
        "triangulations" => {
            let n = n.ok_or_else(|| usage("--family triangulations needs --n"))?;
            let graphs: Vec<_> = enumerate_maximal_outerplanar(n)
                .map_err(|e| usage(e.to_string()))?
                .collect();
            let total = graphs.len();
            let mut states = 0u64;
            for (idx, m) in graphs.iter().enumerate() {
                let g = Arc::new(m.gm().clone());
                let (spec, out) = verify_one(&g, m.gm())?;
                match out {
                    VerifyOutcome::Pass { states: s } => states += s,
                    VerifyOutcome::Fail { witness, reason } => {
                        let payload = json!({
                            "result": "fail",
                            "family": "triangulations",
                            "n": n,
                            "k": k,
                            "graph_index": idx,
                            "graph6": write_graph6(m.gm()),
                            "reason": reason,
                            "witness": trace_json(&witness),
                            "game": spec,
                        });
                        return Ok(Outcome {
                            graph: None,
                            payload,
                            stats: json!({"graphs_checked": idx + 1}),
                            exit: 1,
                        });
                    }
                }
            }
            let payload = json!({
                "result": "pass",
                "family": "triangulations",
                "n": n,
                "k": k,
                "graphs": total,
            });
            Ok(Outcome::ok(None, payload, json!({"states_explored": states})))
        }
        "file" => {
            let spec_str = graph.ok_or_else(|| usage("--family file needs --graph"))?;
            let arg = GraphArg { graph: spec_str, format: FormatOpt::Auto };
            let (g, _) = load_graph(&arg)?;
            let g = Arc::new(g);
            let (spec, out) = verify_one(&g, &g)?;
            match out {
                VerifyOutcome::Pass { states } => {
                    let payload = json!({"result": "pass", "k": k, "game": spec});
                    Ok(Outcome::ok(
                        Some(graph_summary(&g)),
                        payload,
                        json!({"states_explored": states}),
                    ))
                }
                VerifyOutcome::Fail { witness, reason } => {
                    let payload = json!({
                        "result": "fail",
                        "k": k,
                        "game": spec,
                        "reason": reason,
                        "witness": trace_json(&witness),
                    });
                    Ok(Outcome {
                        graph: Some(graph_summary(&g)),
                        payload,
                        stats: json!({}),
                        exit: 1,
                    })
                }
            }
        }
        other => Err(usage(format!("unknown family {other:?}; use triangulations or file"))),
    }
}

fn cmd_decompose(graph: GraphArg, root_edge: Vec<u32>) -> Result<Outcome, CliError> {
    let (g, _) = load_graph(&graph)?;
    if root_edge.len() != 2 {
        return Err(usage("--root-edge needs exactly two vertices"));
    }
    let m = maximal_completion(&g, (root_edge[0], root_edge[1]))
        .map_err(|e| usage(e.to_string()))?;
    let d = decompose(&m).map_err(|e| CliError::Failure(e.to_string()))?;
    let payload = d.to_json(&m);
    Ok(Outcome::ok(Some(graph_summary(&g)), payload, json!({})))
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    family: FamilyOpt,
    n: Option<usize>,
    q: Option<u32>,
    k: Option<u8>,
    cap: Option<usize>,
    index: Option<usize>,
    format: FormatOpt,
    out: Option<std::path::PathBuf>,
) -> Result<Outcome, CliError> {
    let need_n = || n.ok_or_else(|| usage("this family needs --n"));
    let render = |g: &Graph| -> Result<String, CliError> {
        match format {
            FormatOpt::Graph6 => {
                if g.n() > 5000 {
                    return Err(usage("graph6 output is impractical beyond 5000 vertices; use edge-list"));
                }
                Ok(format!("{}\n", write_graph6(g)))
            }
            _ => Ok(write_edge_list(g)),
        }
    };
    let (content, meta): (String, Value) = match family {
        FamilyOpt::Figure2 => {
            let g = figure2_graph();
            (render(&g)?, json!({"family": "figure2", "n": g.n(), "m": g.edge_count(), "digest": digest(&g)}))
        }
        FamilyOpt::KnnMinusM => {
            let g = knn_minus_matching(need_n()?).map_err(|e| usage(e.to_string()))?;
            (render(&g)?, json!({"family": "knn-minus-m", "n": g.n(), "m": g.edge_count(), "digest": digest(&g)}))
        }
        FamilyOpt::PgIncidence => {
            let q = q.ok_or_else(|| usage("pg-incidence needs --q"))?;
            let (g, side) = projective_plane_incidence(q).map_err(|e| usage(e.to_string()))?;
            (
                render(&g)?,
                json!({"family": "pg-incidence", "q": q, "side": side, "n": g.n(), "m": g.edge_count(), "digest": digest(&g)}),
            )
        }
        FamilyOpt::Gk => {
            let k = k.ok_or_else(|| usage("gk needs --k"))?;
            let q = q.ok_or_else(|| usage("gk needs --q"))?;
            let policy = match cap {
                Some(c) => ApexPolicy::Capped(c),
                None => ApexPolicy::Full,
            };
            let (g, meta) = gk_construction(k, q, policy).map_err(|e| usage(e.to_string()))?;
            (
                render(&g)?,
                json!({
                    "family": "gk", "k": k, "q": q,
                    "capped": matches!(policy, ApexPolicy::Capped(_)),
                    "apexes": meta.apex_map.len(),
                    "n": g.n(), "m": g.edge_count(), "digest": digest(&g),
                }),
            )
        }
        FamilyOpt::Triangulations => {
            let n = need_n()?;
            let all = enumerate_maximal_outerplanar(n).map_err(|e| usage(e.to_string()))?;
            match index {
                Some(i) => {
                    let m = all
                        .into_iter()
                        .nth(i)
                        .ok_or_else(|| usage(format!("index {i} out of range")))?;
                    (
                        render(m.gm())?,
                        json!({"family": "triangulations", "n": n, "index": i, "digest": digest(m.gm())}),
                    )
                }
                None => {
                    // One graph6 line per triangulation, the usual corpus form.
                    let mut text = String::new();
                    let mut count = 0usize;
                    for m in all {
                        text.push_str(&write_graph6(m.gm()));
                        text.push('\n');
                        count += 1;
                    }
                    (text, json!({"family": "triangulations", "n": n, "count": count}))
                }
            }
        }
    };
    let bytes = content.len();
    if let Some(path) = &out {
        std::fs::write(path, &content)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut payload = meta;
    payload["content"] = if out.is_some() { Value::Null } else { Value::String(content) };
    Ok(Outcome::ok(None, payload, json!({"bytes": bytes})))
}

// ---------------------------------------------------------------------------
// Survey mode
// ---------------------------------------------------------------------------

fn survey_graphs(n_max: usize, samples: usize, seed: u64) -> Vec<Graph> {
    let mut out = Vec::new();
    for n in 2..=n_max.min(5) {
        out.extend(all_connected(n));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for n in 6..=n_max {
        for _ in 0..samples {
            out.push(random_connected(&mut rng, n));
        }
    }
    out
}

fn all_connected(n: usize) -> Vec<Graph> {
    let pairs: Vec<(u32, u32)> =
        (0..n as u32).flat_map(|u| (u + 1..n as u32).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let edges: Vec<(u32, u32)> = pairs
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let g = Graph::from_edges(n, &edges).expect("mask enumeration is simple");
        if is_connected(&g) {
            out.push(g);
        }
    }
    out
}

fn random_connected(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Graph {
    use rand::Rng;
    loop {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if rng.gen_bool(0.45) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).expect("simple by construction");
        if is_connected(&g) {
            return g;
        }
    }
}

fn cmd_survey(question: QuestionOpt, n_max: usize, samples: usize, seed: u64) -> Result<Outcome, CliError> {
    if !(2..=8).contains(&n_max) {
        return Err(usage("survey supports 2 <= n-max <= 8"));
    }
    let graphs = survey_graphs(n_max, samples, seed);
    let cfg = SolverConfig::default();
    let mut findings = Vec::new();
    let mut examined = 0u64;
    for g in &graphs {
        examined += 1;
        let ga = Arc::new(g.clone());
        match question {
            QuestionOpt::Q3Nonmonotone => {
                let top = g.max_degree() as u8 + 1;
                let profile =
                    winner_profile(&ga, GameKind::Coloring, true, 1..=top, &cfg)?;
                let winners: Vec<Player> = profile.winners.iter().map(|&(_, w)| w).collect();
                let alice_then_bob = winners
                    .iter()
                    .enumerate()
                    .any(|(i, &w)| {
                        w == Player::Alice && winners[i + 1..].contains(&Player::Bob)
                    });
                if alice_then_bob {
                    findings.push(json!({
                        "graph6": write_graph6(g),
                        "profile": profile.winners.iter()
                            .map(|&(k, w)| json!({"k": k, "winner": player_str(w)}))
                            .collect::<Vec<_>>(),
                    }));
                }
            }
            QuestionOpt::Q4Monotonicity => {
                let parent = game_parameter(&ga, GameKind::Marking, true, &cfg)?;
                for (u, v) in g.edges() {
                    let edges: Vec<(u32, u32)> =
                        g.edges().into_iter().filter(|&e| e != (u, v)).collect();
                    let h = Graph::from_edges(g.n(), &edges).expect("edge deletion");
                    if !is_connected(&h) {
                        continue;
                    }
                    let sub = game_parameter(&Arc::new(h.clone()), GameKind::Marking, true, &cfg)?;
                    if sub > parent {
                        findings.push(json!({
                            "graph6": write_graph6(g),
                            "deleted_edge": [u, v],
                            "col_cg_parent": parent,
                            "col_cg_subgraph": sub,
                        }));
                    }
                }
            }
            QuestionOpt::Q5ConnectivityGap => {
                let chi_g = game_parameter(&ga, GameKind::Coloring, false, &cfg)?;
                let chi_cg = game_parameter(&ga, GameKind::Coloring, true, &cfg)?;
                let col_g = game_parameter(&ga, GameKind::Marking, false, &cfg)?;
                let col_cg = game_parameter(&ga, GameKind::Marking, true, &cfg)?;
                if chi_g < chi_cg || col_g < col_cg {
                    findings.push(json!({
                        "graph6": write_graph6(g),
                        "chi_g": chi_g, "chi_cg": chi_cg,
                        "col_g": col_g, "col_cg": col_cg,
                    }));
                }
            }
        }
    }
    let payload = json!({
        "question": match question {
            QuestionOpt::Q3Nonmonotone => "q3-nonmonotone",
            QuestionOpt::Q4Monotonicity => "q4-monotonicity",
            QuestionOpt::Q5ConnectivityGap => "q5-connectivity-gap",
        },
        "n_max": n_max,
        "seed": seed,
        "findings": findings,
        "note": "exploratory candidates only; nothing here is a claimed answer",
    });
    Ok(Outcome::ok(None, payload, json!({"graphs_examined": examined})))
}

// ---------------------------------------------------------------------------
// Interactive play
// ---------------------------------------------------------------------------

fn cmd_play(graph: GraphArg, game: GameArg, k: u8, human: SideOpt) -> Result<Outcome, CliError> {
    let (g, _) = load_graph(&graph)?;
    let g = Arc::new(g);
    let spec = game_spec(&game, k);
    let human = match human {
        SideOpt::Alice => Player::Alice,
        SideOpt::Bob => Player::Bob,
    };
    let mut state = new_game(g.clone(), spec).map_err(|e| usage(e.to_string()))?.with_history(true);
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut err = std::io::stderr();
    let mut moves = Vec::new();
    let verdict = loop {
        if let Some(w) = state.winner() {
            break w;
        }
        let mover = state.turn();
        let mv = if mover == human {
            writeln!(err, "{}", render_state(&state)).ok();
            let legal = state.legal_moves();
            writeln!(err, "your move ({} legal), as `vertex` or `vertex color`:", legal.len()).ok();
            let mut choice = None;
            for line in lines.by_ref() {
                let line = line.map_err(|e| usage(format!("stdin: {e}")))?;
                match parse_human_move(&line, spec) {
                    Ok(m) => {
                        if state.apply_move(m).is_ok() {
                            choice = Some(m);
                            break;
                        }
                        writeln!(err, "illegal move, try again:").ok();
                    }
                    Err(msg) => {
                        writeln!(err, "{msg}").ok();
                    }
                }
            }
            choice.ok_or_else(|| usage("input ended before the game finished"))?
        } else {
            let (m, _) = congame::solver::best_move(&state, &SolverConfig::default())
                .map_err(CliError::from)?;
            writeln!(err, "opponent plays {}", show_move(m)).ok();
            m
        };
        state.apply_move_mut(mv).map_err(|e| CliError::Failure(e.to_string()))?;
        moves.push(json!({
            "player": player_str(mover),
            "vertex": mv.vertex,
            "color": mv.color,
        }));
    };
    writeln!(err, "{}", render_state(&state)).ok();
    writeln!(err, "winner: {}", player_str(verdict)).ok();
    let payload = json!({
        "human": player_str(human),
        "verdict": player_str(verdict),
        "moves": moves,
        "human_won": verdict == human,
    });
    Ok(Outcome::ok(Some(graph_summary(&g)), payload, json!({"plies": state.moves_made()})))
}

fn parse_human_move(line: &str, spec: GameSpec) -> Result<Move, String> {
    let mut it = line.split_whitespace();
    let v: u32 = it
        .next()
        .ok_or("empty input")?
        .parse()
        .map_err(|_| "vertex must be a number".to_string())?;
    match (spec.kind, it.next()) {
        (GameKind::Marking, None) => Ok(Move::mark(v)),
        (GameKind::Marking, Some(_)) => Err("marking moves take no color".into()),
        (GameKind::Coloring, Some(c)) => {
            let c: u8 = c.parse().map_err(|_| "color must be a number".to_string())?;
            Ok(Move::color(v, c))
        }
        (GameKind::Coloring, None) => Err("coloring moves need `vertex color`".into()),
    }
}

fn show_move(m: Move) -> String {
    match m.color {
        Some(c) => format!("vertex {} color {c}", m.vertex),
        None => format!("vertex {}", m.vertex),
    }
}

fn render_state(s: &congame::engine::GameState) -> String {
    let cells: Vec<String> = s
        .graph()
        .vertices()
        .map(|v| match s.cell(v) {
            congame::engine::Cell::Empty => format!("{v}:."),
            congame::engine::Cell::Marked => format!("{v}:M"),
            congame::engine::Cell::Color(c) => format!("{v}:{c}"),
        })
        .collect();
    format!("[{}] to move: {}", cells.join(" "), player_str(s.turn()))
}
