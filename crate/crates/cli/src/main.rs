//! `tcim`: graph generation, seed selection, baselines and experiment grids.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tcim::baselines::{
    celf, estimate_sigma_mc, greedy_mc, greedymc_min_r, single_discount, BaselineResult,
};
use tcim::engine::{tcim, PhaseTimings, TcimParams, TcimResult};
use tcim::graph::{generate_synthetic, load_edge_list, SyntheticKind};
use tcim::rng::derive_seed;
use tcim::{DirectedGraph, Directedness, Error, ModelKind, NodeId, NodeSet};

const SELECT_FIELDS: &str = "\
Output fields (select):
  seeds                 chosen B seeds in pick order
  seeds_a               opponent seeds used
  model, k, epsilon, ell, seed
                        echo of the run parameters
  theta                 RAPG instances used for selection
  lb_estimate           coarse lower bound on the optimum
  lb_refined            refined lower bound (never below lb_estimate)
  spread_estimate       n * (sum of instance scores) / theta
  spread_mc             Monte-Carlo spread of the seeds over --sims draws
  instances_generated   RAPG instances drawn across all phases
  coins_total           arc coins flipped while sampling
  timings               wall seconds per phase (estimate, refine, select, total)
  peak_memory_estimate  bytes of the largest retained instance pool";

const BASELINE_FIELDS: &str = "\
Output fields (baseline):
  algorithm, model, k, r, seed
                        echo of the run parameters
  seeds                 chosen B seeds in pick order
  seeds_a               opponent seeds used
  spread_estimate       spread seen by the selection loop (empty for singlediscount)
  spread_mc             Monte-Carlo spread of the seeds over --sims draws
  evaluations           spread evaluations performed
  simulations_used      evaluations times r
  wall_time_secs        selection wall time
  min_r                 theoretical simulation count, with --print-min-r";

const GRID_FIELDS: &str = "\
CSV columns (grid, one row per algorithm, model, k, epsilon and |S_A|):
  algorithm, model, k, epsilon, seed_a_size
                        grid coordinates (epsilon empty for baselines)
  seeds                 chosen seeds, space separated
  spread_mc             Monte-Carlo spread over --sims draws
  wall_time_secs        selection wall time
  theta, lb_estimate, lb_refined, spread_estimate
                        TCIM statistics (empty for baselines)
  memory_estimate       bytes of the largest retained instance pool (TCIM)
  simulations_used      Monte-Carlo simulations spent selecting (baselines)
  error                 failure message; the grid continues past failed rows";

const INFLUENCE_FIELDS: &str = "\
Output fields (influence):
  model, sims, seed     echo of the run parameters
  seeds_a, seeds_b      seed sets evaluated
  spread_mc             mean B-influenced mass over --sims forward simulations";

#[derive(Parser)]
#[command(name = "tcim", version, about = "Competitive influence maximization toolkit")]
struct Cli {
    /// Worker threads for sampling and simulation (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph as an edge list `u v p`
    Gen(GenArgs),
    /// Select B seeds with TCIM
    #[command(after_long_help = SELECT_FIELDS)]
    Select(SelectArgs),
    /// Select B seeds with a baseline algorithm
    #[command(after_long_help = BASELINE_FIELDS)]
    Baseline(BaselineArgs),
    /// Sweep algorithms, models, k, epsilon and |S_A|, writing one CSV row each
    #[command(after_long_help = GRID_FIELDS)]
    Grid(GridArgs),
    /// Monte-Carlo estimate of the B spread of a given seed set
    #[command(after_long_help = INFLUENCE_FIELDS)]
    Influence(InfluenceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Kout,
    Er,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "kout")]
    kind: GraphKind,
    /// Number of nodes
    #[arg(long)]
    n: usize,
    /// Out-degree for `kout`
    #[arg(long, default_value_t = 5)]
    k_out: usize,
    /// Arc probability for `er`
    #[arg(long, default_value_t = 0.01)]
    p_edge: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Set each arc probability to 1 / in-degree of its head
    #[arg(long)]
    weighted_ic: bool,
    /// Set every arc probability to this value
    #[arg(long, conflicts_with = "weighted_ic")]
    uniform: Option<f64>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Edge list with lines `u v [p]`; `#` starts a comment
    #[arg(long)]
    graph: PathBuf,
    /// Treat every line as two opposite arcs
    #[arg(long)]
    undirected: bool,
    /// Replace probabilities with 1 / in-degree (applied anyway when the file has none)
    #[arg(long)]
    weighted_ic: bool,
}

#[derive(Args, Clone)]
#[group(multiple = false)]
struct SeedAArgs {
    /// File of opponent seed ids, whitespace separated
    #[arg(long)]
    seed_a_file: Option<PathBuf>,
    /// Opponent seeds from a TCIM run with no opponent, epsilon 0.5 and ell 1
    #[arg(long, value_name = "J")]
    seed_a_auto: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    seed_a: SeedAArgs,
    #[arg(long, default_value = "coicm", value_parser = parse_model)]
    model: ModelKind,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulations for the Monte-Carlo spread of the result (0 skips it)
    #[arg(long, default_value_t = 50_000)]
    sims: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Algorithm {
    Tcim,
    Greedymc,
    Celf,
    Celfpp,
    Singlediscount,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Tcim => "tcim",
            Algorithm::Greedymc => "greedymc",
            Algorithm::Celf => "celf",
            Algorithm::Celfpp => "celfpp",
            Algorithm::Singlediscount => "singlediscount",
        }
    }
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    seed_a: SeedAArgs,
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    #[arg(long, default_value = "coicm", value_parser = parse_model)]
    model: ModelKind,
    #[arg(long)]
    k: usize,
    /// Monte-Carlo simulations per spread evaluation
    #[arg(long, default_value_t = 10_000)]
    r: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50_000)]
    sims: u64,
    /// Also report the simulation count the greedy guarantee requires
    #[arg(long)]
    print_min_r: bool,
    /// Accuracy used by --print-min-r
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Confidence exponent used by --print-min-r
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Fixed opponent seed file; overrides --seed-a-sizes
    #[arg(long)]
    seed_a_file: Option<PathBuf>,
    /// Opponent set sizes, each generated as with --seed-a-auto
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed_a_sizes: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "tcim")]
    algorithms: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "coicm", value_parser = parse_model)]
    model: Vec<ModelKind>,
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    epsilon: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    #[arg(long, default_value_t = 10_000)]
    r: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50_000)]
    sims: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct InfluenceArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    seed_a: SeedAArgs,
    /// File of B seed ids, whitespace separated
    #[arg(long)]
    seed_b_file: PathBuf,
    #[arg(long, default_value = "coicm", value_parser = parse_model)]
    model: ModelKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50_000)]
    sims: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Contract(_) => 3,
            Error::Io(_) | Error::Parse { .. } => 4,
            Error::Domain(_) | Error::TooLarge(_) => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: 4,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            code: 4,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn open_input(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure {
        code: 4,
        message: format!("{}: {e}", path.display()),
    })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure {
            code: 4,
            message: format!("{}: {e}", p.display()),
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_graph(args: &GraphArgs) -> Result<DirectedGraph, Failure> {
    let directedness = if args.undirected {
        Directedness::Undirected
    } else {
        Directedness::Directed
    };
    let g = load_edge_list(open_input(&args.graph)?, directedness).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", args.graph.display(), f.message);
        f
    })?;
    if args.weighted_ic || !g.probabilities_assigned() {
        Ok(g.with_weighted_ic())
    } else {
        Ok(g)
    }
}

fn read_ids(path: &Path, n: usize) -> Result<NodeSet, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 4,
        message: format!("{}: {e}", path.display()),
    })?;
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let id: NodeId = tok.parse().map_err(|_| Failure {
                code: 4,
                message: format!("{}:{}: bad node id `{tok}`", path.display(), i + 1),
            })?;
            ids.push(id);
        }
    }
    Ok(NodeSet::from_nodes(n, ids)?)
}

/// Opponent seeds: the top `j` picks of TCIM without an opponent.
fn auto_seed_a(graph: &DirectedGraph, model: ModelKind, j: usize, seed: u64) -> Result<NodeSet, Failure> {
    let n = graph.node_count();
    if j == 0 {
        return Ok(NodeSet::new(n));
    }
    let params = TcimParams::new(j, 0.5, 1.0, model, derive_seed(seed, 0xA));
    let res = tcim(graph, &NodeSet::new(n), &params)?;
    Ok(NodeSet::from_nodes(n, res.seeds_b)?)
}

fn resolve_seed_a(
    args: &SeedAArgs,
    graph: &DirectedGraph,
    model: ModelKind,
    seed: u64,
) -> Result<NodeSet, Failure> {
    match (&args.seed_a_file, args.seed_a_auto) {
        (Some(path), _) => read_ids(path, graph.node_count()),
        (None, Some(j)) => auto_seed_a(graph, model, j, seed),
        (None, None) => Ok(NodeSet::new(graph.node_count())),
    }
}

fn spread_mc(
    model: ModelKind,
    graph: &DirectedGraph,
    s_a: &NodeSet,
    seeds: &[NodeId],
    sims: u64,
    seed: u64,
) -> Result<Option<f64>, Failure> {
    if sims == 0 {
        return Ok(None);
    }
    let s_b = NodeSet::from_nodes(graph.node_count(), seeds.iter().copied())?;
    Ok(Some(estimate_sigma_mc(
        model,
        graph,
        s_a,
        &s_b,
        sims,
        derive_seed(seed, 0xE),
    )?))
}

fn join_ids(ids: &[NodeId]) -> String {
    ids.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize, Default)]
struct Row {
    algorithm: String,
    model: String,
    k: usize,
    epsilon: Option<f64>,
    seed_a_size: usize,
    seeds: String,
    spread_mc: Option<f64>,
    wall_time_secs: Option<f64>,
    theta: Option<u64>,
    lb_estimate: Option<f64>,
    lb_refined: Option<f64>,
    spread_estimate: Option<f64>,
    memory_estimate: Option<u64>,
    simulations_used: Option<u64>,
    error: Option<String>,
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CmdResult {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_csv(path: Option<&Path>, rows: &[Row]) -> CmdResult {
    let mut w = csv::Writer::from_writer(output(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    let kind = match args.kind {
        GraphKind::Kout => SyntheticKind::RandomKOut { k_out: args.k_out },
        GraphKind::Er => SyntheticKind::ErdosRenyi { p_edge: args.p_edge },
    };
    let mut g = generate_synthetic(kind, args.n, args.seed)?;
    if args.weighted_ic {
        g = g.with_weighted_ic();
    } else if let Some(p) = args.uniform {
        g = g.with_uniform_probability(p)?;
    }
    let mut out = output(args.out.as_deref())?;
    g.write_edge_list(&mut out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SelectRecord {
    model: ModelKind,
    k: usize,
    epsilon: f64,
    ell: f64,
    seed: u64,
    seeds_a: Vec<NodeId>,
    seeds: Vec<NodeId>,
    theta: u64,
    lb_estimate: f64,
    lb_refined: f64,
    spread_estimate: f64,
    spread_mc: Option<f64>,
    instances_generated: u64,
    coins_total: u64,
    timings: PhaseTimings,
    peak_memory_estimate: u64,
}

fn tcim_row(res: &TcimResult, model: ModelKind, epsilon: f64, s_a: &NodeSet, mc: Option<f64>) -> Row {
    Row {
        algorithm: "tcim".into(),
        model: model.to_string(),
        k: res.seeds_b.len(),
        epsilon: Some(epsilon),
        seed_a_size: s_a.len(),
        seeds: join_ids(&res.seeds_b),
        spread_mc: mc,
        wall_time_secs: Some(res.timings.total_secs),
        theta: Some(res.theta),
        lb_estimate: Some(res.lb_estimate),
        lb_refined: Some(res.lb_refined),
        spread_estimate: Some(res.spread_estimate),
        memory_estimate: Some(res.peak_memory_estimate),
        ..Row::default()
    }
}

fn cmd_select(args: SelectArgs) -> CmdResult {
    let graph = load_graph(&args.graph)?;
    let s_a = resolve_seed_a(&args.seed_a, &graph, args.model, args.seed)?;
    let params = TcimParams::new(args.k, args.epsilon, args.ell, args.model, args.seed);
    let res = tcim(&graph, &s_a, &params)?;
    let mc = spread_mc(args.model, &graph, &s_a, &res.seeds_b, args.sims, args.seed)?;
    match args.format {
        Format::Json => write_json(
            args.out.as_deref(),
            &SelectRecord {
                model: args.model,
                k: args.k,
                epsilon: args.epsilon,
                ell: args.ell,
                seed: args.seed,
                seeds_a: s_a.to_sorted_vec(),
                seeds: res.seeds_b.clone(),
                theta: res.theta,
                lb_estimate: res.lb_estimate,
                lb_refined: res.lb_refined,
                spread_estimate: res.spread_estimate,
                spread_mc: mc,
                instances_generated: res.instances_generated,
                coins_total: res.coins_total,
                timings: res.timings,
                peak_memory_estimate: res.peak_memory_estimate,
            },
        ),
        Format::Csv => write_csv(args.out.as_deref(), &[tcim_row(&res, args.model, args.epsilon, &s_a, mc)]),
    }
}

fn run_baseline(
    algorithm: Algorithm,
    model: ModelKind,
    graph: &DirectedGraph,
    s_a: &NodeSet,
    k: usize,
    r: u64,
    seed: u64,
) -> Result<BaselineResult, Failure> {
    Ok(match algorithm {
        Algorithm::Greedymc => greedy_mc(model, graph, s_a, k, r, seed)?,
        Algorithm::Celf => celf(model, graph, s_a, k, r, seed, false)?,
        Algorithm::Celfpp => celf(model, graph, s_a, k, r, seed, true)?,
        Algorithm::Singlediscount => single_discount(graph, s_a, k)?,
        Algorithm::Tcim => unreachable!("tcim is not a baseline"),
    })
}

#[derive(Serialize)]
struct BaselineRecord {
    algorithm: &'static str,
    model: ModelKind,
    k: usize,
    r: u64,
    seed: u64,
    seeds_a: Vec<NodeId>,
    seeds: Vec<NodeId>,
    spread_estimate: Option<f64>,
    spread_mc: Option<f64>,
    evaluations: u64,
    simulations_used: u64,
    wall_time_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_r: Option<u64>,
}

fn baseline_row(algorithm: Algorithm, model: ModelKind, s_a: &NodeSet, res: &BaselineResult, mc: Option<f64>) -> Row {
    Row {
        algorithm: algorithm.name().into(),
        model: model.to_string(),
        k: res.seeds_b.len(),
        seed_a_size: s_a.len(),
        seeds: join_ids(&res.seeds_b),
        spread_mc: mc,
        wall_time_secs: Some(res.wall_time_secs),
        spread_estimate: res.spread_estimate,
        simulations_used: Some(res.simulations_used),
        ..Row::default()
    }
}

fn cmd_baseline(args: BaselineArgs) -> CmdResult {
    if args.algorithm == Algorithm::Tcim {
        return Err(Failure {
            code: 2,
            message: "use `tcim select` for the tcim algorithm".into(),
        });
    }
    let graph = load_graph(&args.graph)?;
    let s_a = resolve_seed_a(&args.seed_a, &graph, args.model, args.seed)?;
    let min_r = if args.print_min_r {
        // the refined lower bound from a quick TCIM run stands in for the optimum
        let params = TcimParams::new(args.k, 0.5, args.ell, args.model, derive_seed(args.seed, 0xB));
        let lb = tcim(&graph, &s_a, &params)?.lb_refined;
        Some(greedymc_min_r(graph.node_count(), args.k, args.ell, args.epsilon, lb)?)
    } else {
        None
    };
    let res = run_baseline(args.algorithm, args.model, &graph, &s_a, args.k, args.r, args.seed)?;
    let mc = spread_mc(args.model, &graph, &s_a, &res.seeds_b, args.sims, args.seed)?;
    match args.format {
        Format::Json => write_json(
            args.out.as_deref(),
            &BaselineRecord {
                algorithm: args.algorithm.name(),
                model: args.model,
                k: args.k,
                r: args.r,
                seed: args.seed,
                seeds_a: s_a.to_sorted_vec(),
                seeds: res.seeds_b.clone(),
                spread_estimate: res.spread_estimate,
                spread_mc: mc,
                evaluations: res.evaluations,
                simulations_used: res.simulations_used,
                wall_time_secs: res.wall_time_secs,
                min_r,
            },
        ),
        Format::Csv => {
            if let Some(r) = min_r {
                eprintln!("min_r = {r}");
            }
            write_csv(
                args.out.as_deref(),
                &[baseline_row(args.algorithm, args.model, &s_a, &res, mc)],
            )
        }
    }
}

fn grid_cell(
    args: &GridArgs,
    graph: &DirectedGraph,
    s_a: &NodeSet,
    algorithm: Algorithm,
    model: ModelKind,
    k: usize,
    epsilon: Option<f64>,
) -> Result<Row, Failure> {
    let seed = args.seed;
    if let Some(eps) = epsilon {
        let res = tcim(graph, s_a, &TcimParams::new(k, eps, args.ell, model, seed))?;
        let mc = spread_mc(model, graph, s_a, &res.seeds_b, args.sims, seed)?;
        Ok(tcim_row(&res, model, eps, s_a, mc))
    } else {
        let res = run_baseline(algorithm, model, graph, s_a, k, args.r, seed)?;
        let mc = spread_mc(model, graph, s_a, &res.seeds_b, args.sims, seed)?;
        Ok(baseline_row(algorithm, model, s_a, &res, mc))
    }
}

fn cmd_grid(args: GridArgs) -> CmdResult {
    let graph = load_graph(&args.graph)?;
    if args.epsilon.is_empty() || args.seed_a_sizes.is_empty() {
        return Err(Failure {
            code: 2,
            message: "grid lists must be nonempty".into(),
        });
    }
    let mut rows = Vec::new();
    for &model in &args.model {
        let opponents: Vec<Result<NodeSet, Failure>> = match &args.seed_a_file {
            Some(path) => vec![read_ids(path, graph.node_count())],
            None => args
                .seed_a_sizes
                .iter()
                .map(|&j| auto_seed_a(&graph, model, j, args.seed))
                .collect(),
        };
        for (oi, s_a) in opponents.iter().enumerate() {
            for &algorithm in &args.algorithms {
                for &k in &args.k {
                    let epsilons: Vec<Option<f64>> = if algorithm == Algorithm::Tcim {
                        args.epsilon.iter().map(|&e| Some(e)).collect()
                    } else {
                        vec![None]
                    };
                    for eps in epsilons {
                        let row = match s_a {
                            Ok(s_a) => grid_cell(&args, &graph, s_a, algorithm, model, k, eps),
                            Err(f) => Err(Failure {
                                code: f.code,
                                message: format!("opponent seeds: {}", f.message),
                            }),
                        };
                        rows.push(row.unwrap_or_else(|f| Row {
                            algorithm: algorithm.name().into(),
                            model: model.to_string(),
                            k,
                            epsilon: eps,
                            seed_a_size: match s_a {
                                Ok(s) => s.len(),
                                Err(_) => args.seed_a_sizes.get(oi).copied().unwrap_or(0),
                            },
                            error: Some(f.message),
                            ..Row::default()
                        }));
                    }
                }
            }
        }
    }
    match args.format {
        Format::Csv => write_csv(args.out.as_deref(), &rows),
        Format::Json => write_json(args.out.as_deref(), &rows),
    }
}

#[derive(Serialize)]
struct InfluenceRecord {
    model: ModelKind,
    sims: u64,
    seed: u64,
    seeds_a: Vec<NodeId>,
    seeds_b: Vec<NodeId>,
    spread_mc: f64,
}

fn cmd_influence(args: InfluenceArgs) -> CmdResult {
    let graph = load_graph(&args.graph)?;
    let s_a = resolve_seed_a(&args.seed_a, &graph, args.model, args.seed)?;
    let s_b = read_ids(&args.seed_b_file, graph.node_count())?;
    let spread = estimate_sigma_mc(args.model, &graph, &s_a, &s_b, args.sims, args.seed)?;
    let record = InfluenceRecord {
        model: args.model,
        sims: args.sims,
        seed: args.seed,
        seeds_a: s_a.to_sorted_vec(),
        seeds_b: s_b.to_sorted_vec(),
        spread_mc: spread,
    };
    match args.format {
        Format::Json => write_json(args.out.as_deref(), &record),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
            w.write_record(["model", "sims", "seed", "seeds_a", "seeds_b", "spread_mc"])?;
            w.write_record([
                record.model.to_string(),
                record.sims.to_string(),
                record.seed.to_string(),
                join_ids(&record.seeds_a),
                join_ids(&record.seeds_b),
                record.spread_mc.to_string(),
            ])?;
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Select(a) => cmd_select(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Influence(a) => cmd_influence(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
