//! The `gp2s` command line: `gen`, `solve`, `train`, `bench` and `expr`.
//!
//! Every subcommand first prints its effective configuration to stderr as a
//! complete command line, so a run can be repeated exactly.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bench::{run_bench, BenchOptions, Measure};
use crate::bnb::{solve_with, BnbError, Limits, SolveOptions, Strategy};
use crate::expr::{self, count_perfect_trees, random_tree, NodeContext, ParseError, DEFAULT_BIG_M};
use crate::gp::{evolve_with_progress, FitnessKind, GpConfig, GpError};
use crate::milp::{
    gen_er_graph, gen_fcmcnf, gen_gisp, gen_maxsat, read_instance, write_instance, FcmcnfParams, GispParams,
    MaxsatParams, Milp, MilpError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Instance { path: String, source: MilpError },
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Solve(#[from] BnbError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error("{path}: {source}")]
    Expr { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gp2s", version, about = "MILP branch and bound with evolvable node selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic MILP-TXT instances.
    Gen(GenArgs),
    /// Solve one instance and print a JSON report.
    Solve(SolveArgs),
    /// Evolve a scoring expression on a directory of instances.
    Train(TrainArgs),
    /// Run strategies over a directory of instances.
    Bench(BenchArgs),
    /// Inspect, evaluate or sample scoring expressions.
    Expr(ExprArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InstanceType {
    Gisp,
    Maxsat,
    Fcmcnf,
}

impl fmt::Display for InstanceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceType::Gisp => "gisp",
            InstanceType::Maxsat => "maxsat",
            InstanceType::Fcmcnf => "fcmcnf",
        })
    }
}

/// An inclusive integer range written `a` or `a-b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub lo: u32,
    pub hi: u32,
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("`{s}` is not `a` or `a-b`"));
        let (lo, hi) = match s.split_once('-') {
            Some((a, b)) => (num(a)?, num(b)?),
            None => (num(s)?, num(s)?),
        };
        if lo > hi {
            return Err(format!("empty range `{s}`"));
        }
        Ok(Span { lo, hi })
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}-{}", self.lo, self.hi)
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long = "type", value_enum)]
    pub kind: InstanceType,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    /// Graph size `a` or range `a-b` [default: gisp/maxsat 15-25, fcmcnf 6]
    #[arg(long)]
    pub nodes_graph: Option<Span>,
    /// Edge probability [default: gisp/maxsat 0.6, fcmcnf 0.3]
    #[arg(long)]
    pub edge_prob: Option<f64>,
    #[arg(long, env = "GP2S_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "instances")]
    pub out: PathBuf,
    /// GISP vertex revenue.
    #[arg(long, default_value_t = 100.0)]
    pub revenue: f64,
    /// GISP edge removal cost.
    #[arg(long, default_value_t = 1.0)]
    pub removal_cost: f64,
    /// GISP probability that an edge is removable.
    #[arg(long, default_value_t = 0.5)]
    pub removable_prob: f64,
    /// MAXSAT clause weight.
    #[arg(long, default_value_t = 1.0)]
    pub clause_weight: f64,
    /// FCMCNF commodities per graph node.
    #[arg(long, default_value_t = 1.5)]
    pub commodity_ratio: f64,
    /// FCMCNF fixed arc cost range.
    #[arg(long, default_value = "50-100")]
    pub fixed_cost: Span,
    /// FCMCNF unit flow cost range.
    #[arg(long, default_value = "10-20")]
    pub unit_cost: Span,
}

#[derive(Debug, Args, Clone)]
pub struct LimitArgs {
    /// Seconds per solve.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// LP relaxations per solve.
    #[arg(long)]
    pub node_limit: Option<u64>,
}

impl LimitArgs {
    fn limits(&self, fallback: Limits) -> Result<Limits> {
        if let Some(t) = self.time_limit {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Usage(format!("--time-limit {t} must be positive")));
            }
        }
        if self.time_limit.is_none() && self.node_limit.is_none() {
            return Ok(fallback);
        }
        Ok(Limits {
            time: self.time_limit.map(std::time::Duration::from_secs_f64),
            nodes: self.node_limit,
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// MILP-TXT file.
    pub instance: PathBuf,
    /// `lb-bfs`, `be-bfs`, `be-dfs`, `expr:<file.ssx>` or `score:<expression>`.
    #[arg(long, default_value = "lb-bfs")]
    pub strategy: String,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[arg(long, default_value_t = DEFAULT_BIG_M)]
    pub big_m: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of `.milp` training instances.
    pub instances: PathBuf,
    #[arg(long, default_value = "nodes")]
    pub fitness: FitnessKind,
    #[arg(long, default_value_t = 50)]
    pub pop: usize,
    #[arg(long, default_value_t = 50)]
    pub gens: usize,
    #[arg(long, default_value_t = 5)]
    pub tournament: usize,
    #[arg(long, default_value_t = 0.9)]
    pub p_mate: f64,
    #[arg(long, default_value_t = 0.1)]
    pub p_mutate: f64,
    #[arg(long, default_value_t = 1.2)]
    pub p_size: f64,
    #[arg(long, default_value_t = 1)]
    pub d_init_min: usize,
    #[arg(long, default_value_t = 17)]
    pub d_init_max: usize,
    #[arg(long, default_value_t = 1)]
    pub d_mut_min: usize,
    #[arg(long, default_value_t = 5)]
    pub d_mut_max: usize,
    /// Per-instance limits [default: 50000 nodes, or 10 s for gap fitness]
    #[command(flatten)]
    pub limits: LimitArgs,
    #[arg(long, default_value_t = DEFAULT_BIG_M)]
    pub big_m: f64,
    #[arg(long, env = "GP2S_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = "train_out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of `.milp` instances.
    pub instances: PathBuf,
    /// Strategies to compare, comma separated or repeated.
    #[arg(long, value_delimiter = ',', default_value = "lb-bfs,be-bfs,be-dfs")]
    pub strategy: Vec<String>,
    /// Per-solve limits [default: 50000 nodes]
    #[command(flatten)]
    pub limits: LimitArgs,
    #[arg(long, default_value = "time")]
    pub measure: Measure,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Record wall times as 0 so reports are byte-for-byte reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, default_value = "bench_out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExprArgs {
    /// An expression, or a path to a `.ssx` file.
    pub source: Option<String>,
    /// Print the number of perfect trees of depth R instead.
    #[arg(long, value_name = "R", conflicts_with_all = ["source", "random"])]
    pub count_trees: Option<u32>,
    /// Sample a random tree instead of reading one.
    #[arg(long, conflicts_with = "source")]
    pub random: bool,
    #[arg(long, default_value_t = 1)]
    pub d_min: usize,
    #[arg(long, default_value_t = 17)]
    pub d_max: usize,
    #[arg(long, env = "GP2S_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub estimate: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lb: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub rootlb: f64,
    #[arg(long, default_value_t = 0)]
    pub ncons: usize,
    #[arg(long, default_value_t = 0)]
    pub nvars: usize,
    #[arg(long, default_value_t = DEFAULT_BIG_M)]
    pub big_m: f64,
}

/// Parses the process arguments and runs; errors print to stderr with exit 1.
pub fn run() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Runs a parsed invocation and returns the process exit code.
pub fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Expr(a) => cmd_expr(&a),
    }
}

fn header(sub: &str, flags: &[(&str, String)], positional: Option<&Path>) {
    let mut line = format!("# gp2s {sub}");
    if let Some(p) = positional {
        line.push_str(&format!(" {}", p.display()));
    }
    for (k, v) in flags {
        if v.is_empty() {
            line.push_str(&format!(" --{k}"));
        } else {
            line.push_str(&format!(" --{k} {v}"));
        }
    }
    eprintln!("{line}");
}

fn limit_flags(l: &Limits) -> Vec<(&'static str, String)> {
    let mut v = Vec::new();
    if let Some(t) = l.time {
        v.push(("time-limit", t.as_secs_f64().to_string()));
    }
    if let Some(n) = l.nodes {
        v.push(("node-limit", n.to_string()));
    }
    v
}

/// Per-instance seed derived from the run seed and instance index.
pub fn instance_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

/// Builds instance `index` of a `gen` run.
pub fn generate_instance(a: &GenArgs, index: usize) -> Result<Milp> {
    let span = a.nodes_graph.unwrap_or(match a.kind {
        InstanceType::Gisp | InstanceType::Maxsat => Span { lo: 15, hi: 25 },
        InstanceType::Fcmcnf => Span { lo: 6, hi: 6 },
    });
    let p = a.edge_prob.unwrap_or(match a.kind {
        InstanceType::Gisp | InstanceType::Maxsat => 0.6,
        InstanceType::Fcmcnf => 0.3,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(a.seed, index as u64));
    let n = rng.gen_range(span.lo..=span.hi) as usize;
    let gen_seed: u64 = rng.gen();
    let mut m = match a.kind {
        InstanceType::Gisp => {
            let g = gen_er_graph(n, p, rng.gen())?;
            let params = GispParams {
                revenue: a.revenue,
                removal_cost: a.removal_cost,
                removable_prob: a.removable_prob,
            };
            gen_gisp(&g, &params, gen_seed)?
        }
        InstanceType::Maxsat => {
            let g = gen_er_graph(n, p, rng.gen())?;
            gen_maxsat(n, &g, &MaxsatParams { weight: a.clause_weight }, gen_seed)?
        }
        InstanceType::Fcmcnf => {
            const ATTEMPTS: usize = 1000;
            let g = (0..ATTEMPTS)
                .map(|_| gen_er_graph(n, p, rng.gen()))
                .find(|g| g.as_ref().map_or(true, |g| g.is_connected()))
                .unwrap_or(Err(MilpError::DisconnectedGraph))?;
            let commodities = ((a.commodity_ratio * n as f64).round() as usize).max(1);
            let params = FcmcnfParams {
                fixed_cost: (a.fixed_cost.lo, a.fixed_cost.hi),
                unit_cost: (a.unit_cost.lo, a.unit_cost.hi),
                capacity: None,
            };
            gen_fcmcnf(&g, commodities, &params, gen_seed)?
        }
    };
    m.name = format!("{}_{}_{}", a.kind, a.seed, index);
    Ok(m)
}

fn cmd_gen(a: &GenArgs) -> Result<u8> {
    if a.count == 0 {
        return usage("--count must be at least 1");
    }
    let mut flags = vec![
        ("type", a.kind.to_string()),
        ("count", a.count.to_string()),
    ];
    if let Some(s) = a.nodes_graph {
        flags.push(("nodes-graph", s.to_string()));
    }
    if let Some(p) = a.edge_prob {
        flags.push(("edge-prob", p.to_string()));
    }
    flags.push(("seed", a.seed.to_string()));
    flags.push(("out", a.out.display().to_string()));
    match a.kind {
        InstanceType::Gisp => {
            flags.push(("revenue", a.revenue.to_string()));
            flags.push(("removal-cost", a.removal_cost.to_string()));
            flags.push(("removable-prob", a.removable_prob.to_string()));
        }
        InstanceType::Maxsat => flags.push(("clause-weight", a.clause_weight.to_string())),
        InstanceType::Fcmcnf => {
            flags.push(("commodity-ratio", a.commodity_ratio.to_string()));
            flags.push(("fixed-cost", a.fixed_cost.to_string()));
            flags.push(("unit-cost", a.unit_cost.to_string()));
        }
    }
    header("gen", &flags, None);

    std::fs::create_dir_all(&a.out).map_err(|source| CliError::Io {
        path: a.out.display().to_string(),
        source,
    })?;
    for i in 0..a.count {
        let m = generate_instance(a, i)?;
        let path = a.out.join(format!("{}.milp", m.name));
        write_instance(&m, &path)?;
    }
    eprintln!("wrote {} instances to {}", a.count, a.out.display());
    Ok(0)
}

/// Resolves a strategy spec; `expr:` specs read an `.ssx` file.
pub fn parse_strategy(spec: &str) -> Result<Strategy> {
    if let Some(path) = spec.strip_prefix("expr:") {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_string(),
            source,
        })?;
        let e = expr::parse_ssx(&text).map_err(|source| CliError::Expr {
            path: path.to_string(),
            source,
        })?;
        return Ok(Strategy::ScoreBfs(e));
    }
    spec.parse::<Strategy>().map_err(CliError::Usage)
}

fn cmd_solve(a: &SolveArgs) -> Result<u8> {
    let limits = a.limits.limits(Limits::unlimited())?;
    let mut flags = vec![("strategy", a.strategy.clone())];
    flags.extend(limit_flags(&limits));
    flags.push(("big-m", a.big_m.to_string()));
    header("solve", &flags, Some(&a.instance));

    let strategy = parse_strategy(&a.strategy)?;
    let m = read_instance(&a.instance).map_err(|source| CliError::Instance {
        path: a.instance.display().to_string(),
        source,
    })?;
    let opts = SolveOptions {
        limits,
        big_m: a.big_m,
        trace: false,
    };
    let mut outcome = solve_with(&m, &strategy, &opts)?;
    outcome.strategy = a.strategy.clone();
    println!("{}", outcome.to_json());
    Ok(if outcome.status.hit_limit() { 2 } else { 0 })
}

/// Reads every `.milp` file in `dir`, sorted by file name.
pub fn load_instances(dir: &Path) -> Result<Vec<Milp>> {
    let io_err = |source| CliError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::result::Result<_, _>>()
        .map_err(io_err)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "milp"));
    paths.sort();
    if paths.is_empty() {
        return usage(format!("{}: no .milp instances found", dir.display()));
    }
    paths
        .iter()
        .map(|p| {
            read_instance(p).map_err(|source| CliError::Instance {
                path: p.display().to_string(),
                source,
            })
        })
        .collect()
}

fn cmd_train(a: &TrainArgs) -> Result<u8> {
    let limits = a.limits.limits(a.fitness.default_limits())?;
    let cfg = GpConfig {
        pop_size: a.pop,
        generations: a.gens,
        p_mate: a.p_mate,
        p_mutate: a.p_mutate,
        d_init_min: a.d_init_min,
        d_init_max: a.d_init_max,
        d_mut_min: a.d_mut_min,
        d_mut_max: a.d_mut_max,
        tournament_size: a.tournament,
        p_size: a.p_size,
        fitness_kind: a.fitness,
        limits,
        big_m: a.big_m,
        seed: a.seed,
        jobs: a.jobs.max(1),
    };
    let mut flags = vec![
        ("fitness", a.fitness.to_string()),
        ("pop", a.pop.to_string()),
        ("gens", a.gens.to_string()),
        ("tournament", a.tournament.to_string()),
        ("p-mate", a.p_mate.to_string()),
        ("p-mutate", a.p_mutate.to_string()),
        ("p-size", a.p_size.to_string()),
        ("d-init-min", a.d_init_min.to_string()),
        ("d-init-max", a.d_init_max.to_string()),
        ("d-mut-min", a.d_mut_min.to_string()),
        ("d-mut-max", a.d_mut_max.to_string()),
    ];
    flags.extend(limit_flags(&limits));
    flags.extend([
        ("big-m", a.big_m.to_string()),
        ("seed", a.seed.to_string()),
        ("jobs", cfg.jobs.to_string()),
        ("out", a.out.display().to_string()),
    ]);
    header("train", &flags, Some(&a.instances));
    cfg.validate()?;

    let training = load_instances(&a.instances)?;
    let result = evolve_with_progress(&training, &cfg, |r| {
        eprintln!(
            "generation {:>3}  best {:.6}  population best {:.6}  mean size {:.1}",
            r.generation, r.best_so_far_fitness, r.population_best_fitness, r.mean_size
        );
    })?;
    result.write_outputs(&a.out)?;
    println!("{}", result.best.expr);
    eprintln!(
        "best fitness {} (size {}); wrote {}",
        result.best.fitness.unwrap_or(f64::INFINITY),
        result.best.size(),
        a.out.display()
    );
    Ok(0)
}

fn cmd_bench(a: &BenchArgs) -> Result<u8> {
    let limits = a.limits.limits(Limits::nodes(50_000))?;
    let mut flags = vec![("strategy", a.strategy.join(","))];
    flags.extend(limit_flags(&limits));
    flags.extend([
        ("measure", a.measure.to_string()),
        ("jobs", a.jobs.max(1).to_string()),
    ]);
    if a.no_timing {
        flags.push(("no-timing", String::new()));
    }
    flags.push(("out", a.out.display().to_string()));
    header("bench", &flags, Some(&a.instances));

    if a.strategy.is_empty() {
        return usage("at least one --strategy is required");
    }
    let strategies: Vec<(String, Strategy)> = a
        .strategy
        .iter()
        .map(|s| parse_strategy(s).map(|st| (s.clone(), st)))
        .collect::<Result<_>>()?;
    let instances = load_instances(&a.instances)?;
    let opts = BenchOptions {
        limits,
        measure: a.measure,
        jobs: a.jobs.max(1),
        timing: !a.no_timing,
    };
    let report = run_bench(&instances, &strategies, &opts);
    report.write_csv(&a.out)?;
    print!("{}", report.format_table());
    Ok(0)
}

fn cmd_expr(a: &ExprArgs) -> Result<u8> {
    if let Some(r) = a.count_trees {
        header("expr", &[("count-trees", r.to_string())], None);
        match count_perfect_trees(r) {
            Ok(c) => println!("{c}"),
            Err(e) => return usage(e.to_string()),
        }
        return Ok(0);
    }
    let e = if a.random {
        header(
            "expr",
            &[
                ("random", String::new()),
                ("d-min", a.d_min.to_string()),
                ("d-max", a.d_max.to_string()),
                ("seed", a.seed.to_string()),
            ],
            None,
        );
        if a.d_min > a.d_max {
            return usage("--d-min exceeds --d-max");
        }
        random_tree(&mut ChaCha8Rng::seed_from_u64(a.seed), a.d_min, a.d_max)
    } else {
        let Some(src) = &a.source else {
            return usage("give an expression, a .ssx file, --random or --count-trees");
        };
        let path = Path::new(src);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: src.clone(),
                source,
            })?;
            expr::parse_ssx(&text).map_err(|source| CliError::Expr {
                path: src.clone(),
                source,
            })?
        } else {
            expr::parse(src).map_err(|source| CliError::Expr {
                path: "<argument>".into(),
                source,
            })?
        }
    };
    let ctx = NodeContext {
        depth: a.depth,
        best_estimate: a.estimate,
        lower_bound: a.lb,
        root_dual_bound: a.rootlb,
        num_constraints: a.ncons,
        num_variables: a.nvars,
        big_m: a.big_m,
    };
    if !ctx.is_valid() {
        return usage("node context values must be finite and --big-m positive");
    }
    println!("expr   {e}");
    println!("size   {}", e.size());
    println!("depth  {}", e.depth());
    println!("value  {}", e.evaluate(&ctx));
    Ok(0)
}
