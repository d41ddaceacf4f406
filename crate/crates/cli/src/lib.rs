//! Command-line front end: `query`, `fuzz`, `bench` and `convert`.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rigmatch::pipeline::{OrderChoice, PipelineConfig};
use rigmatch::{DataGraph, EnumLimits, PatternQuery, RigMode, SimAlgorithm};

pub mod bench;
pub mod convert;
pub mod fuzz;
pub mod query;

/// Exit status of a completed run.
pub const EXIT_COMPLETE: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_LIMITS: i32 = 3;
pub const EXIT_FUZZ_FAILED: i32 = 4;

/// Outcome of a subcommand that ran to the end.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Complete,
    LimitsTripped,
    FuzzFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Complete => EXIT_COMPLETE,
            Status::LimitsTripped => EXIT_LIMITS,
            Status::FuzzFailed => EXIT_FUZZ_FAILED,
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or inconsistent configuration.
    Usage(String),
    /// Unreadable or malformed input files.
    Input(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
        }
    }
}

pub type CmdResult = Result<Status, Failure>;

#[derive(Debug, Parser)]
#[command(name = "rigmatch", version, about = "Hybrid graph pattern matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate pattern queries on a data graph.
    Query(query::QueryArgs),
    /// Check the engine against brute-force oracles on random instances.
    Fuzz(fuzz::FuzzArgs),
    /// Time queries and write one CSV row per query.
    Bench(bench::BenchArgs),
    /// Convert `v`/`e` or edge-list files into the graph text format.
    Convert(convert::ConvertArgs),
}

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Query(a) => query::run(&a),
        Command::Fuzz(a) => fuzz::run(&a),
        Command::Bench(a) => bench::run(&a),
        Command::Convert(a) => convert::run(&a),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Refined,
    Match,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimArg {
    Bas,
    Dag,
    Auto,
}

/// `exact` or a pass count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimCap {
    Exact,
    Passes(usize),
}

fn parse_sim_cap(s: &str) -> Result<SimCap, String> {
    if s == "exact" {
        return Ok(SimCap::Exact);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(SimCap::Passes(n)),
        _ => Err(format!("expected `exact` or a positive pass count, got `{s}`")),
    }
}

/// `jo`, `ri` or a comma-separated list of query node ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderArg {
    Jo,
    Ri,
    List(Vec<usize>),
}

fn parse_order(s: &str) -> Result<OrderArg, String> {
    match s {
        "jo" => Ok(OrderArg::Jo),
        "ri" => Ok(OrderArg::Ri),
        _ => s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map(OrderArg::List)
            .map_err(|_| format!("expected `jo`, `ri` or a list like `0,2,1`, got `{s}`")),
    }
}

/// Pipeline flags shared by `query` and `bench`.
#[derive(Clone, Debug, Args)]
pub struct PipelineArgs {
    /// RIG flavour.
    #[arg(long, value_enum, default_value = "refined")]
    pub mode: ModeArg,
    /// Double simulation algorithm; `dag` rejects cyclic queries.
    #[arg(long, value_enum, default_value = "auto")]
    pub sim: SimArg,
    /// Simulation pass cap: `exact` or N.
    #[arg(long, value_parser = parse_sim_cap, default_value = "3")]
    pub sim_cap: SimCap,
    /// Search order: `jo`, `ri` or explicit qids such as `1,0,2`.
    #[arg(long, value_parser = parse_order, default_value = "jo")]
    pub order: OrderArg,
    /// Stop after this many matches.
    #[arg(long)]
    pub max_matches: Option<u64>,
    /// Wall-clock budget for the whole evaluation, in milliseconds.
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    /// Evaluate the query as written, without transitive reduction.
    #[arg(long)]
    pub no_reduce: bool,
}

impl PipelineArgs {
    /// Pipeline configuration on top of `limits`, overridden by explicit
    /// flags.
    pub fn config(&self, limits: EnumLimits) -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        cfg.rig.mode = match self.mode {
            ModeArg::Refined => RigMode::Refined,
            ModeArg::Match => RigMode::Match,
        };
        cfg.rig.algorithm = self.algorithm();
        cfg.rig.sim.max_passes = match self.sim_cap {
            SimCap::Exact => None,
            SimCap::Passes(n) => Some(n),
        };
        cfg.order = match &self.order {
            OrderArg::Jo => OrderChoice::Jo,
            OrderArg::Ri => OrderChoice::Ri,
            OrderArg::List(seq) => OrderChoice::Explicit(seq.clone()),
        };
        cfg.limits = limits;
        if let Some(k) = self.max_matches {
            cfg.limits.max_matches = Some(k);
        }
        if let Some(ms) = self.timeout_ms {
            cfg.limits.timeout = Some(Duration::from_millis(ms));
        }
        cfg.reduce = !self.no_reduce;
        cfg
    }

    pub fn algorithm(&self) -> SimAlgorithm {
        match self.sim {
            SimArg::Bas => SimAlgorithm::Basic,
            SimArg::Dag => SimAlgorithm::Dag,
            SimArg::Auto => SimAlgorithm::Auto,
        }
    }

    /// Rejects settings that cannot apply to `q`.
    pub fn validate(&self, q: &PatternQuery) -> Result<(), String> {
        if self.sim == SimArg::Dag && !q.is_dag() {
            return Err("--sim dag requires an acyclic query".into());
        }
        if let OrderArg::List(seq) = &self.order {
            rigmatch::validate_order(q, seq).map_err(|e| format!("--order: {e}"))?;
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn load_graph(path: &Path) -> Result<DataGraph, Failure> {
    DataGraph::parse(open(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn load_query(path: &Path) -> Result<PatternQuery, Failure> {
    PatternQuery::parse(open(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub(crate) fn io_failure(path: Option<&PathBuf>, e: std::io::Error) -> Failure {
    match path {
        Some(p) => Failure::Input(format!("{}: {e}", p.display())),
        None => Failure::Input(format!("stdout: {e}")),
    }
}

/// Milliseconds with microsecond resolution.
pub fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}
