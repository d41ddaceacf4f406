//! `rigmatch bench`: one CSV row per query with the timing split.
//!
//! A workload file lists one graph per line followed by its queries:
//!
//! ```text
//! # graph          queries...
//! data/g.txt       q1.txt q2.txt
//! ```
//!
//! Relative paths resolve against the workload file's directory.

use std::fs::File;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rigmatch::generate::{clustered_dag, templates, ClusteredParams, EdgeMix};
use rigmatch::{DataGraph, EnumLimits, Matcher, PatternQuery};

use crate::{io_failure, load_graph, load_query, millis, CmdResult, Failure, PipelineArgs, Status};

pub const CSV_HEADER: [&str; 12] = [
    "graph",
    "query",
    "nodes",
    "edges",
    "sim_passes",
    "rig_nodes",
    "rig_edges",
    "rig_ratio",
    "match_ms",
    "enum_ms",
    "matches",
    "completed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MixArg {
    Child,
    Hybrid,
    Descendant,
    All,
}

#[derive(Clone, Debug, Args)]
pub struct BenchArgs {
    /// Workload file of `<graph> <query>...` lines.
    #[arg(long, short, conflicts_with = "synthetic")]
    pub workload: Option<PathBuf>,
    /// Generate a clustered DAG and run every template on it.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long, default_value_t = 100_000, requires = "synthetic")]
    pub nodes: usize,
    #[arg(long, default_value_t = 500_000, requires = "synthetic")]
    pub edges: usize,
    #[arg(long, default_value_t = 20, requires = "synthetic")]
    pub labels: usize,
    /// Seed for the synthetic graph and query labels.
    #[arg(long, default_value_t = 1, requires = "synthetic")]
    pub seed: u64,
    /// Edge kinds of the synthetic template instances.
    #[arg(long, value_enum, default_value = "hybrid", requires = "synthetic")]
    pub mix: MixArg,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

struct Entry {
    graph: PathBuf,
    queries: Vec<PathBuf>,
}

fn parse_workload(path: &Path) -> Result<Vec<Entry>, Failure> {
    let file = File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for line in io::BufReader::new(file).lines() {
        let line = line.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut paths = line.split_whitespace().map(|p| dir.join(p));
        let graph = paths.next().expect("nonempty line has a token");
        out.push(Entry {
            graph,
            queries: paths.collect(),
        });
    }
    Ok(out)
}

struct Row<'a> {
    graph: &'a str,
    query: &'a str,
    nodes: usize,
    edges: usize,
}

struct Bench<W: Write> {
    csv: csv::Writer<W>,
    tripped: bool,
    errors: usize,
}

impl<W: Write> Bench<W> {
    fn failure(&mut self, row: Row<'_>, err: &str) -> Result<(), Failure> {
        log::error!("{} / {}: {err}", row.graph, row.query);
        self.errors += 1;
        let (n, m) = (row.nodes.to_string(), row.edges.to_string());
        self.csv
            .write_record([row.graph, row.query, &n, &m, "", "", "", "", "", "", "", "error"])
            .map_err(csv_failure)
    }

    fn run(&mut self, matcher: &Matcher<'_>, row: Row<'_>, q: &PatternQuery, args: &BenchArgs) -> Result<(), Failure> {
        if let Err(e) = args.pipeline.validate(q) {
            return self.failure(row, &e);
        }
        let cfg = args.pipeline.config(EnumLimits::benchmark());
        let r = match matcher.count(q, &cfg) {
            Ok(r) => r,
            Err(e) => return self.failure(row, &e.to_string()),
        };
        self.tripped |= !r.completed();
        self.csv
            .write_record([
                row.graph.to_string(),
                row.query.to_string(),
                row.nodes.to_string(),
                row.edges.to_string(),
                r.sim_passes.to_string(),
                r.rig.nodes.to_string(),
                r.rig.edges.to_string(),
                format!("{:.6}", r.rig.ratio),
                format!("{:.3}", millis(r.match_time)),
                format!("{:.3}", millis(r.enum_time)),
                r.matches().to_string(),
                r.completed().to_string(),
            ])
            .map_err(csv_failure)?;
        self.csv.flush().map_err(|e| io_failure(args.output.as_ref(), e))
    }
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::Input(format!("csv output: {e}"))
}

pub fn run(args: &BenchArgs) -> CmdResult {
    if args.workload.is_none() && !args.synthetic {
        return Err(Failure::Usage("give --workload <file> or --synthetic".into()));
    }
    let sink: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(File::create(p).map_err(|e| io_failure(Some(p), e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut bench = Bench {
        csv: csv::Writer::from_writer(sink),
        tripped: false,
        errors: 0,
    };
    bench.csv.write_record(CSV_HEADER).map_err(csv_failure)?;
    bench.csv.flush().map_err(|e| io_failure(args.output.as_ref(), e))?;

    if args.synthetic {
        synthetic(&mut bench, args)?;
    } else if let Some(w) = &args.workload {
        for entry in parse_workload(w)? {
            let gname = entry.graph.display().to_string();
            let g = match load_graph(&entry.graph) {
                Ok(g) => g,
                Err(e) => {
                    for qp in &entry.queries {
                        let row = Row {
                            graph: &gname,
                            query: &qp.display().to_string(),
                            nodes: 0,
                            edges: 0,
                        };
                        bench.failure(row, &e.to_string())?;
                    }
                    continue;
                }
            };
            let matcher = Matcher::new(&g);
            for qp in &entry.queries {
                let qname = qp.display().to_string();
                let row = Row {
                    graph: &gname,
                    query: &qname,
                    nodes: g.num_nodes(),
                    edges: g.num_edges(),
                };
                match load_query(qp) {
                    Ok(q) => bench.run(&matcher, row, &q, args)?,
                    Err(e) => bench.failure(row, &e.to_string())?,
                }
            }
        }
    }
    bench.csv.flush().map_err(|e| io_failure(args.output.as_ref(), e))?;
    if bench.errors > 0 {
        return Err(Failure::Input(format!(
            "{} queries failed; see the error rows",
            bench.errors
        )));
    }
    Ok(if bench.tripped {
        Status::LimitsTripped
    } else {
        Status::Complete
    })
}

fn synthetic<W: Write>(bench: &mut Bench<W>, args: &BenchArgs) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let params = ClusteredParams {
        nodes: args.nodes,
        edges: args.edges,
        labels: args.labels,
        ..ClusteredParams::desk_scale()
    };
    let g: DataGraph = clustered_dag(&mut rng, params);
    let gname = format!(
        "synthetic-n{}-e{}-l{}-s{}",
        args.nodes, args.edges, args.labels, args.seed
    );
    let mixes: &[(EdgeMix, &str)] = match args.mix {
        MixArg::Child => &[(EdgeMix::Child, "C")],
        MixArg::Hybrid => &[(EdgeMix::Hybrid, "H")],
        MixArg::Descendant => &[(EdgeMix::Descendant, "D")],
        MixArg::All => &[
            (EdgeMix::Child, "C"),
            (EdgeMix::Hybrid, "H"),
            (EdgeMix::Descendant, "D"),
        ],
    };
    let matcher = Matcher::new(&g);
    for t in templates() {
        for &(mix, tag) in mixes {
            let q = t.random_instance(&mut rng, args.labels, mix);
            let qname = format!("{}-{tag}", t.name);
            let row = Row {
                graph: &gname,
                query: &qname,
                nodes: g.num_nodes(),
                edges: g.num_edges(),
            };
            bench.run(&matcher, row, &q, args)?;
        }
    }
    Ok(())
}
