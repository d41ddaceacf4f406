//! `rigmatch query`: evaluate queries and stream the occurrences.

use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rigmatch::sim::simulate;
use rigmatch::{EnumLimits, Matcher, PatternQuery, PipelineError, PipelineReport};

use crate::{io_failure, load_graph, load_query, millis, CmdResult, Failure, PipelineArgs, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    /// Header, one TSV line per occurrence, trailer.
    Tuples,
    /// Trailer only.
    Count,
    /// Pipeline statistics and trailer.
    Stats,
}

#[derive(Clone, Debug, Args)]
pub struct QueryArgs {
    /// Data graph in the text format.
    #[arg(long, short)]
    pub graph: PathBuf,
    /// Query files; evaluated in order against one index.
    #[arg(long, short, required = true, num_args = 1..)]
    pub query: Vec<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value = "tuples")]
    pub output: OutputArg,
    /// Write the double simulation sets to stderr.
    #[arg(long)]
    pub dump_sim: bool,
    /// Write the RIG to stderr.
    #[arg(long)]
    pub dump_rig: bool,
}

pub fn run(args: &QueryArgs) -> CmdResult {
    let queries: Vec<PatternQuery> = args.query.iter().map(|p| load_query(p)).collect::<Result<_, _>>()?;
    for q in &queries {
        args.pipeline.validate(q).map_err(Failure::Usage)?;
    }
    let g = load_graph(&args.graph)?;
    let matcher = Matcher::new(&g);
    let cfg = args.pipeline.config(EnumLimits::unlimited());
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut status = Status::Complete;
    for (path, q) in args.query.iter().zip(&queries) {
        if queries.len() > 1 {
            writeln!(out, "# query={}", path.display()).map_err(|e| io_failure(None, e))?;
        }
        if args.dump_sim || args.dump_rig {
            dump(&matcher, q, args).map_err(|e| io_failure(None, e))?;
        }
        if args.output == OutputArg::Tuples {
            let header: Vec<String> = (0..q.num_nodes()).map(|i| format!("{i}:{}", q.label(i))).collect();
            writeln!(out, "{}", header.join("\t")).map_err(|e| io_failure(None, e))?;
        }
        let tuples = args.output == OutputArg::Tuples;
        let mut line = String::new();
        let report = matcher
            .run(q, &cfg, |t| {
                if !tuples {
                    return Ok(());
                }
                line.clear();
                for (i, &v) in t.iter().enumerate() {
                    if i > 0 {
                        line.push('\t');
                    }
                    line.push_str(&g.external_id(v).to_string());
                }
                writeln!(out, "{line}")
            })
            .map_err(|e| match e {
                PipelineError::Sink(e) => Failure::Input(format!("stdout: {e}")),
                other => Failure::Usage(other.to_string()),
            })?;
        if args.output == OutputArg::Stats {
            write_stats(&mut out, &report).map_err(|e| io_failure(None, e))?;
        }
        write_trailer(&mut out, &report).map_err(|e| io_failure(None, e))?;
        if !report.completed() {
            status = Status::LimitsTripped;
        }
    }
    out.flush().map_err(|e| io_failure(None, e))?;
    Ok(status)
}

/// `# matches=<n> completed=<bool> elapsed_ms=<t>`.
pub fn write_trailer<W: Write>(w: &mut W, r: &PipelineReport) -> io::Result<()> {
    writeln!(
        w,
        "# matches={} completed={} elapsed_ms={:.3}",
        r.matches(),
        r.completed(),
        millis(r.match_time + r.enum_time)
    )
}

fn write_stats<W: Write>(w: &mut W, r: &PipelineReport) -> io::Result<()> {
    let order: Vec<String> = r.order.iter().map(|q| q.to_string()).collect();
    writeln!(
        w,
        "# query_nodes={} query_edges={} sim_passes={} sim_exact={}",
        r.query.num_nodes(),
        r.query.num_edges(),
        r.sim_passes,
        r.sim_exact
    )?;
    writeln!(
        w,
        "# rig_nodes={} rig_edges={} rig_ratio={:.6} rig_empty={} order={}",
        r.rig.nodes,
        r.rig.edges,
        r.rig.ratio,
        r.rig_empty,
        order.join(",")
    )?;
    writeln!(
        w,
        "# match_ms={:.3} enum_ms={:.3} peak_candidate_cells={}",
        millis(r.match_time),
        millis(r.enum_time),
        r.enumeration.peak_candidate_cells
    )
}

/// Simulation sets and RIG of the query as the pipeline would evaluate it.
fn dump(matcher: &Matcher<'_>, q: &PatternQuery, args: &QueryArgs) -> io::Result<()> {
    let g = matcher.graph();
    let cfg = args.pipeline.config(EnumLimits::unlimited());
    let q = if cfg.reduce {
        q.transitive_reduction()
    } else {
        q.clone()
    };
    let mut err = io::stderr().lock();
    if args.dump_sim {
        let fb = simulate(cfg.rig.algorithm, &q, g, matcher.index(), &cfg.rig.sim)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
        writeln!(err, "# sim passes={} exact={}", fb.passes(), fb.is_exact())?;
        for qid in 0..q.num_nodes() {
            let mut ids: Vec<u32> = fb.set(qid).iter().map(|v| g.external_id(v)).collect();
            ids.sort_unstable();
            write!(err, "s {qid} {}", q.label(qid))?;
            for v in ids {
                write!(err, " {v}")?;
            }
            writeln!(err)?;
        }
    }
    if args.dump_rig {
        let rig = matcher
            .build_rig(&q, &cfg.rig)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
        rig.write_dump(&q, g, &mut err)?;
    }
    Ok(())
}
