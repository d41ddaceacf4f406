//! `rigmatch fuzz`: random instances checked against the oracles.

use std::io::{self, Write};

use clap::{Args, ValueEnum};
use rigmatch::fuzz::{check_instance, generate_instance, instance_seed, CheckOptions, FuzzBounds, Mutation};

use crate::{io_failure, CmdResult, Failure, Status};

pub const SEED_ENV: &str = "RIGMATCH_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MutationArg {
    None,
    /// Evaluate the first direct edge as a reachability edge.
    WeakenDirect,
    /// Let the reduction drop a reachability edge it must keep.
    CorruptReduction,
}

#[derive(Clone, Debug, Args)]
pub struct FuzzArgs {
    /// Base seed; the RIGMATCH_SEED environment variable takes precedence.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of instances.
    #[arg(long, short = 'n', default_value_t = 100)]
    pub count: u64,
    /// Largest data graph.
    #[arg(long, default_value_t = 50)]
    pub max_graph_nodes: usize,
    /// Largest query.
    #[arg(long, default_value_t = 6)]
    pub max_query_nodes: usize,
    /// Largest label alphabet.
    #[arg(long, default_value_t = 4)]
    pub max_labels: usize,
    /// Deliberate engine corruption, for checking that the checks bite.
    #[arg(long, value_enum, default_value = "none")]
    pub mutate: MutationArg,
    /// Check the single instance with this instance seed and print it.
    #[arg(long)]
    pub replay: Option<u64>,
}

impl FuzzArgs {
    fn bounds(&self) -> Result<FuzzBounds, Failure> {
        let b = FuzzBounds::default();
        if self.max_graph_nodes < b.min_graph_nodes {
            return Err(Failure::Usage(format!(
                "--max-graph-nodes must be at least {}",
                b.min_graph_nodes
            )));
        }
        if self.max_query_nodes < b.query_nodes.0 {
            return Err(Failure::Usage(format!(
                "--max-query-nodes must be at least {}",
                b.query_nodes.0
            )));
        }
        if self.max_labels < b.min_labels {
            return Err(Failure::Usage(format!(
                "--max-labels must be at least {}",
                b.min_labels
            )));
        }
        Ok(FuzzBounds {
            max_graph_nodes: self.max_graph_nodes,
            query_nodes: (b.query_nodes.0, self.max_query_nodes),
            max_labels: self.max_labels,
            ..b
        })
    }

    fn options(&self) -> CheckOptions {
        CheckOptions {
            mutation: match self.mutate {
                MutationArg::None => None,
                MutationArg::WeakenDirect => Some(Mutation::WeakenFirstDirectEdge),
                MutationArg::CorruptReduction => Some(Mutation::CorruptReduction),
            },
        }
    }

    /// Flags that reproduce instance `seed` under the same bounds.
    fn replay_command(&self, seed: u64) -> String {
        let mut s = format!(
            "rigmatch fuzz --replay {seed} --max-graph-nodes {} --max-query-nodes {} --max-labels {}",
            self.max_graph_nodes, self.max_query_nodes, self.max_labels
        );
        if self.mutate != MutationArg::None {
            s.push_str(&format!(
                " --mutate {}",
                self.mutate.to_possible_value().expect("no skipped variants").get_name()
            ));
        }
        s
    }
}

/// The base seed: RIGMATCH_SEED when set, the flag otherwise.
pub fn base_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(flag),
    }
}

pub fn run(args: &FuzzArgs) -> CmdResult {
    let bounds = args.bounds()?;
    let opts = args.options();
    let mut out = io::stdout().lock();
    let w = |out: &mut io::StdoutLock<'_>, s: String| writeln!(out, "{s}").map_err(|e| io_failure(None, e));

    if let Some(seed) = args.replay {
        let inst = generate_instance(seed, &bounds);
        w(
            &mut out,
            format!("# instance seed={seed} reach_prob={}", inst.reach_prob),
        )?;
        w(&mut out, "# query".into())?;
        w(&mut out, inst.query.to_text().trim_end().to_string())?;
        w(&mut out, "# graph".into())?;
        w(&mut out, inst.graph.to_text().trim_end().to_string())?;
        return match check_instance(&inst, &opts) {
            Ok(s) => {
                w(&mut out, format!("PASS seed={seed} answer={}", s.answer_size))?;
                Ok(Status::Complete)
            }
            Err(v) => {
                w(
                    &mut out,
                    format!("FAIL seed={seed} check={} detail={}", v.check, v.detail),
                )?;
                Ok(Status::FuzzFailed)
            }
        };
    }

    let base = base_seed(args.seed)?;
    w(&mut out, format!("# fuzz seed={base} instances={}", args.count))?;
    let mut passed = 0u64;
    for i in 0..args.count {
        let seed = instance_seed(base, i);
        let inst = generate_instance(seed, &bounds);
        if let Err(v) = check_instance(&inst, &opts) {
            w(
                &mut out,
                format!("FAIL instance={i} seed={seed} check={} detail={}", v.check, v.detail),
            )?;
            w(&mut out, format!("# replay: {}", args.replay_command(seed)))?;
            w(&mut out, format!("# passed={passed} failed=1"))?;
            return Ok(Status::FuzzFailed);
        }
        passed += 1;
    }
    w(&mut out, format!("# passed={passed} failed=0"))?;
    Ok(Status::Complete)
}
