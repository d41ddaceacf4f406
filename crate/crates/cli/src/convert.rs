//! `rigmatch convert`: foreign graph files to the graph text format.
//!
//! Two inputs are accepted:
//!
//! * one file of `v <id> <label> ...` and `e <src> <dst> ...` records, with
//!   an optional `t` header and arbitrary trailing columns;
//! * a bare edge list of `<src> <dst>` lines plus a `<id> <label>` file.
//!
//! Ids may be sparse; they are renumbered densely in ascending order. `#`
//! and `%` start comment lines. Duplicate edges are merged.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use rigmatch::GraphBuilder;

use crate::{io_failure, CmdResult, Failure, Status};

#[derive(Clone, Debug, Args)]
pub struct ConvertArgs {
    /// A `v`/`e` record file, or an edge list when --labels is given.
    pub input: PathBuf,
    /// `<id> <label>` lines for an edge-list input.
    #[arg(long, short)]
    pub labels: Option<PathBuf>,
    /// Label for nodes that appear in edges but have no label line.
    #[arg(long)]
    pub default_label: Option<String>,
    /// Destination; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Nodes keyed by original id, plus edges in original ids.
#[derive(Debug, Default)]
pub struct RawGraph {
    pub labels: BTreeMap<u64, String>,
    pub edges: Vec<(u64, u64)>,
}

fn lines(path: &Path) -> Result<impl Iterator<Item = (usize, io::Result<String>)>, Failure> {
    let f = File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(BufReader::new(f).lines().enumerate().map(|(i, l)| (i + 1, l)))
}

fn int(path: &Path, line: usize, tok: Option<&str>, what: &str) -> Result<u64, Failure> {
    let t = tok.ok_or_else(|| Failure::Input(format!("{}:{line}: missing {what}", path.display())))?;
    t.parse()
        .map_err(|_| Failure::Input(format!("{}:{line}: invalid {what} `{t}`", path.display())))
}

fn is_comment(s: &str) -> bool {
    s.is_empty() || s.starts_with('#') || s.starts_with('%')
}

/// Reads a `v`/`e` record file.
pub fn read_records(path: &Path) -> Result<RawGraph, Failure> {
    let mut g = RawGraph::default();
    for (no, line) in lines(path)? {
        let line = line.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let s = line.trim();
        if is_comment(s) {
            continue;
        }
        let mut tok = s.split_whitespace();
        match tok.next() {
            Some("t") => {}
            Some("v") => {
                let id = int(path, no, tok.next(), "node id")?;
                let label = tok
                    .next()
                    .ok_or_else(|| Failure::Input(format!("{}:{no}: node {id} has no label", path.display())))?;
                if g.labels.insert(id, label.to_owned()).is_some() {
                    return Err(Failure::Input(format!(
                        "{}:{no}: node {id} declared twice",
                        path.display()
                    )));
                }
            }
            Some("e") => {
                let u = int(path, no, tok.next(), "edge source")?;
                let v = int(path, no, tok.next(), "edge target")?;
                g.edges.push((u, v));
            }
            Some(other) => {
                return Err(Failure::Input(format!(
                    "{}:{no}: unknown record `{other}`; use --labels for edge lists",
                    path.display()
                )))
            }
            None => unreachable!("blank lines are skipped"),
        }
    }
    Ok(g)
}

/// Reads an edge list and its label file.
pub fn read_edge_list(edges: &Path, labels: &Path) -> Result<RawGraph, Failure> {
    let mut g = RawGraph::default();
    for (no, line) in lines(labels)? {
        let line = line.map_err(|e| Failure::Input(format!("{}: {e}", labels.display())))?;
        let s = line.trim();
        if is_comment(s) {
            continue;
        }
        let mut tok = s.split_whitespace();
        let id = int(labels, no, tok.next(), "node id")?;
        let label = tok
            .next()
            .ok_or_else(|| Failure::Input(format!("{}:{no}: node {id} has no label", labels.display())))?;
        g.labels.insert(id, label.to_owned());
    }
    for (no, line) in lines(edges)? {
        let line = line.map_err(|e| Failure::Input(format!("{}: {e}", edges.display())))?;
        let s = line.trim();
        if is_comment(s) {
            continue;
        }
        let mut tok = s.split_whitespace();
        let u = int(edges, no, tok.next(), "edge source")?;
        let v = int(edges, no, tok.next(), "edge target")?;
        g.edges.push((u, v));
    }
    Ok(g)
}

/// Dense renumbering and text output. Returns (nodes, edges) written.
pub fn write_graph<W: Write>(raw: &RawGraph, default_label: Option<&str>, w: W) -> Result<(usize, usize), Failure> {
    let mut labels = raw.labels.clone();
    for &(u, v) in &raw.edges {
        for id in [u, v] {
            if let Entry::Vacant(slot) = labels.entry(id) {
                let l = default_label.ok_or_else(|| {
                    Failure::Input(format!(
                        "node {id} appears in an edge but has no label; pass --default-label"
                    ))
                })?;
                slot.insert(l.to_owned());
            }
        }
    }
    if labels.len() > u32::MAX as usize {
        return Err(Failure::Input("more nodes than 32-bit ids allow".into()));
    }
    let mut b = GraphBuilder::new().keep_order(true);
    let mut dense = BTreeMap::new();
    for (&id, label) in &labels {
        dense.insert(id, b.add_node(label));
    }
    for &(u, v) in &raw.edges {
        b.add_edge(dense[&u], dense[&v]).expect("every endpoint has a dense id");
    }
    let g = b.build();
    g.write_text(w).map_err(|e| io_failure(None, e))?;
    Ok((g.num_nodes(), g.num_edges()))
}

pub fn run(args: &ConvertArgs) -> CmdResult {
    let raw = match &args.labels {
        Some(l) => read_edge_list(&args.input, l)?,
        None => read_records(&args.input)?,
    };
    let (n, m) = match &args.output {
        Some(p) => {
            let f = File::create(p).map_err(|e| io_failure(Some(p), e))?;
            let mut w = BufWriter::new(f);
            let r = write_graph(&raw, args.default_label.as_deref(), &mut w)?;
            w.flush().map_err(|e| io_failure(Some(p), e))?;
            r
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            let r = write_graph(&raw, args.default_label.as_deref(), &mut w)?;
            w.flush().map_err(|e| io_failure(None, e))?;
            r
        }
    };
    log::info!(
        "converted {n} nodes and {m} edges ({} duplicate edges merged)",
        raw.edges.len() - m
    );
    Ok(Status::Complete)
}
