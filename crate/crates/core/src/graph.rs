//! The immutable node-labeled data graph.
//!
//! Text format (line oriented, `#` starts a comment line):
//!
//! ```text
//! t <num_nodes> <num_edges>
//! v <id> <label>        one per node, ids 0..num_nodes-1
//! e <src> <dst>         one per edge
//! ```
//!
//! When the loaded graph is acyclic the nodes are renumbered internally so that
//! ascending id order equals depth-first discovery order. All algorithms work
//! on internal ids; [`DataGraph::external_id`] maps back to the ids of the
//! source file.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::nodeset::{NodeId, NodeSet};

/// Interned node label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reverse(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: node {id} out of range for a graph of {num_nodes} nodes")]
    IdOutOfRange { line: usize, id: u64, num_nodes: usize },
    #[error("node {id} out of range for a graph of {num_nodes} nodes")]
    NodeOutOfRange { id: u64, num_nodes: usize },
    #[error("node {id} has no label")]
    MissingLabel { id: u64 },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Incrementally assembles a [`DataGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<Label>,
    label_names: Vec<String>,
    label_lookup: HashMap<String, Label>,
    edges: Vec<(NodeId, NodeId)>,
    keep_order: bool,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keep the insertion ids even when the graph is a DAG.
    pub fn keep_order(mut self, keep: bool) -> Self {
        self.keep_order = keep;
        self
    }

    pub fn intern(&mut self, name: &str) -> Label {
        if let Some(&l) = self.label_lookup.get(name) {
            return l;
        }
        let l = Label(self.label_names.len() as u32);
        self.label_names.push(name.to_owned());
        self.label_lookup.insert(name.to_owned(), l);
        l
    }

    /// Adds a node and returns its (external) id.
    pub fn add_node(&mut self, label: &str) -> NodeId {
        let l = self.intern(label);
        self.labels.push(l);
        (self.labels.len() - 1) as NodeId
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn add_edge(&mut self, src: NodeId, dst: NodeId) -> Result<(), GraphError> {
        let n = self.labels.len();
        for id in [src, dst] {
            if id as usize >= n {
                return Err(GraphError::NodeOutOfRange {
                    id: id as u64,
                    num_nodes: n,
                });
            }
        }
        self.edges.push((src, dst));
        Ok(())
    }

    pub fn build(self) -> DataGraph {
        let n = self.labels.len();
        let mut out: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(s, d) in &self.edges {
            out[s as usize].push(d);
        }
        for row in &mut out {
            row.sort_unstable();
            row.dedup();
        }
        let is_dag = is_acyclic(&out);

        let (to_internal, to_external) = if is_dag && !self.keep_order {
            let order = dfs_preorder(&out);
            let mut to_internal = vec![0; n];
            for (new, &old) in order.iter().enumerate() {
                to_internal[old as usize] = new as NodeId;
            }
            (Some(to_internal), Some(order))
        } else {
            (None, None)
        };
        let map = |v: NodeId| match &to_internal {
            Some(m) => m[v as usize],
            None => v,
        };

        let mut labels = vec![Label(0); n];
        for (ext, &l) in self.labels.iter().enumerate() {
            labels[map(ext as NodeId) as usize] = l;
        }
        let mut fwd = vec![NodeSet::new(); n];
        let mut bwd = vec![NodeSet::new(); n];
        let mut num_edges = 0;
        for (s, row) in out.iter().enumerate() {
            let si = map(s as NodeId);
            for &d in row {
                let di = map(d);
                fwd[si as usize].insert(di);
                bwd[di as usize].insert(si);
                num_edges += 1;
            }
        }
        let mut inverted = vec![NodeSet::new(); self.label_names.len()];
        for (v, l) in labels.iter().enumerate() {
            inverted[l.0 as usize].insert(v as NodeId);
        }

        DataGraph {
            labels,
            label_names: self.label_names,
            label_lookup: self.label_lookup,
            fwd,
            bwd,
            inverted,
            num_edges,
            is_dag,
            to_internal,
            to_external,
        }
    }
}

/// Kahn's algorithm; self-loops make a graph cyclic.
fn is_acyclic(out: &[Vec<NodeId>]) -> bool {
    let n = out.len();
    let mut indeg = vec![0usize; n];
    for row in out {
        for &d in row {
            indeg[d as usize] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &d in &out[v] {
            indeg[d as usize] -= 1;
            if indeg[d as usize] == 0 {
                stack.push(d as usize);
            }
        }
    }
    seen == n
}

/// Depth-first discovery order; roots and children in ascending id order.
fn dfs_preorder(out: &[Vec<NodeId>]) -> Vec<NodeId> {
    let n = out.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        order.push(root as NodeId);
        stack.push((root, 0));
        while let Some(top) = stack.last_mut() {
            let (v, pos) = *top;
            if pos < out[v].len() {
                top.1 += 1;
                let w = out[v][pos] as usize;
                if !visited[w] {
                    visited[w] = true;
                    order.push(w as NodeId);
                    stack.push((w, 0));
                }
            } else {
                stack.pop();
            }
        }
    }
    order
}

/// Directed node-labeled graph with forward/backward adjacency and inverted lists.
#[derive(Clone)]
pub struct DataGraph {
    labels: Vec<Label>,
    label_names: Vec<String>,
    label_lookup: HashMap<String, Label>,
    fwd: Vec<NodeSet>,
    bwd: Vec<NodeSet>,
    inverted: Vec<NodeSet>,
    num_edges: usize,
    is_dag: bool,
    to_internal: Option<Vec<NodeId>>,
    to_external: Option<Vec<NodeId>>,
}

impl DataGraph {
    /// Parses the graph text format.
    pub fn parse<R: BufRead>(reader: R) -> Result<DataGraph, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut node_labels: Vec<Option<String>> = Vec::new();
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tok = trimmed.split_whitespace();
            let kind = tok.next().unwrap_or_default();
            let parse_err = |msg: String| GraphError::Parse { line: line_no, msg };
            let mut int = |what: &str| -> Result<u64, GraphError> {
                let t = tok.next().ok_or_else(|| parse_err(format!("missing {what}")))?;
                t.parse::<u64>().map_err(|_| parse_err(format!("invalid {what} `{t}`")))
            };
            match kind {
                "t" => {
                    if header.is_some() {
                        return Err(parse_err("duplicate `t` header".into()));
                    }
                    let n = int("node count")? as usize;
                    let m = int("edge count")? as usize;
                    if n > u32::MAX as usize {
                        return Err(parse_err("node count exceeds 32-bit ids".into()));
                    }
                    node_labels = vec![None; n];
                    edges.reserve(m);
                    header = Some((n, m));
                }
                "v" | "e" if header.is_none() => {
                    return Err(parse_err("`t` header must come first".into()));
                }
                "v" => {
                    let id = int("node id")?;
                    let n = node_labels.len();
                    if id as usize >= n {
                        return Err(GraphError::IdOutOfRange {
                            line: line_no,
                            id,
                            num_nodes: n,
                        });
                    }
                    let label = tok.next().ok_or(GraphError::MissingLabel { id })?;
                    let slot = &mut node_labels[id as usize];
                    if slot.is_some() {
                        return Err(parse_err(format!("node {id} declared twice")));
                    }
                    *slot = Some(label.to_owned());
                }
                "e" => {
                    let src = int("edge source")?;
                    let dst = int("edge target")?;
                    let n = node_labels.len();
                    for id in [src, dst] {
                        if id as usize >= n {
                            return Err(GraphError::IdOutOfRange {
                                line: line_no,
                                id,
                                num_nodes: n,
                            });
                        }
                    }
                    edges.push((src as NodeId, dst as NodeId));
                }
                other => return Err(parse_err(format!("unknown record type `{other}`"))),
            }
        }

        let (_, m) = header.ok_or_else(|| GraphError::Format("missing `t` header".into()))?;
        if edges.len() != m {
            return Err(GraphError::Format(format!(
                "header declares {m} edges but {} were listed",
                edges.len()
            )));
        }
        let mut b = GraphBuilder::new();
        for (id, label) in node_labels.iter().enumerate() {
            match label {
                Some(l) => {
                    b.add_node(l);
                }
                None => return Err(GraphError::MissingLabel { id: id as u64 }),
            }
        }
        for (s, d) in edges {
            b.add_edge(s, d)?;
        }
        Ok(b.build())
    }

    pub fn parse_str(text: &str) -> Result<DataGraph, GraphError> {
        Self::parse(text.as_bytes())
    }

    /// Writes the graph in the text format using external ids, nodes then
    /// edges in ascending order.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t {} {}", self.num_nodes(), self.num_edges)?;
        for ext in 0..self.num_nodes() as NodeId {
            let v = self.internal_id(ext).expect("dense id range");
            writeln!(w, "v {} {}", ext, self.label_name(self.label(v)))?;
        }
        let mut edges: Vec<(NodeId, NodeId)> = self
            .edges()
            .map(|(u, v)| (self.external_id(u), self.external_id(v)))
            .collect();
        edges.sort_unstable();
        for (u, v) in edges {
            writeln!(w, "e {u} {v}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("labels are UTF-8")
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn num_labels(&self) -> usize {
        self.label_names.len()
    }

    pub fn is_dag(&self) -> bool {
        self.is_dag
    }

    /// Whether internal ids differ from the ids of the source.
    pub fn is_renumbered(&self) -> bool {
        self.to_external.is_some()
    }

    pub fn label(&self, v: NodeId) -> Label {
        self.labels[v as usize]
    }

    pub fn label_name(&self, l: Label) -> &str {
        &self.label_names[l.0 as usize]
    }

    pub fn lookup_label(&self, name: &str) -> Option<Label> {
        self.label_lookup.get(name).copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.label_names.len() as u32).map(Label)
    }

    pub fn inverted(&self, l: Label) -> &NodeSet {
        &self.inverted[l.0 as usize]
    }

    /// Nodes carrying label `name`; empty when the label does not occur.
    pub fn inverted_list(&self, name: &str) -> NodeSet {
        self.lookup_label(name)
            .map(|l| self.inverted(l).clone())
            .unwrap_or_default()
    }

    pub fn adjacency(&self, v: NodeId, dir: Direction) -> Result<&NodeSet, GraphError> {
        if v as usize >= self.num_nodes() {
            return Err(GraphError::NodeOutOfRange {
                id: v as u64,
                num_nodes: self.num_nodes(),
            });
        }
        Ok(self.neighbors(v, dir))
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId, dir: Direction) -> &NodeSet {
        match dir {
            Direction::Forward => &self.fwd[v as usize],
            Direction::Backward => &self.bwd[v as usize],
        }
    }

    #[inline]
    pub fn out_neighbors(&self, v: NodeId) -> &NodeSet {
        &self.fwd[v as usize]
    }

    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> &NodeSet {
        &self.bwd[v as usize]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.fwd[u as usize].contains(v)
    }

    /// Nodes reachable from `v` by a nonempty path along `dir`, or `None` once
    /// more than `budget` nodes have been collected.
    pub fn closure_within(&self, v: NodeId, dir: Direction, budget: usize) -> Option<NodeSet> {
        let mut seen = NodeSet::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for w in self.neighbors(u, dir).iter() {
                if seen.insert(w) {
                    if seen.len() > budget {
                        return None;
                    }
                    stack.push(w);
                }
            }
        }
        Some(seen)
    }

    /// All edges as internal id pairs, grouped by source.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.fwd
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |v| (u as NodeId, v)))
    }

    pub fn external_id(&self, v: NodeId) -> NodeId {
        match &self.to_external {
            Some(m) => m[v as usize],
            None => v,
        }
    }

    pub fn internal_id(&self, ext: NodeId) -> Option<NodeId> {
        if ext as usize >= self.num_nodes() {
            return None;
        }
        Some(match &self.to_internal {
            Some(m) => m[ext as usize],
            None => ext,
        })
    }

    /// Subgraph induced by `keep` (internal ids), numbered by ascending
    /// internal id of the kept nodes.
    pub fn induced_subgraph(&self, keep: &NodeSet) -> DataGraph {
        let mut b = GraphBuilder::new();
        let mut remap = HashMap::with_capacity(keep.len());
        for v in keep {
            let id = b.add_node(self.label_name(self.label(v)));
            remap.insert(v, id);
        }
        for u in keep {
            for v in self.out_neighbors(u).intersection(keep).iter() {
                b.add_edge(remap[&u], remap[&v]).expect("remapped ids are in range");
            }
        }
        b.build()
    }
}

impl fmt::Debug for DataGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DataGraph")
            .field("nodes", &self.num_nodes())
            .field("edges", &self.num_edges)
            .field("labels", &self.label_names.len())
            .field("is_dag", &self.is_dag)
            .finish()
    }
}
