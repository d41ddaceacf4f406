//! Runtime index graph: the per-query search space handed to the enumerator.
//!
//! The select phase fixes a candidate set `cos(q)` per query node, either the
//! double-simulation sets (refined mode) or the raw label match sets (match
//! mode). The expand phase then connects every `v_p ∈ cos(p)` to the members
//! of `cos(q)` that satisfy query edge `(p, q)`. Rows are stored as node sets
//! in both directions so the enumerator can intersect them directly.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::graph::{DataGraph, Direction};
use crate::limits::DeadlineTicker;
use crate::nodeset::{NodeId, NodeSet};
use crate::query::{EdgeKind, PatternQuery, QueryNodeId};
use crate::reach::ReachIndex;
use crate::sim::{match_sets, simulate, SimAlgorithm, SimError, SimOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RigMode {
    /// Candidates from double simulation.
    #[default]
    Refined,
    /// Candidates from label match sets; the largest RIG.
    Match,
}

#[derive(Clone, Copy, Debug)]
pub struct RigConfig {
    pub mode: RigMode,
    pub algorithm: SimAlgorithm,
    /// Also carries the deadline used by the expand phase.
    pub sim: SimOptions,
    /// Bound reachability scans by DFS intervals when ids follow discovery order.
    pub early_termination: bool,
    /// Drop candidates left without a row on some incident edge (refined mode).
    pub trim: bool,
}

impl Default for RigConfig {
    fn default() -> Self {
        RigConfig {
            mode: RigMode::Refined,
            algorithm: SimAlgorithm::Auto,
            sim: SimOptions::default(),
            early_termination: true,
            trim: true,
        }
    }
}

impl RigConfig {
    pub fn with_mode(mut self, mode: RigMode) -> Self {
        self.mode = mode;
        self
    }
}

type Rows = HashMap<NodeId, NodeSet>;

#[derive(Clone, Debug)]
pub struct Rig {
    cos: Vec<NodeSet>,
    fwd: Vec<Rows>,
    bwd: Vec<Rows>,
    empty: bool,
    truncated: bool,
    sim_passes: usize,
    sim_exact: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RigStats {
    pub nodes: usize,
    pub edges: usize,
    /// `(nodes + edges) / (|V| + |E|)`.
    pub ratio: f64,
    pub per_node: Vec<usize>,
    pub per_edge: Vec<usize>,
}

/// Builds the RIG for `q`. Fails only when the DAG sweep is requested for a
/// cyclic query.
pub fn build_rig(q: &PatternQuery, g: &DataGraph, ix: &ReachIndex, cfg: &RigConfig) -> Result<Rig, SimError> {
    let (cos, sim_passes, sim_exact, interrupted) = match cfg.mode {
        RigMode::Refined => {
            let fb = simulate(cfg.algorithm, q, g, ix, &cfg.sim)?;
            (fb.sets().to_vec(), fb.passes(), fb.is_exact(), fb.interrupted())
        }
        RigMode::Match => (match_sets(q, g), 0, false, false),
    };
    let mut rig = Rig {
        cos,
        fwd: vec![Rows::new(); q.num_edges()],
        bwd: vec![Rows::new(); q.num_edges()],
        empty: false,
        truncated: interrupted,
        sim_passes,
        sim_exact,
    };
    if rig.cos.iter().any(NodeSet::is_empty) {
        rig.make_empty();
        return Ok(rig);
    }
    if rig.truncated {
        return Ok(rig);
    }
    let mut ticker = DeadlineTicker::new(cfg.sim.deadline, 6);
    for i in 0..q.num_edges() {
        if !rig.expand(q, i, g, ix, cfg, &mut ticker) {
            rig.truncated = true;
            return Ok(rig);
        }
    }
    if cfg.trim && cfg.mode == RigMode::Refined {
        rig.trim(q);
    }
    if rig.cos.iter().any(NodeSet::is_empty) {
        rig.make_empty();
    }
    Ok(rig)
}

/// Members of `pool` reachable from `u` through a nonempty path.
pub fn reach_row(ix: &ReachIndex, u: NodeId, pool: &NodeSet, early_termination: bool) -> NodeSet {
    if early_termination && ix.ids_follow_discovery() {
        // Ids are DFS discovery times: the subtree of `u` is the id range
        // (u, end) and is reachable wholesale; nothing at or past `end` is.
        let end = ix.interval(u).end;
        let mut row: NodeSet = pool.range(..u).filter(|&v| ix.can_reach(u, v)).collect();
        if ix.on_cycle(u) && pool.contains(u) {
            row.insert(u);
        }
        if end > u + 1 {
            row.extend(pool.range(u + 1..end));
        }
        row
    } else {
        pool.iter().filter(|&v| ix.can_reach(u, v)).collect()
    }
}

impl Rig {
    fn make_empty(&mut self) {
        self.empty = true;
        for s in &mut self.cos {
            s.clear();
        }
        for rows in self.fwd.iter_mut().chain(self.bwd.iter_mut()) {
            rows.clear();
        }
    }

    /// Returns false if the deadline interrupted the expansion.
    fn expand(
        &mut self,
        q: &PatternQuery,
        i: usize,
        g: &DataGraph,
        ix: &ReachIndex,
        cfg: &RigConfig,
        ticker: &mut DeadlineTicker,
    ) -> bool {
        let budget = cfg.sim.local_search_budget;
        let e = q.edge(i);
        let heads = &self.cos[e.head];
        let mut fwd = Rows::new();
        for vp in self.cos[e.tail].iter() {
            if ticker.tick() {
                return false;
            }
            let row = match e.kind {
                EdgeKind::Direct => g.neighbors(vp, Direction::Forward).intersection(heads),
                EdgeKind::Reachability => match budget {
                    0 => reach_row(ix, vp, heads, cfg.early_termination),
                    _ => match g.closure_within(vp, Direction::Forward, budget) {
                        Some(closure) => closure.intersection(heads),
                        None => reach_row(ix, vp, heads, cfg.early_termination),
                    },
                },
            };
            if !row.is_empty() {
                fwd.insert(vp, row);
            }
        }
        let mut bwd = Rows::new();
        for (&vp, row) in &fwd {
            for vq in row.iter() {
                bwd.entry(vq).or_default().insert(vp);
            }
        }
        self.fwd[i] = fwd;
        self.bwd[i] = bwd;
        true
    }

    /// Removes candidates with an empty row on some incident edge, propagating
    /// the removals until every remaining candidate has a row on each edge.
    fn trim(&mut self, q: &PatternQuery) {
        let mut queue: Vec<(QueryNodeId, NodeId)> = Vec::new();
        for (i, e) in q.edges().iter().enumerate() {
            queue.extend(
                self.cos[e.tail]
                    .iter()
                    .filter(|v| !self.fwd[i].contains_key(v))
                    .map(|v| (e.tail, v)),
            );
            queue.extend(
                self.cos[e.head]
                    .iter()
                    .filter(|v| !self.bwd[i].contains_key(v))
                    .map(|v| (e.head, v)),
            );
        }
        while let Some((x, v)) = queue.pop() {
            if !self.cos[x].remove(v) {
                continue;
            }
            for &i in q.out_edges(x) {
                if let Some(row) = self.fwd[i].remove(&v) {
                    let head = q.edge(i).head;
                    detach(&mut self.bwd[i], &row, v, head, &mut queue);
                }
            }
            for &i in q.in_edges(x) {
                if let Some(row) = self.bwd[i].remove(&v) {
                    let tail = q.edge(i).tail;
                    detach(&mut self.fwd[i], &row, v, tail, &mut queue);
                }
            }
        }
    }

    pub fn num_query_nodes(&self) -> usize {
        self.cos.len()
    }

    pub fn num_query_edges(&self) -> usize {
        self.fwd.len()
    }

    /// Candidate occurrence set of query node `q`.
    pub fn cos(&self, q: QueryNodeId) -> &NodeSet {
        &self.cos[q]
    }

    pub fn cos_sets(&self) -> &[NodeSet] {
        &self.cos
    }

    /// Row of `v` on query edge `i`: heads adjacent to tail `v` when `dir` is
    /// forward, tails adjacent to head `v` when backward.
    pub fn row(&self, i: usize, dir: Direction, v: NodeId) -> Option<&NodeSet> {
        match dir {
            Direction::Forward => self.fwd[i].get(&v),
            Direction::Backward => self.bwd[i].get(&v),
        }
    }

    pub fn has_edge(&self, i: usize, u: NodeId, v: NodeId) -> bool {
        self.fwd[i].get(&u).is_some_and(|r| r.contains(v))
    }

    /// Candidate edges of query edge `i`, sorted.
    pub fn edge_pairs(&self, i: usize) -> Vec<(NodeId, NodeId)> {
        let mut out: Vec<(NodeId, NodeId)> = self.fwd[i]
            .iter()
            .flat_map(|(&u, row)| row.iter().map(move |v| (u, v)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn num_edges_of(&self, i: usize) -> usize {
        self.fwd[i].values().map(NodeSet::len).sum()
    }

    /// True when some candidate set is empty, so the answer is empty.
    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// True when the deadline stopped construction; the RIG is then unusable.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn sim_passes(&self) -> usize {
        self.sim_passes
    }

    pub fn sim_exact(&self) -> bool {
        self.sim_exact
    }

    pub fn stats(&self, g: &DataGraph) -> RigStats {
        rig_stats(self, g)
    }

    /// `c <qid> <ids>` lines, then the RIG in the graph text format with one
    /// node per (qid, candidate) in the listed order. Ids are external.
    pub fn write_dump<W: Write>(&self, q: &PatternQuery, g: &DataGraph, mut w: W) -> io::Result<()> {
        let mut base = Vec::with_capacity(self.cos.len());
        let mut next = 0usize;
        for (qid, set) in self.cos.iter().enumerate() {
            base.push(next);
            next += set.len();
            write!(w, "c {qid}")?;
            for v in set.iter() {
                write!(w, " {}", g.external_id(v))?;
            }
            writeln!(w)?;
        }
        let position = |qid: QueryNodeId, v: NodeId| -> usize { base[qid] + self.cos[qid].range(..v).count() };
        let edges: usize = (0..self.fwd.len()).map(|i| self.num_edges_of(i)).sum();
        writeln!(w, "t {next} {edges}")?;
        for (qid, set) in self.cos.iter().enumerate() {
            for (k, _) in set.iter().enumerate() {
                writeln!(w, "v {} {}", base[qid] + k, q.label(qid))?;
            }
        }
        for (i, e) in q.edges().iter().enumerate() {
            for (u, v) in self.edge_pairs(i) {
                writeln!(w, "e {} {}", position(e.tail, u), position(e.head, v))?;
            }
        }
        Ok(())
    }
}

fn detach(
    rows: &mut Rows,
    partners: &NodeSet,
    v: NodeId,
    partner_qid: QueryNodeId,
    queue: &mut Vec<(QueryNodeId, NodeId)>,
) {
    for w in partners.iter() {
        if let Some(r) = rows.get_mut(&w) {
            r.remove(v);
            if r.is_empty() {
                rows.remove(&w);
                queue.push((partner_qid, w));
            }
        }
    }
}

pub fn rig_stats(rig: &Rig, g: &DataGraph) -> RigStats {
    let per_node: Vec<usize> = rig.cos.iter().map(NodeSet::len).collect();
    let per_edge: Vec<usize> = (0..rig.fwd.len()).map(|i| rig.num_edges_of(i)).collect();
    let nodes: usize = per_node.iter().sum();
    let edges: usize = per_edge.iter().sum();
    let size = g.num_nodes() + g.num_edges();
    let ratio = if size == 0 {
        0.0
    } else {
        (nodes + edges) as f64 / size as f64
    };
    RigStats {
        nodes,
        edges,
        ratio,
        per_node,
        per_edge,
    }
}
