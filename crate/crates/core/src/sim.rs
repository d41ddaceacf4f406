//! Double simulation: the node filter that seeds the runtime index graph.
//!
//! A data node `v` double-simulates query node `q` when the labels agree, every
//! outgoing query edge of `q` has a match from `v` into the candidates of the
//! edge's head, and every incoming query edge has a match into `v` from the
//! candidates of its tail. The largest such relation is unique and is computed
//! here by repeated pruning, starting from the label match sets.
//!
//! Three drivers share one pruning kernel:
//!
//! * [`fb_sim_bas`] sweeps every edge forward, then every edge backward, in
//!   ascending (tail, head) order until nothing changes;
//! * [`fb_sim_dag`] does a reverse-topological forward sweep followed by a
//!   topological backward sweep (acyclic queries only);
//! * [`fb_sim`] splits a cyclic query into a DAG plus back edges and alternates
//!   the two.
//!
//! The kernel can skip a check when the opposite endpoint has not shrunk since
//! the last time it ran (dirty flags), remembers one witness per candidate and
//! edge direction so survivors are not rescanned, and handles direct edges with
//! one union-then-intersect over adjacency rows. None of these change the
//! result.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{DataGraph, Direction};
use crate::limits::{Deadline, DeadlineTicker};
use crate::nodeset::{NodeId, NodeSet};
use crate::query::{topological_order, EdgeKind, PatternQuery, QueryNodeId};
use crate::reach::ReachIndex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("query contains a directed cycle; the DAG sweep needs an acyclic query")]
    CyclicQuery,
}

/// Structural test of a single query edge against a pair of data nodes.
/// Labels are the caller's concern.
pub trait EdgeTester {
    fn edge_matches(&self, kind: EdgeKind, u: NodeId, v: NodeId) -> bool;
}

/// Adjacency for direct edges, the reachability index for reachability edges.
#[derive(Clone, Copy)]
pub struct EdgeMatcher<'a> {
    pub graph: &'a DataGraph,
    pub index: &'a ReachIndex,
}

impl<'a> EdgeMatcher<'a> {
    pub fn new(graph: &'a DataGraph, index: &'a ReachIndex) -> Self {
        EdgeMatcher { graph, index }
    }
}

impl EdgeTester for EdgeMatcher<'_> {
    #[inline]
    fn edge_matches(&self, kind: EdgeKind, u: NodeId, v: NodeId) -> bool {
        match kind {
            EdgeKind::Direct => self.graph.has_edge(u, v),
            EdgeKind::Reachability => self.index.can_reach(u, v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimAlgorithm {
    Basic,
    Dag,
    /// DAG sweep for acyclic queries, DAG plus back edges otherwise.
    Auto,
}

#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    /// Stop after this many passes; `None` runs to the fixpoint.
    pub max_passes: Option<usize>,
    pub dirty_flags: bool,
    pub witness_index: bool,
    pub batch_direct: bool,
    /// Bound reachability scans by DFS intervals when ids follow discovery order.
    pub early_termination: bool,
    /// Resolve a reachability check by exploring the candidate's own closure
    /// when it has at most this many nodes; 0 disables.
    pub local_search_budget: usize,
    pub deadline: Deadline,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            max_passes: None,
            dirty_flags: true,
            witness_index: true,
            batch_direct: true,
            early_termination: true,
            local_search_budget: 256,
            deadline: Deadline::none(),
        }
    }
}

impl SimOptions {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn capped(passes: usize) -> Self {
        SimOptions {
            max_passes: Some(passes),
            ..Self::default()
        }
    }

    /// Every optimisation off.
    pub fn plain() -> Self {
        SimOptions {
            dirty_flags: false,
            witness_index: false,
            batch_direct: false,
            early_termination: false,
            local_search_budget: 0,
            ..Self::default()
        }
    }
}

/// Work counters, for comparing optimisation settings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimWork {
    pub edge_checks: u64,
    pub skipped_edge_checks: u64,
    pub candidate_checks: u64,
    pub witness_hits: u64,
    pub removed: u64,
}

/// Candidate sets per query node.
#[derive(Clone, Debug)]
pub struct FbRelation {
    sets: Vec<NodeSet>,
    passes: usize,
    exact: bool,
    interrupted: bool,
    work: SimWork,
}

impl FbRelation {
    pub fn set(&self, q: QueryNodeId) -> &NodeSet {
        &self.sets[q]
    }

    pub fn sets(&self) -> &[NodeSet] {
        &self.sets
    }

    pub fn into_sets(self) -> Vec<NodeSet> {
        self.sets
    }

    /// Number of passes executed, including the final confirming one.
    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Whether the fixpoint was reached (as opposed to the pass cap or deadline).
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Whether the deadline stopped the computation.
    pub fn interrupted(&self) -> bool {
        self.interrupted
    }

    pub fn is_empty(&self) -> bool {
        self.sets.iter().any(NodeSet::is_empty)
    }

    pub fn work(&self) -> SimWork {
        self.work
    }
}

/// A query split into an acyclic part and the back edges of a DFS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DagDecomposition {
    /// Edge indices forming an acyclic subquery.
    pub dag_edges: Vec<usize>,
    /// Edge indices of DFS back edges.
    pub back_edges: Vec<usize>,
    /// Topological order of all query nodes w.r.t. `dag_edges`.
    pub topo_order: Vec<QueryNodeId>,
}

/// DFS from the lowest qid (then each unvisited qid ascending), following
/// out-edges in ascending head order. Edges into a node still on the DFS
/// stack are back edges.
pub fn decompose_dag(q: &PatternQuery) -> DagDecomposition {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let k = q.num_nodes();
    let mut color = vec![Color::White; k];
    let mut is_back = vec![false; q.num_edges()];
    for root in 0..k {
        if color[root] != Color::White {
            continue;
        }
        color[root] = Color::Gray;
        let mut stack = vec![(root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (x, pos) = *top;
            let out = q.out_edges(x);
            if pos < out.len() {
                top.1 += 1;
                let i = out[pos];
                let y = q.edge(i).head;
                match color[y] {
                    Color::White => {
                        color[y] = Color::Gray;
                        stack.push((y, 0));
                    }
                    Color::Gray => is_back[i] = true,
                    Color::Black => {}
                }
            } else {
                color[x] = Color::Black;
                stack.pop();
            }
        }
    }
    let (back_edges, dag_edges): (Vec<usize>, Vec<usize>) = (0..q.num_edges()).partition(|&i| is_back[i]);
    let topo_order = topological_order(k, dag_edges.iter().map(|&i| q.edge(i)))
        .expect("removing DFS back edges leaves an acyclic graph");
    DagDecomposition {
        dag_edges,
        back_edges,
        topo_order,
    }
}

/// `candidates ∩ ⋃_{v ∈ frontier} adjacency(v, dir)`.
pub fn batch_direct_check(candidates: &NodeSet, frontier: &NodeSet, dir: Direction, g: &DataGraph) -> NodeSet {
    if candidates.is_empty() || frontier.is_empty() {
        return NodeSet::new();
    }
    let reached = NodeSet::union_all(frontier.iter().map(|v| g.neighbors(v, dir)));
    candidates.intersection(&reached)
}

/// Label match sets `ms(q)` for every query node.
pub fn match_sets(q: &PatternQuery, g: &DataGraph) -> Vec<NodeSet> {
    (0..q.num_nodes()).map(|n| g.inverted_list(q.label(n))).collect()
}

/// Which conditions of the definition to enforce.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Conditions {
    Forward,
    Backward,
    Both,
}

const FWD: usize = 0;
const BWD: usize = 1;

/// One witness per (edge, direction, candidate).
#[derive(Debug, Default)]
struct WitnessIndex {
    slots: Vec<[HashMap<NodeId, NodeId>; 2]>,
}

impl WitnessIndex {
    fn new(num_edges: usize) -> Self {
        WitnessIndex {
            slots: (0..num_edges).map(|_| Default::default()).collect(),
        }
    }
}

struct Simulator<'a> {
    q: &'a PatternQuery,
    g: &'a DataGraph,
    ix: &'a ReachIndex,
    opts: SimOptions,
    sets: Vec<NodeSet>,
    version: Vec<u64>,
    last_seen: Vec<[u64; 2]>,
    witnesses: WitnessIndex,
    ticker: DeadlineTicker,
    work: SimWork,
    short_circuit: bool,
}

impl<'a> Simulator<'a> {
    fn new(q: &'a PatternQuery, g: &'a DataGraph, ix: &'a ReachIndex, opts: &SimOptions) -> Self {
        let sets = match_sets(q, g);
        Simulator {
            q,
            g,
            ix,
            opts: *opts,
            version: vec![0; sets.len()],
            last_seen: vec![[u64::MAX; 2]; q.num_edges()],
            witnesses: WitnessIndex::new(q.num_edges()),
            sets,
            ticker: DeadlineTicker::new(opts.deadline, 8),
            work: SimWork::default(),
            short_circuit: false,
        }
    }

    fn any_empty(&self) -> bool {
        self.sets.iter().any(NodeSet::is_empty)
    }

    /// Runs `pass` until it reports no change, the cap, the deadline or an
    /// emptied set (the latter only when `conditions` is `Both`).
    fn drive<F>(mut self, conditions: Conditions, mut pass: F) -> FbRelation
    where
        F: FnMut(&mut Self) -> bool,
    {
        self.short_circuit = conditions == Conditions::Both;
        let mut passes = 0;
        let mut exact = false;
        if self.short_circuit && self.any_empty() {
            return self.finish(0, true);
        }
        loop {
            if matches!(self.opts.max_passes, Some(cap) if passes >= cap) {
                break;
            }
            passes += 1;
            let changed = pass(&mut self);
            if self.short_circuit && self.any_empty() {
                return self.finish(passes, true);
            }
            if self.ticker.tripped() {
                break;
            }
            if !changed {
                exact = true;
                break;
            }
        }
        self.finish(passes, exact)
    }

    fn finish(mut self, passes: usize, exact: bool) -> FbRelation {
        if self.short_circuit && self.any_empty() {
            for s in &mut self.sets {
                s.clear();
            }
        }
        FbRelation {
            sets: self.sets,
            passes,
            exact: exact && !self.ticker.tripped(),
            interrupted: self.ticker.tripped(),
            work: self.work,
        }
    }

    /// Enforces one edge in one direction: forward removes tail candidates
    /// without a match into the head set, backward the reverse.
    fn prune(&mut self, i: usize, dir: usize) -> bool {
        if self.ticker.tripped() || (self.short_circuit && self.any_empty()) {
            return false;
        }
        let e = self.q.edge(i);
        let (target, other) = if dir == FWD { (e.tail, e.head) } else { (e.head, e.tail) };
        if self.opts.dirty_flags && self.last_seen[i][dir] == self.version[other] {
            self.work.skipped_edge_checks += 1;
            return false;
        }
        self.work.edge_checks += 1;

        let before = self.sets[target].len();
        if e.kind == EdgeKind::Direct && self.opts.batch_direct {
            // Forward keeps tails having a child in the head set, i.e. the
            // union of the head set's in-neighbours, and vice versa.
            let frontier_dir = if dir == FWD {
                Direction::Backward
            } else {
                Direction::Forward
            };
            self.work.candidate_checks += before as u64;
            let kept = batch_direct_check(&self.sets[target], &self.sets[other], frontier_dir, self.g);
            self.sets[target] = kept;
        } else {
            let mut doomed = Vec::new();
            let mut checked = 0usize;
            let pool = std::mem::take(&mut self.sets[target]);
            for cand in pool.iter() {
                if self.ticker.tick() {
                    break;
                }
                checked += 1;
                if !self.has_witness(i, dir, e.kind, cand, other) {
                    doomed.push(cand);
                }
            }
            self.sets[target] = pool;
            self.work.candidate_checks += checked as u64;
            for v in doomed {
                self.sets[target].remove(v);
                if self.opts.witness_index {
                    self.witnesses.slots[i][dir].remove(&v);
                }
            }
            if checked < before {
                // Interrupted: leave the check marked as not done.
                let removed = before - self.sets[target].len();
                if removed > 0 {
                    self.version[target] += 1;
                    self.work.removed += removed as u64;
                }
                return removed > 0;
            }
        }
        let removed = before - self.sets[target].len();
        if removed > 0 {
            self.version[target] += 1;
            self.work.removed += removed as u64;
        }
        self.last_seen[i][dir] = self.version[other];
        removed > 0
    }

    fn has_witness(&mut self, i: usize, dir: usize, kind: EdgeKind, cand: NodeId, other: QueryNodeId) -> bool {
        if self.opts.witness_index {
            if let Some(&w) = self.witnesses.slots[i][dir].get(&cand) {
                if self.sets[other].contains(w) {
                    self.work.witness_hits += 1;
                    return true;
                }
            }
        }
        let found = self.find_witness(dir, kind, cand, &self.sets[other]);
        if let (Some(w), true) = (found, self.opts.witness_index) {
            self.witnesses.slots[i][dir].insert(cand, w);
        }
        found.is_some()
    }

    fn find_witness(&self, dir: usize, kind: EdgeKind, cand: NodeId, pool: &NodeSet) -> Option<NodeId> {
        match (kind, dir) {
            (EdgeKind::Direct, FWD) => self.g.out_neighbors(cand).iter().find(|&v| pool.contains(v)),
            (EdgeKind::Direct, _) => self.g.in_neighbors(cand).iter().find(|&v| pool.contains(v)),
            (EdgeKind::Reachability, _) if self.opts.local_search_budget > 0 => {
                let d = if dir == FWD {
                    Direction::Forward
                } else {
                    Direction::Backward
                };
                match self.g.closure_within(cand, d, self.opts.local_search_budget) {
                    Some(closure) => closure.iter().find(|&v| pool.contains(v)),
                    None => self.scan_witness(dir, cand, pool),
                }
            }
            (EdgeKind::Reachability, _) => self.scan_witness(dir, cand, pool),
        }
    }

    fn scan_witness(&self, dir: usize, cand: NodeId, pool: &NodeSet) -> Option<NodeId> {
        match dir {
            FWD => {
                if self.opts.early_termination && self.ix.ids_follow_discovery() {
                    // Everything inside the DFS subtree is reachable; nothing
                    // discovered after the subtree closes is.
                    let end = self.ix.interval(cand).end;
                    if end > cand + 1 {
                        if let Some(v) = pool.range(cand + 1..end).next() {
                            return Some(v);
                        }
                    }
                    if self.ix.on_cycle(cand) && pool.contains(cand) {
                        return Some(cand);
                    }
                    pool.range(..cand).find(|&v| self.ix.can_reach(cand, v))
                } else {
                    pool.iter().find(|&v| self.ix.can_reach(cand, v))
                }
            }
            _ => pool.iter().find(|&u| self.ix.can_reach(u, cand)),
        }
    }

    fn edge_sweep(&mut self, edges: &[usize], conditions: Conditions) -> bool {
        let mut changed = false;
        if conditions != Conditions::Backward {
            for &i in edges {
                changed |= self.prune(i, FWD);
            }
        }
        if conditions != Conditions::Forward {
            for &i in edges {
                changed |= self.prune(i, BWD);
            }
        }
        changed
    }

    fn dag_sweep(&mut self, in_dag: &[bool], topo: &[QueryNodeId]) -> bool {
        let q = self.q;
        let mut changed = false;
        for &n in topo.iter().rev() {
            for &i in q.out_edges(n) {
                if in_dag[i] {
                    changed |= self.prune(i, FWD);
                }
            }
        }
        for &n in topo {
            for &i in q.in_edges(n) {
                if in_dag[i] {
                    changed |= self.prune(i, BWD);
                }
            }
        }
        changed
    }
}

/// Basic fixpoint: forward prune over all edges, backward prune over all
/// edges, repeat.
pub fn fb_sim_bas(q: &PatternQuery, g: &DataGraph, ix: &ReachIndex, opts: &SimOptions) -> FbRelation {
    let edges: Vec<usize> = (0..q.num_edges()).collect();
    Simulator::new(q, g, ix, opts).drive(Conditions::Both, |s| s.edge_sweep(&edges, Conditions::Both))
}

/// Largest relation satisfying the label and outgoing-edge conditions only.
pub fn forward_sim_only(q: &PatternQuery, g: &DataGraph, ix: &ReachIndex, opts: &SimOptions) -> FbRelation {
    let edges: Vec<usize> = (0..q.num_edges()).collect();
    Simulator::new(q, g, ix, opts).drive(Conditions::Forward, |s| s.edge_sweep(&edges, Conditions::Forward))
}

/// Largest relation satisfying the label and incoming-edge conditions only.
pub fn backward_sim_only(q: &PatternQuery, g: &DataGraph, ix: &ReachIndex, opts: &SimOptions) -> FbRelation {
    let edges: Vec<usize> = (0..q.num_edges()).collect();
    Simulator::new(q, g, ix, opts).drive(Conditions::Backward, |s| s.edge_sweep(&edges, Conditions::Backward))
}

/// Bottom-up forward sweep then top-down backward sweep per pass.
pub fn fb_sim_dag(q: &PatternQuery, g: &DataGraph, ix: &ReachIndex, opts: &SimOptions) -> Result<FbRelation, SimError> {
    let topo = q.topological_order().ok_or(SimError::CyclicQuery)?;
    let in_dag = vec![true; q.num_edges()];
    Ok(Simulator::new(q, g, ix, opts).drive(Conditions::Both, |s| s.dag_sweep(&in_dag, &topo)))
}

/// DAG sweeps on the acyclic part alternating with basic prunes on the back
/// edges; delegates to [`fb_sim_dag`] for acyclic queries.
pub fn fb_sim(q: &PatternQuery, g: &DataGraph, ix: &ReachIndex, opts: &SimOptions) -> FbRelation {
    if let Ok(rel) = fb_sim_dag(q, g, ix, opts) {
        return rel;
    }
    let dec = decompose_dag(q);
    let mut in_dag = vec![false; q.num_edges()];
    for &i in &dec.dag_edges {
        in_dag[i] = true;
    }
    Simulator::new(q, g, ix, opts).drive(Conditions::Both, |s| {
        let a = s.dag_sweep(&in_dag, &dec.topo_order);
        let b = s.edge_sweep(&dec.back_edges, Conditions::Both);
        a | b
    })
}

/// Dispatches on [`SimAlgorithm`]. `Dag` on a cyclic query is an error.
pub fn simulate(
    algorithm: SimAlgorithm,
    q: &PatternQuery,
    g: &DataGraph,
    ix: &ReachIndex,
    opts: &SimOptions,
) -> Result<FbRelation, SimError> {
    match algorithm {
        SimAlgorithm::Basic => Ok(fb_sim_bas(q, g, ix, opts)),
        SimAlgorithm::Dag => fb_sim_dag(q, g, ix, opts),
        SimAlgorithm::Auto => Ok(fb_sim(q, g, ix, opts)),
    }
}
