//! Reference implementations used to cross-check the engine.
//!
//! Nothing here shares code with the filtering or enumeration paths: the
//! answer oracle is a plain nested loop over label match sets, and
//! [`BfsReach`] computes reachability by one breadth-first search per node.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::DataGraph;
use crate::nodeset::{NodeId, NodeSet};
use crate::query::{EdgeKind, PatternQuery, QueryNodeId};
use crate::reach::ReachIndex;
use crate::sim::{EdgeMatcher, EdgeTester};

/// Upper bound on the nested-loop search space.
pub const ORACLE_GUARD: f64 = 1e7;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("search space of about {estimate:.3e} assignments exceeds the oracle guard")]
    TooLarge { estimate: f64 },
}

pub type Answer = BTreeSet<Vec<NodeId>>;

/// Exact answer of `q` on `g` by exhaustive search.
pub fn brute_force_oracle(q: &PatternQuery, g: &DataGraph, ix: &ReachIndex) -> Result<Answer, OracleError> {
    brute_force_with(q, g, &EdgeMatcher::new(g, ix))
}

/// Exhaustive search with an arbitrary edge test.
pub fn brute_force_with<T: EdgeTester>(q: &PatternQuery, g: &DataGraph, tester: &T) -> Result<Answer, OracleError> {
    let k = q.num_nodes();
    let ms: Vec<Vec<NodeId>> = (0..k).map(|n| label_matches(q, g, n)).collect();
    let estimate: f64 = ms.iter().map(|s| s.len() as f64).product();
    if estimate > ORACLE_GUARD {
        return Err(OracleError::TooLarge { estimate });
    }
    Ok(run_search(q, &ms, tester, usize::MAX))
}

/// The first `limit` occurrences in lexicographic order, without the
/// search-space guard. Fewer than `limit` means the answer is complete.
pub fn brute_force_capped<T: EdgeTester>(q: &PatternQuery, g: &DataGraph, tester: &T, limit: usize) -> Answer {
    let ms: Vec<Vec<NodeId>> = (0..q.num_nodes()).map(|n| label_matches(q, g, n)).collect();
    run_search(q, &ms, tester, limit)
}

fn run_search<T: EdgeTester>(q: &PatternQuery, ms: &[Vec<NodeId>], tester: &T, limit: usize) -> Answer {
    let k = q.num_nodes();
    // Edges checked once both endpoints are assigned, i.e. at the later qid.
    let mut checks: Vec<Vec<(QueryNodeId, QueryNodeId, EdgeKind)>> = vec![Vec::new(); k];
    for e in q.edges() {
        checks[e.tail.max(e.head)].push((e.tail, e.head, e.kind));
    }
    let mut out = Answer::new();
    let mut tuple = vec![0; k];
    if limit > 0 {
        search(0, ms, &checks, tester, &mut tuple, &mut out, limit);
    }
    out
}

fn label_matches(q: &PatternQuery, g: &DataGraph, n: QueryNodeId) -> Vec<NodeId> {
    (0..g.num_nodes() as NodeId)
        .filter(|&v| g.label_name(g.label(v)) == q.label(n))
        .collect()
}

fn search<T: EdgeTester>(
    n: usize,
    ms: &[Vec<NodeId>],
    checks: &[Vec<(QueryNodeId, QueryNodeId, EdgeKind)>],
    tester: &T,
    tuple: &mut Vec<NodeId>,
    out: &mut Answer,
    limit: usize,
) {
    if n == ms.len() {
        out.insert(tuple.clone());
        return;
    }
    for &v in &ms[n] {
        tuple[n] = v;
        if checks[n]
            .iter()
            .all(|&(a, b, kind)| tester.edge_matches(kind, tuple[a], tuple[b]))
        {
            search(n + 1, ms, checks, tester, tuple, out, limit);
            if out.len() >= limit {
                return;
            }
        }
    }
}

/// Reachability by BFS from every node; `reaches(u, u)` only on a cycle.
pub struct BfsReach {
    closure: Vec<NodeSet>,
}

impl BfsReach {
    pub fn new(g: &DataGraph) -> Self {
        let n = g.num_nodes() as NodeId;
        let closure = (0..n)
            .map(|s| {
                let mut seen = NodeSet::new();
                let mut queue: VecDeque<NodeId> = g.out_neighbors(s).iter().collect();
                for v in g.out_neighbors(s).iter() {
                    seen.insert(v);
                }
                while let Some(u) = queue.pop_front() {
                    for v in g.out_neighbors(u).iter() {
                        if seen.insert(v) {
                            queue.push_back(v);
                        }
                    }
                }
                seen
            })
            .collect();
        BfsReach { closure }
    }

    pub fn reaches(&self, u: NodeId, v: NodeId) -> bool {
        self.closure[u as usize].contains(v)
    }
}

/// Direct edges from adjacency, reachability edges from [`BfsReach`].
pub struct BfsTester<'a> {
    pub graph: &'a DataGraph,
    pub reach: BfsReach,
}

impl<'a> BfsTester<'a> {
    pub fn new(graph: &'a DataGraph) -> Self {
        BfsTester {
            graph,
            reach: BfsReach::new(graph),
        }
    }
}

impl EdgeTester for BfsTester<'_> {
    fn edge_matches(&self, kind: EdgeKind, u: NodeId, v: NodeId) -> bool {
        match kind {
            EdgeKind::Direct => self.graph.has_edge(u, v),
            EdgeKind::Reachability => self.reach.reaches(u, v),
        }
    }
}

/// Projection of an answer onto each query node.
pub fn occurrence_sets(answer: &Answer, k: usize) -> Vec<NodeSet> {
    let mut os = vec![NodeSet::new(); k];
    for t in answer {
        for (n, &v) in t.iter().enumerate() {
            os[n].insert(v);
        }
    }
    os
}

/// Projection of an answer onto each query edge.
pub fn occurrence_edges(answer: &Answer, q: &PatternQuery) -> Vec<BTreeSet<(NodeId, NodeId)>> {
    q.edges()
        .iter()
        .map(|e| answer.iter().map(|t| (t[e.tail], t[e.head])).collect())
        .collect()
}

/// Label match sets computed by scanning every node's label.
pub fn naive_match_sets(q: &PatternQuery, g: &DataGraph) -> Vec<NodeSet> {
    (0..q.num_nodes())
        .map(|n| label_matches(q, g, n).into_iter().collect())
        .collect()
}

/// Label- and structure-feasible pairs per query edge, by double loop.
pub fn naive_match_edges<T: EdgeTester>(
    q: &PatternQuery,
    g: &DataGraph,
    tester: &T,
) -> Vec<BTreeSet<(NodeId, NodeId)>> {
    let ms = naive_match_sets(q, g);
    q.edges()
        .iter()
        .map(|e| {
            let mut pairs = BTreeSet::new();
            for u in ms[e.tail].iter() {
                for v in ms[e.head].iter() {
                    if tester.edge_matches(e.kind, u, v) {
                        pairs.insert((u, v));
                    }
                }
            }
            pairs
        })
        .collect()
}
