//! Exact reachability oracle over the data graph.
//!
//! The graph is condensed into strongly connected components (numbered in
//! topological order). On the condensation every component carries a DFS
//! interval and a pair of Bloom-style signatures: the out-signature is the OR of
//! the hashed bits of every component it reaches, the in-signature the OR over
//! every component reaching it. Intervals answer tree-descendant positives and
//! "discovered after finish" negatives, signatures reject most remaining
//! negatives, and a pruned, memoized DFS over the condensation settles the rest.
//!
//! `u` reaches `v` means a path of at least one edge. A node reaches itself
//! only when it sits on a cycle (a self-loop counts).

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use crate::graph::{DataGraph, GraphError};
use crate::nodeset::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntervalLabel {
    /// Discovery time.
    pub begin: u32,
    /// Discovery counter value when the node finished (exclusive bound of its subtree).
    pub end: u32,
}

impl IntervalLabel {
    /// Whether `other` lies strictly inside this interval's DFS subtree.
    pub fn contains(&self, other: &IntervalLabel) -> bool {
        self.begin < other.begin && other.begin < self.end
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReachConfig {
    /// Signature width in 64-bit words, per direction.
    pub signature_words: usize,
    /// Maximum number of memoized fallback answers before the cache is reset.
    pub cache_capacity: usize,
}

impl Default for ReachConfig {
    fn default() -> Self {
        ReachConfig {
            signature_words: 1,
            cache_capacity: 1 << 20,
        }
    }
}

pub struct ReachIndex {
    comp_of: Vec<u32>,
    comp_size: Vec<u32>,
    nontrivial: Vec<bool>,
    cond_out: Vec<Vec<u32>>,
    intervals: Vec<IntervalLabel>,
    words: usize,
    out_sig: Vec<u64>,
    in_sig: Vec<u64>,
    ids_follow_discovery: bool,
    cache: Mutex<HashMap<(u32, u32), bool>>,
    cache_capacity: usize,
}

const UNVISITED: u32 = u32::MAX;

/// Tarjan's algorithm, iterative. Returns (component per node, component count);
/// components are numbered in order of completion (reverse topological).
fn tarjan(g: &DataGraph) -> (Vec<u32>, usize) {
    let n = g.num_nodes();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack: Vec<NodeId> = Vec::new();
    let mut counter = 0u32;
    let mut ncomp = 0usize;

    for root in 0..n as NodeId {
        if index[root as usize] != UNVISITED {
            continue;
        }
        let mut frames = vec![(root, g.out_neighbors(root).iter())];
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some((v, it)) = frames.last_mut() {
            let v = *v;
            if let Some(w) = it.next() {
                let wi = w as usize;
                if index[wi] == UNVISITED {
                    index[wi] = counter;
                    low[wi] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[wi] = true;
                    frames.push((w, g.out_neighbors(w).iter()));
                } else if on_stack[wi] {
                    low[v as usize] = low[v as usize].min(index[wi]);
                }
                continue;
            }
            frames.pop();
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("tarjan stack holds the root");
                    on_stack[w as usize] = false;
                    comp[w as usize] = ncomp as u32;
                    if w == v {
                        break;
                    }
                }
                ncomp += 1;
            }
            if let Some((parent, _)) = frames.last() {
                let p = *parent as usize;
                low[p] = low[p].min(low[v as usize]);
            }
        }
    }
    (comp, ncomp)
}

fn signature_bit(c: u32, bits: usize) -> usize {
    let h = (c as u64 ^ 0x5bd1_e995).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ((h >> 32) as usize) % bits
}

impl ReachIndex {
    pub fn build(g: &DataGraph) -> ReachIndex {
        Self::build_with(g, ReachConfig::default())
    }

    pub fn build_with(g: &DataGraph, cfg: ReachConfig) -> ReachIndex {
        let n = g.num_nodes();
        let (tarjan_comp, ncomp) = tarjan(g);
        // Tarjan completes sinks first; flip to a topological numbering.
        let comp_of: Vec<u32> = tarjan_comp.iter().map(|&c| (ncomp - 1) as u32 - c).collect();

        let mut comp_size = vec![0u32; ncomp];
        let mut min_member = vec![u32::MAX; ncomp];
        for (v, &c) in comp_of.iter().enumerate() {
            comp_size[c as usize] += 1;
            min_member[c as usize] = min_member[c as usize].min(v as u32);
        }
        let mut nontrivial: Vec<bool> = comp_size.iter().map(|&s| s >= 2).collect();
        let mut cond_out: Vec<Vec<u32>> = vec![Vec::new(); ncomp];
        for (u, v) in g.edges() {
            let (cu, cv) = (comp_of[u as usize], comp_of[v as usize]);
            if cu == cv {
                if u == v {
                    nontrivial[cu as usize] = true;
                }
            } else {
                cond_out[cu as usize].push(cv);
            }
        }
        for row in &mut cond_out {
            row.sort_unstable_by_key(|&c| min_member[c as usize]);
            row.dedup();
        }

        // DFS intervals over the condensation, roots and children by smallest member.
        let mut intervals = vec![IntervalLabel { begin: 0, end: 0 }; ncomp];
        let mut visited = vec![false; ncomp];
        let mut roots: Vec<u32> = (0..ncomp as u32).collect();
        roots.sort_unstable_by_key(|&c| min_member[c as usize]);
        let mut clock = 0u32;
        let mut frames: Vec<(u32, usize)> = Vec::new();
        for root in roots {
            if visited[root as usize] {
                continue;
            }
            visited[root as usize] = true;
            intervals[root as usize].begin = clock;
            clock += 1;
            frames.push((root, 0));
            while let Some(top) = frames.last_mut() {
                let (c, pos) = *top;
                let row = &cond_out[c as usize];
                if pos < row.len() {
                    top.1 += 1;
                    let d = row[pos];
                    if !visited[d as usize] {
                        visited[d as usize] = true;
                        intervals[d as usize].begin = clock;
                        clock += 1;
                        frames.push((d, 0));
                    }
                } else {
                    intervals[c as usize].end = clock;
                    frames.pop();
                }
            }
        }

        let words = cfg.signature_words.max(1);
        let bits = words * 64;
        let mut out_sig = vec![0u64; ncomp * words];
        let mut in_sig = vec![0u64; ncomp * words];
        for c in 0..ncomp {
            let b = signature_bit(c as u32, bits);
            out_sig[c * words + b / 64] |= 1 << (b % 64);
            in_sig[c * words + b / 64] |= 1 << (b % 64);
        }
        // Components are topologically numbered: edges go from lower to higher.
        for c in (0..ncomp).rev() {
            for &d in &cond_out[c] {
                for w in 0..words {
                    out_sig[c * words + w] |= out_sig[d as usize * words + w];
                }
            }
        }
        for c in 0..ncomp {
            for &d in &cond_out[c] {
                for w in 0..words {
                    in_sig[d as usize * words + w] |= in_sig[c * words + w];
                }
            }
        }

        let ids_follow_discovery = ncomp == n && (0..n).all(|v| intervals[comp_of[v] as usize].begin == v as u32);

        ReachIndex {
            comp_of,
            comp_size,
            nontrivial,
            cond_out,
            intervals,
            words,
            out_sig,
            in_sig,
            ids_follow_discovery,
            cache: Mutex::new(HashMap::new()),
            cache_capacity: cfg.cache_capacity.max(1),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.comp_of.len()
    }

    /// `u` reaches `v` through a path of one or more edges.
    pub fn reaches(&self, u: NodeId, v: NodeId) -> Result<bool, GraphError> {
        let n = self.num_nodes();
        for id in [u, v] {
            if id as usize >= n {
                return Err(GraphError::NodeOutOfRange {
                    id: id as u64,
                    num_nodes: n,
                });
            }
        }
        Ok(self.can_reach(u, v))
    }

    /// Unchecked variant of [`ReachIndex::reaches`].
    #[inline]
    pub fn can_reach(&self, u: NodeId, v: NodeId) -> bool {
        let cu = self.comp_of[u as usize];
        let cv = self.comp_of[v as usize];
        if cu == cv {
            return self.nontrivial[cu as usize];
        }
        match self.quick(cu, cv) {
            Some(answer) => answer,
            None => self.search(cu, cv),
        }
    }

    /// Label-only decision between distinct components, `None` when undecided.
    #[inline]
    fn quick(&self, cu: u32, cv: u32) -> Option<bool> {
        if cv < cu {
            return Some(false);
        }
        let iu = self.intervals[cu as usize];
        let iv = self.intervals[cv as usize];
        if iv.begin >= iu.end {
            return Some(false);
        }
        if iu.begin < iv.begin {
            return Some(true);
        }
        if !self.signatures_allow(cu, cv) {
            return Some(false);
        }
        None
    }

    #[inline]
    fn signatures_allow(&self, cu: u32, cv: u32) -> bool {
        let w = self.words;
        let (u0, v0) = (cu as usize * w, cv as usize * w);
        (0..w).all(|i| {
            let (ou, ov) = (self.out_sig[u0 + i], self.out_sig[v0 + i]);
            let (iu, iv) = (self.in_sig[u0 + i], self.in_sig[v0 + i]);
            ov & !ou == 0 && iu & !iv == 0
        })
    }

    fn search(&self, cu: u32, cv: u32) -> bool {
        if let Some(&hit) = self.cache.lock().expect("reach cache poisoned").get(&(cu, cv)) {
            return hit;
        }
        let mut seen: HashSet<u32> = HashSet::new();
        let mut stack = vec![cu];
        seen.insert(cu);
        let mut found = false;
        'outer: while let Some(c) = stack.pop() {
            for &d in &self.cond_out[c as usize] {
                if d == cv {
                    found = true;
                    break 'outer;
                }
                if !seen.insert(d) {
                    continue;
                }
                match self.quick(d, cv) {
                    Some(true) => {
                        found = true;
                        break 'outer;
                    }
                    Some(false) => {}
                    None => stack.push(d),
                }
            }
        }
        let mut cache = self.cache.lock().expect("reach cache poisoned");
        if cache.len() >= self.cache_capacity {
            cache.clear();
        }
        cache.insert((cu, cv), found);
        found
    }

    /// Component of `v`; components are numbered in topological order.
    pub fn component(&self, v: NodeId) -> u32 {
        self.comp_of[v as usize]
    }

    pub fn num_components(&self) -> usize {
        self.comp_size.len()
    }

    /// Members of every component, components in topological order.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.num_components()];
        for (v, &c) in self.comp_of.iter().enumerate() {
            out[c as usize].push(v as NodeId);
        }
        out
    }

    /// Whether `v` lies on a cycle, i.e. reaches itself.
    pub fn on_cycle(&self, v: NodeId) -> bool {
        self.nontrivial[self.comp_of[v as usize] as usize]
    }

    /// Interval label of the component holding `v`.
    pub fn interval(&self, v: NodeId) -> IntervalLabel {
        self.intervals[self.comp_of[v as usize] as usize]
    }

    /// True when every strongly connected component is a single node and
    /// every node id equals its DFS discovery time, so scanning a node set in
    /// id order visits nodes in ascending `begin` order. Self-loops may still
    /// be present; see [`on_cycle`](Self::on_cycle).
    pub fn ids_follow_discovery(&self) -> bool {
        self.ids_follow_discovery
    }

    pub fn cached_answers(&self) -> usize {
        self.cache.lock().expect("reach cache poisoned").len()
    }
}

impl std::fmt::Debug for ReachIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReachIndex")
            .field("nodes", &self.num_nodes())
            .field("components", &self.num_components())
            .field("ids_follow_discovery", &self.ids_follow_discovery)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn graph(n: usize, edges: &[(u32, u32)]) -> DataGraph {
        let mut b = GraphBuilder::new().keep_order(true);
        for _ in 0..n {
            b.add_node("x");
        }
        for &(s, d) in edges {
            b.add_edge(s, d).unwrap();
        }
        b.build()
    }

    #[test]
    fn chain_components_in_topological_order() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let ix = ReachIndex::build(&g);
        assert_eq!(ix.components(), vec![vec![0], vec![1], vec![2]]);
        assert!(ix.reaches(0, 2).unwrap());
        assert!(!ix.reaches(2, 0).unwrap());
        assert!(!ix.reaches(1, 1).unwrap());
    }

    #[test]
    fn two_cycle_collapses() {
        let g = graph(2, &[(0, 1), (1, 0)]);
        let ix = ReachIndex::build(&g);
        assert_eq!(ix.components(), vec![vec![0, 1]]);
        for (u, v) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!(ix.reaches(u, v).unwrap());
        }
    }

    #[test]
    fn self_loop_reaches_itself() {
        let g = graph(2, &[(0, 0), (0, 1)]);
        let ix = ReachIndex::build(&g);
        assert!(ix.reaches(0, 0).unwrap());
        assert!(!ix.reaches(1, 1).unwrap());
    }

    #[test]
    fn out_of_range_is_an_error() {
        let ix = ReachIndex::build(&graph(2, &[(0, 1)]));
        assert!(ix.reaches(0, 9).is_err());
    }

    #[test]
    fn fallback_search_is_used_and_cached() {
        // Cross edge to an earlier finished subtree: 0 -> 1 -> 2, 3 -> 4 -> 2 with
        // roots 0 then 3; 3 reaches 2 but 2 was discovered under 0.
        let g = graph(6, &[(0, 1), (1, 2), (3, 4), (4, 2), (3, 5)]);
        let ix = ReachIndex::build_with(
            &g,
            ReachConfig {
                signature_words: 1,
                cache_capacity: 2,
            },
        );
        assert!(ix.reaches(3, 2).unwrap());
        assert!(ix.reaches(4, 2).unwrap());
        assert!(!ix.reaches(5, 2).unwrap());
        assert!(ix.cached_answers() <= 2);
    }
}
