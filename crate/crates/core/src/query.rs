//! Hybrid pattern queries: parsing, transitive closure and transitive reduction.
//!
//! Text format:
//!
//! ```text
//! n <qid> <label>     one per query node, qids 0..k-1
//! d <tail> <head>     direct edge (maps to a single data edge)
//! r <tail> <head>     reachability edge (maps to a path of one or more edges)
//! ```

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::fmt;
use std::io::{self, BufRead};

use thiserror::Error;

/// Dense query node index.
pub type QueryNodeId = usize;

/// Queries above this size are accepted with a warning.
pub const QUERY_SIZE_SOFT_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Direct,
    Reachability,
}

impl EdgeKind {
    pub fn code(self) -> char {
        match self {
            EdgeKind::Direct => 'd',
            EdgeKind::Reachability => 'r',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryEdge {
    pub tail: QueryNodeId,
    pub head: QueryNodeId,
    pub kind: EdgeKind,
}

impl QueryEdge {
    pub fn direct(tail: QueryNodeId, head: QueryNodeId) -> Self {
        QueryEdge {
            tail,
            head,
            kind: EdgeKind::Direct,
        }
    }

    pub fn reach(tail: QueryNodeId, head: QueryNodeId) -> Self {
        QueryEdge {
            tail,
            head,
            kind: EdgeKind::Reachability,
        }
    }
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("query has no nodes")]
    Empty,
    #[error("query is not connected")]
    Disconnected,
    #[error("query node {node} out of range for a query of {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("self-loop on query node {0}")]
    SelfLoop(QueryNodeId),
    #[error("query nodes {tail} -> {head} are joined by both a direct and a reachability edge")]
    ConflictingKinds { tail: QueryNodeId, head: QueryNodeId },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, PartialEq, Eq)]
pub struct PatternQuery {
    labels: Vec<String>,
    edges: Vec<QueryEdge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl PatternQuery {
    /// Builds a validated query: no self-loops, no pair joined by edges of
    /// both kinds, connected. Identical duplicate edges are merged.
    pub fn new(labels: Vec<String>, edges: Vec<QueryEdge>) -> Result<PatternQuery, QueryError> {
        if labels.is_empty() {
            return Err(QueryError::Empty);
        }
        let k = labels.len();
        for e in &edges {
            for node in [e.tail, e.head] {
                if node >= k {
                    return Err(QueryError::NodeOutOfRange { node, num_nodes: k });
                }
            }
            if e.tail == e.head {
                return Err(QueryError::SelfLoop(e.tail));
            }
        }
        let q = Self::assemble(labels, edges);
        for w in q.edges.windows(2) {
            if w[0].tail == w[1].tail && w[0].head == w[1].head {
                return Err(QueryError::ConflictingKinds {
                    tail: w[0].tail,
                    head: w[0].head,
                });
            }
        }
        if !q.is_connected() {
            return Err(QueryError::Disconnected);
        }
        if k > QUERY_SIZE_SOFT_LIMIT {
            log::warn!("query has {k} nodes, above the soft limit of {QUERY_SIZE_SOFT_LIMIT}");
        }
        Ok(q)
    }

    /// Sorts and deduplicates edges without validation.
    fn assemble(labels: Vec<String>, mut edges: Vec<QueryEdge>) -> PatternQuery {
        edges.sort_unstable();
        edges.dedup();
        let k = labels.len();
        let mut out_edges = vec![Vec::new(); k];
        let mut in_edges = vec![Vec::new(); k];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.tail].push(i);
            in_edges[e.head].push(i);
        }
        PatternQuery {
            labels,
            edges,
            out_edges,
            in_edges,
        }
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<PatternQuery, QueryError> {
        let mut labels: Vec<Option<String>> = Vec::new();
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |msg: String| QueryError::Parse { line: line_no, msg };
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", tokens.len())));
            }
            let id = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| err(format!("invalid query node id `{t}`")))
            };
            match tokens[0] {
                "n" => {
                    let q = id(tokens[1])?;
                    if q >= labels.len() {
                        labels.resize(q + 1, None);
                    }
                    if labels[q].is_some() {
                        return Err(err(format!("query node {q} declared twice")));
                    }
                    labels[q] = Some(tokens[2].to_owned());
                }
                "d" | "r" => {
                    let (tail, head) = (id(tokens[1])?, id(tokens[2])?);
                    let kind = if tokens[0] == "d" {
                        EdgeKind::Direct
                    } else {
                        EdgeKind::Reachability
                    };
                    edges.push((line_no, QueryEdge { tail, head, kind }));
                }
                other => return Err(err(format!("unknown record type `{other}`"))),
            }
        }
        let mut names = Vec::with_capacity(labels.len());
        for (q, l) in labels.into_iter().enumerate() {
            match l {
                Some(l) => names.push(l),
                None => {
                    return Err(QueryError::Parse {
                        line: 0,
                        msg: format!("query node {q} is never declared"),
                    })
                }
            }
        }
        for (line, e) in &edges {
            if e.tail >= names.len() || e.head >= names.len() {
                return Err(QueryError::Parse {
                    line: *line,
                    msg: "edge references undeclared query node".to_string(),
                });
            }
        }
        PatternQuery::new(names, edges.into_iter().map(|(_, e)| e).collect())
    }

    pub fn parse_str(text: &str) -> Result<PatternQuery, QueryError> {
        Self::parse(text.as_bytes())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (q, l) in self.labels.iter().enumerate() {
            s.push_str(&format!("n {q} {l}\n"));
        }
        for e in &self.edges {
            s.push_str(&format!("{} {} {}\n", e.kind.code(), e.tail, e.head));
        }
        s
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, q: QueryNodeId) -> &str {
        &self.labels[q]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Edges sorted by (tail, head, kind).
    pub fn edges(&self) -> &[QueryEdge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> QueryEdge {
        self.edges[i]
    }

    /// Indices of edges leaving `q`.
    pub fn out_edges(&self, q: QueryNodeId) -> &[usize] {
        &self.out_edges[q]
    }

    /// Indices of edges entering `q`.
    pub fn in_edges(&self, q: QueryNodeId) -> &[usize] {
        &self.in_edges[q]
    }

    /// Distinct neighbours of `q` ignoring direction, ascending.
    pub fn neighbors(&self, q: QueryNodeId) -> Vec<QueryNodeId> {
        let set: BTreeSet<QueryNodeId> = self.out_edges[q]
            .iter()
            .map(|&i| self.edges[i].head)
            .chain(self.in_edges[q].iter().map(|&i| self.edges[i].tail))
            .collect();
        set.into_iter().collect()
    }

    pub fn degree(&self, q: QueryNodeId) -> usize {
        self.neighbors(q).len()
    }

    pub fn is_connected(&self) -> bool {
        let k = self.num_nodes();
        let mut seen = vec![false; k];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(q) = queue.pop_front() {
            for p in self.neighbors(q) {
                if !seen[p] {
                    seen[p] = true;
                    count += 1;
                    queue.push_back(p);
                }
            }
        }
        count == k
    }

    /// Kahn's algorithm with ascending-qid tie breaking; `None` if cyclic.
    pub fn topological_order(&self) -> Option<Vec<QueryNodeId>> {
        topological_order(self.num_nodes(), self.edges.iter().copied())
    }

    pub fn is_dag(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Transitive reachability between query nodes by exhaustively applying
    /// "an edge implies reachability" and "reachability composes".
    /// `m[x][y]` holds when a path of one or more edges leads from x to y.
    #[allow(clippy::needless_range_loop)]
    pub fn reachability_matrix(&self) -> Vec<Vec<bool>> {
        let k = self.num_nodes();
        let mut m = vec![vec![false; k]; k];
        for e in &self.edges {
            m[e.tail][e.head] = true;
        }
        loop {
            let mut changed = false;
            for x in 0..k {
                for y in 0..k {
                    if !m[x][y] {
                        continue;
                    }
                    for z in 0..k {
                        if m[y][z] && !m[x][z] {
                            m[x][z] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return m;
            }
        }
    }

    /// Keeps every direct edge and adds a reachability edge (x, y) for every
    /// pair of distinct nodes with x reaching y.
    #[allow(clippy::needless_range_loop)]
    pub fn transitive_closure(&self) -> PatternQuery {
        let m = self.reachability_matrix();
        let k = self.num_nodes();
        let mut edges: Vec<QueryEdge> = self
            .edges
            .iter()
            .copied()
            .filter(|e| e.kind == EdgeKind::Direct)
            .collect();
        for x in 0..k {
            for y in 0..k {
                if x != y && m[x][y] {
                    edges.push(QueryEdge::reach(x, y));
                }
            }
        }
        Self::assemble(self.labels.clone(), edges)
    }

    /// Removes transitive reachability edges, scanning them in ascending
    /// (tail, head) order against the edges still present. Direct edges are
    /// never removed; a reachability edge parallel to a direct edge always goes.
    pub fn transitive_reduction(&self) -> PatternQuery {
        let mut alive = vec![true; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if e.kind == EdgeKind::Reachability && self.has_alternative_path(i, &alive) {
                alive[i] = false;
            }
        }
        let edges = self
            .edges
            .iter()
            .zip(&alive)
            .filter(|(_, &a)| a)
            .map(|(e, _)| *e)
            .collect();
        Self::assemble(self.labels.clone(), edges)
    }

    /// Whether edge `skip` is transitive: another path over `alive` edges
    /// connects its endpoints.
    fn has_alternative_path(&self, skip: usize, alive: &[bool]) -> bool {
        let QueryEdge { tail, head, .. } = self.edges[skip];
        let mut seen = vec![false; self.num_nodes()];
        let mut stack = vec![tail];
        seen[tail] = true;
        while let Some(x) = stack.pop() {
            for &i in &self.out_edges[x] {
                if i == skip || !alive[i] {
                    continue;
                }
                let y = self.edges[i].head;
                if y == head {
                    return true;
                }
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        false
    }

    /// Same query with edge `i` replaced; used by mutation testing.
    pub fn with_edge_kind(&self, i: usize, kind: EdgeKind) -> PatternQuery {
        let mut edges = self.edges.clone();
        edges[i].kind = kind;
        Self::assemble(self.labels.clone(), edges)
    }
}

pub(crate) fn topological_order<I>(k: usize, edges: I) -> Option<Vec<QueryNodeId>>
where
    I: IntoIterator<Item = QueryEdge>,
{
    let mut indeg = vec![0usize; k];
    let mut succ = vec![Vec::new(); k];
    for e in edges {
        indeg[e.head] += 1;
        succ[e.tail].push(e.head);
    }
    let mut heap: BinaryHeap<Reverse<usize>> = (0..k).filter(|&q| indeg[q] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(k);
    while let Some(Reverse(q)) = heap.pop() {
        order.push(q);
        for &h in &succ[q] {
            indeg[h] -= 1;
            if indeg[h] == 0 {
                heap.push(Reverse(h));
            }
        }
    }
    (order.len() == k).then_some(order)
}

impl fmt::Debug for PatternQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PatternQuery[")?;
        for (q, l) in self.labels.iter().enumerate() {
            if q > 0 {
                write!(f, " ")?;
            }
            write!(f, "{q}:{l}")?;
        }
        write!(f, ";")?;
        for e in &self.edges {
            let arrow = match e.kind {
                EdgeKind::Direct => "->",
                EdgeKind::Reachability => "=>",
            };
            write!(f, " {}{}{}", e.tail, arrow, e.head)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_running_example() {
        let q = PatternQuery::parse_str("n 0 a\nn 1 b\nn 2 c\nd 0 1\nd 0 2\nr 1 2\n").unwrap();
        assert_eq!(q.num_nodes(), 3);
        let direct = q.edges().iter().filter(|e| e.kind == EdgeKind::Direct).count();
        assert_eq!((direct, q.num_edges() - direct), (2, 1));
        assert!(q.is_dag());
    }

    #[test]
    fn single_node_query() {
        let q = PatternQuery::parse_str("n 0 a\n").unwrap();
        assert_eq!((q.num_nodes(), q.num_edges()), (1, 0));
    }

    #[test]
    fn rejects_disconnected_and_conflicts() {
        assert!(matches!(
            PatternQuery::parse_str("n 0 a\nn 1 b\n"),
            Err(QueryError::Disconnected)
        ));
        assert!(matches!(
            PatternQuery::parse_str("n 0 a\nn 1 b\nd 0 1\nr 0 1\n"),
            Err(QueryError::ConflictingKinds { tail: 0, head: 1 })
        ));
        assert!(matches!(
            PatternQuery::parse_str("n 0 a\nd 0 0\n"),
            Err(QueryError::SelfLoop(0))
        ));
        assert!(matches!(
            PatternQuery::parse_str("n 0 a\nn 1 b\nx 0 1\n"),
            Err(QueryError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            PatternQuery::parse_str("n 0 a\nd 0 4\n"),
            Err(QueryError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_identical_edges_merge() {
        let q = PatternQuery::parse_str("n 0 a\nn 1 b\nd 0 1\nd 0 1\n").unwrap();
        assert_eq!(q.num_edges(), 1);
    }

    #[test]
    fn closure_applies_ir1() {
        let q = PatternQuery::new(labels(&["a", "b"]), vec![QueryEdge::direct(0, 1)]).unwrap();
        let c = q.transitive_closure();
        assert_eq!(c.edges(), &[QueryEdge::direct(0, 1), QueryEdge::reach(0, 1)]);
    }

    #[test]
    fn reduction_drops_transitive_edge() {
        let q = PatternQuery::new(
            labels(&["A", "B", "C"]),
            vec![QueryEdge::direct(0, 1), QueryEdge::direct(1, 2), QueryEdge::reach(0, 2)],
        )
        .unwrap();
        let r = q.transitive_reduction();
        assert_eq!(r.edges(), &[QueryEdge::direct(0, 1), QueryEdge::direct(1, 2)]);
    }

    #[test]
    fn direct_only_query_is_unchanged() {
        let q = PatternQuery::new(
            labels(&["A", "B", "C"]),
            vec![
                QueryEdge::direct(0, 1),
                QueryEdge::direct(1, 2),
                QueryEdge::direct(0, 2),
            ],
        )
        .unwrap();
        assert_eq!(q.transitive_reduction(), q);
    }

    #[test]
    fn direct_edge_wins_over_parallel_reachability() {
        let q = PatternQuery::assemble(
            labels(&["A", "B"]),
            vec![QueryEdge::direct(0, 1), QueryEdge::reach(0, 1)],
        );
        assert_eq!(q.transitive_reduction().edges(), &[QueryEdge::direct(0, 1)]);
    }

    #[test]
    fn cyclic_reduction_is_greedy() {
        // 0 => 1 => 2 => 0 and 0 => 2: the chord is transitive, the cycle is kept.
        let q = PatternQuery::new(
            labels(&["A", "B", "C"]),
            vec![
                QueryEdge::reach(0, 1),
                QueryEdge::reach(1, 2),
                QueryEdge::reach(2, 0),
                QueryEdge::reach(0, 2),
            ],
        )
        .unwrap();
        let r = q.transitive_reduction();
        assert!(!r.edges().contains(&QueryEdge::reach(0, 2)));
        assert_eq!(r.num_edges(), 3);
    }

    #[test]
    fn kahn_breaks_ties_by_qid() {
        let q = PatternQuery::new(
            labels(&["A", "B", "C", "D"]),
            vec![
                QueryEdge::direct(2, 1),
                QueryEdge::direct(3, 1),
                QueryEdge::direct(0, 3),
            ],
        )
        .unwrap();
        assert_eq!(q.topological_order().unwrap(), vec![0, 2, 3, 1]);
    }

    #[test]
    fn text_round_trip() {
        let src = "n 0 a\nn 1 b\nn 2 c\nd 0 1\nd 0 2\nr 1 2\n";
        let q = PatternQuery::parse_str(src).unwrap();
        assert_eq!(q.to_text(), src);
    }
}
