//! Seeded generators for data graphs and pattern queries.
//!
//! All generators take an explicit RNG; with a seeded `ChaCha8Rng` the output
//! is a pure function of the seed.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{DataGraph, GraphBuilder};
use crate::query::{EdgeKind, PatternQuery, QueryEdge};

pub fn label_name(i: usize) -> String {
    format!("L{i}")
}

#[derive(Clone, Copy, Debug)]
pub struct GraphParams {
    pub nodes: usize,
    pub edges: usize,
    pub labels: usize,
    pub acyclic: bool,
}

/// Uniform random labeled graph. Acyclic graphs orient every edge along a
/// hidden random permutation, so the input ids are not already topological.
pub fn random_graph<R: Rng>(rng: &mut R, p: GraphParams) -> DataGraph {
    let n = p.nodes.max(1);
    let mut b = GraphBuilder::new();
    for _ in 0..n {
        b.add_node(&label_name(rng.gen_range(0..p.labels.max(1))));
    }
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    for _ in 0..p.edges {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if p.acyclic {
            if u == v {
                continue;
            }
            let (s, t) = if rank[u] < rank[v] { (u, v) } else { (v, u) };
            b.add_edge(s as u32, t as u32).expect("in range");
        } else {
            b.add_edge(u as u32, v as u32).expect("in range");
        }
    }
    b.build()
}

#[derive(Clone, Copy, Debug)]
pub struct ClusteredParams {
    pub nodes: usize,
    pub edges: usize,
    pub labels: usize,
    /// Nodes per community.
    pub community: usize,
    /// Communities per group; cross edges stay inside a group.
    pub group: usize,
    /// Fraction of edges that leave their community.
    pub cross_fraction: f64,
}

impl ClusteredParams {
    /// 100K nodes, 500K edges, 20 labels.
    pub fn desk_scale() -> Self {
        ClusteredParams {
            nodes: 100_000,
            edges: 500_000,
            labels: 20,
            community: 40,
            group: 4,
            cross_fraction: 0.05,
        }
    }
}

/// DAG made of small dense communities with sparse links between
/// communities of the same group. Reachability stays local, as it does in
/// citation-like graphs, so descendant sets stay small.
pub fn clustered_dag<R: Rng>(rng: &mut R, p: ClusteredParams) -> DataGraph {
    let n = p.nodes.max(1);
    let c = p.community.clamp(2, n);
    let num_comms = n.div_ceil(c);
    let group = p.group.max(1);
    let mut b = GraphBuilder::new();
    for _ in 0..n {
        b.add_node(&label_name(rng.gen_range(0..p.labels.max(1))));
    }
    let comm_range = |k: usize| (k * c, ((k + 1) * c).min(n));
    let mut seen = HashSet::new();
    let mut added = 0usize;
    let mut attempts = 0usize;
    while added < p.edges && attempts < p.edges * 4 {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let k = u / c;
        let target_comm = if rng.gen_bool(p.cross_fraction) {
            // A later community in the same group keeps the graph acyclic.
            let g0 = k / group * group;
            let last = (g0 + group).min(num_comms);
            if k + 1 >= last {
                continue;
            }
            rng.gen_range(k + 1..last)
        } else {
            k
        };
        let (lo, hi) = comm_range(target_comm);
        let v = rng.gen_range(lo..hi);
        if target_comm == k && v <= u {
            continue;
        }
        if seen.insert((u, v)) {
            b.add_edge(u as u32, v as u32).expect("in range");
            added += 1;
        }
    }
    b.build()
}

#[derive(Clone, Copy, Debug)]
pub struct QueryParams {
    pub nodes: usize,
    /// Edges beyond the spanning tree.
    pub extra_edges: usize,
    pub labels: usize,
    /// Probability that an edge is a reachability edge.
    pub reach_prob: f64,
    pub shape: QueryShape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryShape {
    /// Directed acyclic.
    Dag,
    /// At least one directed cycle.
    Cyclic,
    /// Either.
    Any,
}

/// Connected random query: a random spanning tree plus extra edges.
pub fn random_query<R: Rng>(rng: &mut R, p: QueryParams) -> PatternQuery {
    let k = p.nodes.max(1);
    let labels: Vec<String> = (0..k).map(|_| label_name(rng.gen_range(0..p.labels.max(1)))).collect();
    let mut rank: Vec<usize> = (0..k).collect();
    rank.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let orient = |rng: &mut R, a: usize, b: usize| -> (usize, usize) {
        match p.shape {
            QueryShape::Any | QueryShape::Cyclic if rng.gen_bool(0.5) => (b, a),
            QueryShape::Any | QueryShape::Cyclic => (a, b),
            QueryShape::Dag if rank[a] < rank[b] => (a, b),
            QueryShape::Dag => (b, a),
        }
    };
    for v in 1..k {
        let u = rng.gen_range(0..v);
        let e = orient(rng, u, v);
        pairs.push(e);
    }
    let max_pairs = k * (k - 1);
    for _ in 0..p.extra_edges {
        if pairs.len() >= max_pairs {
            break;
        }
        let a = rng.gen_range(0..k);
        let b = rng.gen_range(0..k);
        if a == b {
            continue;
        }
        let e = orient(rng, a, b);
        if !pairs.contains(&e) {
            pairs.push(e);
        }
    }
    let mut kinds: Vec<EdgeKind> = pairs.iter().map(|_| random_kind(rng, p.reach_prob)).collect();
    let edges = |pairs: &[(usize, usize)], kinds: &[EdgeKind]| -> Vec<QueryEdge> {
        pairs
            .iter()
            .zip(kinds)
            .map(|(&(tail, head), &kind)| QueryEdge { tail, head, kind })
            .collect()
    };
    let mut q = PatternQuery::new(labels.clone(), edges(&pairs, &kinds)).expect("generated query is valid");
    if p.shape == QueryShape::Cyclic && q.is_dag() && k > 1 {
        close_cycle(rng, &q, &mut pairs);
        kinds.push(random_kind(rng, p.reach_prob));
        q = PatternQuery::new(labels, edges(&pairs, &kinds)).expect("generated query is valid");
    }
    q
}

fn random_kind<R: Rng>(rng: &mut R, reach_prob: f64) -> EdgeKind {
    if rng.gen_bool(reach_prob.clamp(0.0, 1.0)) {
        EdgeKind::Reachability
    } else {
        EdgeKind::Direct
    }
}

/// Adds an edge from the end of a random directed walk back to its start.
fn close_cycle<R: Rng>(rng: &mut R, q: &PatternQuery, pairs: &mut Vec<(usize, usize)>) {
    let starts: Vec<usize> = (0..q.num_nodes()).filter(|&n| !q.out_edges(n).is_empty()).collect();
    let start = *starts.choose(rng).expect("connected query with k > 1 has an edge");
    let mut end = start;
    for step in 0..3 {
        let out = q.out_edges(end);
        if out.is_empty() || (step > 0 && rng.gen_bool(0.3)) {
            break;
        }
        end = q.edge(*out.choose(rng).expect("nonempty")).head;
    }
    pairs.push((end, start));
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TemplateClass {
    Acyclic,
    Cyclic,
    Clique,
    Combo,
}

/// A fixed query skeleton; `reach` marks the edges that are reachability
/// edges in the hybrid variant.
#[derive(Clone, Debug)]
pub struct Template {
    pub name: &'static str,
    pub class: TemplateClass,
    pub nodes: usize,
    pub edges: Vec<(usize, usize, bool)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeMix {
    /// Direct edges only.
    Child,
    /// The template's own mix.
    Hybrid,
    /// Reachability edges only.
    Descendant,
}

impl Template {
    pub fn instantiate(&self, labels: &[String], mix: EdgeMix) -> PatternQuery {
        assert_eq!(labels.len(), self.nodes, "one label per template node");
        let edges = self
            .edges
            .iter()
            .map(|&(tail, head, reach)| {
                let kind = match mix {
                    EdgeMix::Child => EdgeKind::Direct,
                    EdgeMix::Descendant => EdgeKind::Reachability,
                    EdgeMix::Hybrid if reach => EdgeKind::Reachability,
                    EdgeMix::Hybrid => EdgeKind::Direct,
                };
                QueryEdge { tail, head, kind }
            })
            .collect();
        PatternQuery::new(labels.to_vec(), edges).expect("templates are connected")
    }

    /// Instance with labels drawn uniformly from `L0..L{labels-1}`.
    pub fn random_instance<R: Rng>(&self, rng: &mut R, labels: usize, mix: EdgeMix) -> PatternQuery {
        let ls: Vec<String> = (0..self.nodes)
            .map(|_| label_name(rng.gen_range(0..labels.max(1))))
            .collect();
        self.instantiate(&ls, mix)
    }
}

/// Query skeletons in four classes, 3 to 8 nodes each.
pub fn templates() -> Vec<Template> {
    let t = |name, class, nodes, edges: &[(usize, usize, bool)]| Template {
        name,
        class,
        nodes,
        edges: edges.to_vec(),
    };
    use TemplateClass::*;
    vec![
        t("path3", Acyclic, 3, &[(0, 1, false), (1, 2, true)]),
        t(
            "tree5",
            Acyclic,
            5,
            &[(0, 1, false), (0, 2, true), (1, 3, true), (2, 4, false)],
        ),
        t(
            "diamond5",
            Acyclic,
            5,
            &[(0, 1, false), (0, 2, true), (1, 3, true), (2, 3, false), (3, 4, true)],
        ),
        t(
            "square4",
            Cyclic,
            4,
            &[(0, 1, false), (1, 2, true), (0, 3, true), (3, 2, false)],
        ),
        t(
            "pentagon5",
            Cyclic,
            5,
            &[(0, 1, true), (1, 2, false), (2, 3, true), (0, 4, false), (4, 3, true)],
        ),
        t(
            "ladder6",
            Cyclic,
            6,
            &[
                (0, 1, false),
                (1, 2, true),
                (0, 3, true),
                (1, 4, false),
                (2, 5, false),
                (3, 4, false),
                (4, 5, true),
            ],
        ),
        t("triangle3", Clique, 3, &[(0, 1, false), (0, 2, true), (1, 2, false)]),
        t(
            "clique4",
            Clique,
            4,
            &[
                (0, 1, false),
                (0, 2, true),
                (0, 3, true),
                (1, 2, false),
                (1, 3, true),
                (2, 3, false),
            ],
        ),
        t(
            "clique_tail6",
            Combo,
            6,
            &[
                (0, 1, false),
                (0, 2, true),
                (0, 3, true),
                (1, 2, false),
                (1, 3, true),
                (2, 3, false),
                (3, 4, true),
                (4, 5, false),
            ],
        ),
        t(
            "bowtie_star8",
            Combo,
            8,
            &[
                (0, 1, false),
                (0, 2, true),
                (1, 2, false),
                (2, 3, true),
                (2, 4, false),
                (3, 4, true),
                (4, 5, false),
                (4, 6, true),
                (5, 7, true),
            ],
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_graph() {
        let p = GraphParams {
            nodes: 30,
            edges: 80,
            labels: 3,
            acyclic: false,
        };
        let a = random_graph(&mut ChaCha8Rng::seed_from_u64(7), p);
        let b = random_graph(&mut ChaCha8Rng::seed_from_u64(7), p);
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn acyclic_generators_are_dags() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_graph(
            &mut rng,
            GraphParams {
                nodes: 50,
                edges: 200,
                labels: 4,
                acyclic: true,
            },
        );
        assert!(g.is_dag());
        let p = ClusteredParams {
            nodes: 2000,
            edges: 10_000,
            ..ClusteredParams::desk_scale()
        };
        let g = clustered_dag(&mut rng, p);
        assert!(g.is_dag());
        assert_eq!(g.num_edges(), 10_000);
    }

    #[test]
    fn query_shapes_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let k = rng.gen_range(2..7);
            let mut p = QueryParams {
                nodes: k,
                extra_edges: 2,
                labels: 3,
                reach_prob: 0.5,
                shape: QueryShape::Dag,
            };
            let q = random_query(&mut rng, p);
            assert!(q.is_dag() && q.is_connected() && q.num_nodes() == k);
            p.shape = QueryShape::Cyclic;
            let q = random_query(&mut rng, p);
            assert!(!q.is_dag() && q.is_connected());
        }
    }

    #[test]
    fn templates_are_valid_and_small() {
        for t in templates() {
            let q = t.random_instance(&mut ChaCha8Rng::seed_from_u64(1), 20, EdgeMix::Hybrid);
            assert!(q.num_nodes() <= 8 && q.is_connected(), "{}", t.name);
        }
    }
}
