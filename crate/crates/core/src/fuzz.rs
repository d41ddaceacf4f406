//! Randomised differential checking against the brute-force oracle.
//!
//! Each instance is a small random graph plus a connected random query, both
//! derived from one `u64` seed. [`check_instance`] runs the engine under every
//! configuration of interest and compares against oracles that share no code
//! with it.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::generate::{random_graph, random_query, GraphParams, QueryParams, QueryShape};
use crate::graph::DataGraph;
use crate::limits::EnumLimits;
use crate::mjoin::mjoin;
use crate::nodeset::{NodeId, NodeSet};
use crate::oracle::{
    brute_force_with, naive_match_edges, naive_match_sets, occurrence_edges, occurrence_sets, Answer, BfsTester,
    ORACLE_GUARD,
};
use crate::order::{jo_order, ri_order, validate_order, SearchOrder};
use crate::query::{EdgeKind, PatternQuery};
use crate::reach::ReachIndex;
use crate::rig::{build_rig, Rig, RigConfig, RigMode};
use crate::sim::{fb_sim, fb_sim_bas, fb_sim_dag, FbRelation, SimOptions};

#[derive(Clone, Copy, Debug)]
pub struct FuzzBounds {
    pub min_graph_nodes: usize,
    pub max_graph_nodes: usize,
    pub min_labels: usize,
    pub max_labels: usize,
    /// Edges per node, inclusive range.
    pub density: (usize, usize),
    pub query_nodes: (usize, usize),
    pub max_extra_edges: usize,
    /// Queries are redrawn while the product of their label match set sizes
    /// exceeds this, which also bounds the answer size.
    pub max_search_space: f64,
}

impl Default for FuzzBounds {
    fn default() -> Self {
        FuzzBounds {
            min_graph_nodes: 5,
            max_graph_nodes: 50,
            min_labels: 2,
            max_labels: 4,
            density: (1, 4),
            query_nodes: (3, 6),
            max_extra_edges: 3,
            max_search_space: 2e5,
        }
    }
}

/// Reachability-edge probabilities cycled through by the corpus.
pub const REACH_MIXES: [f64; 3] = [0.0, 0.5, 1.0];

#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub graph: DataGraph,
    pub query: PatternQuery,
    pub reach_prob: f64,
}

/// Seed of the `i`-th instance of a run started from `base`.
pub fn instance_seed(base: u64, i: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(i);
    rng.gen()
}

/// Query shape of the instance generated from `seed`: DAG, cyclic or
/// unconstrained.
pub fn shape_for_seed(seed: u64) -> QueryShape {
    match seed % 3 {
        0 => QueryShape::Dag,
        1 => QueryShape::Cyclic,
        _ => QueryShape::Any,
    }
}

/// Deterministic instance for `seed`.
pub fn generate_instance(seed: u64, bounds: &FuzzBounds) -> Instance {
    let shape = shape_for_seed(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = rng.gen_range(bounds.min_graph_nodes..=bounds.max_graph_nodes);
    let labels = rng.gen_range(bounds.min_labels..=bounds.max_labels);
    let density = rng.gen_range(bounds.density.0..=bounds.density.1);
    let acyclic = rng.gen_bool(0.5);
    let graph = random_graph(
        &mut rng,
        GraphParams {
            nodes,
            edges: nodes * density,
            labels,
            acyclic,
        },
    );
    let reach_prob = REACH_MIXES[rng.gen_range(0..REACH_MIXES.len())];
    let ms_sizes: Vec<f64> = (0..labels)
        .map(|l| graph.inverted_list(&crate::generate::label_name(l)).len() as f64)
        .collect();
    loop {
        let params = QueryParams {
            nodes: rng.gen_range(bounds.query_nodes.0..=bounds.query_nodes.1),
            extra_edges: rng.gen_range(0..=bounds.max_extra_edges),
            labels,
            reach_prob,
            shape,
        };
        let q = random_query(&mut rng, params);
        let estimate: f64 = q
            .labels()
            .iter()
            .map(|l| l[1..].parse::<usize>().map(|i| ms_sizes[i]).unwrap_or(0.0))
            .product();
        if estimate <= bounds.max_search_space.min(ORACLE_GUARD) {
            return Instance {
                seed,
                graph,
                query: q,
                reach_prob,
            };
        }
    }
}

/// Deliberate corruptions for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// The engine evaluates the query with its first direct edge turned into
    /// a reachability edge.
    WeakenFirstDirectEdge,
    /// Reduction also drops the first reachability edge whose removal keeps
    /// the query connected, transitive or not.
    CorruptReduction,
}

fn corrupt_reduction(q: &PatternQuery) -> PatternQuery {
    let reduced = q.transitive_reduction();
    for (i, e) in reduced.edges().iter().enumerate() {
        if e.kind != EdgeKind::Reachability {
            continue;
        }
        let mut edges = reduced.edges().to_vec();
        edges.remove(i);
        if let Ok(dropped) = PatternQuery::new(reduced.labels().to_vec(), edges) {
            return dropped;
        }
    }
    reduced
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CheckOptions {
    pub mutation: Option<Mutation>,
}

/// The first invariant an instance broke.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub seed: u64,
    pub check: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seed {}: {} violated: {}", self.seed, self.check, self.detail)
    }
}

impl std::error::Error for Violation {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckSummary {
    pub answer_size: usize,
    pub query_is_dag: bool,
    pub engine_runs: usize,
}

/// Named optimisation settings; every one must give the same answer.
pub fn optimisation_variants() -> Vec<(&'static str, RigConfig)> {
    let base = RigConfig::default();
    let with = |f: &dyn Fn(&mut RigConfig)| {
        let mut c = base;
        f(&mut c);
        c
    };
    vec![
        ("exact", base),
        ("cap3", with(&|c| c.sim.max_passes = Some(3))),
        ("cap1", with(&|c| c.sim.max_passes = Some(1))),
        ("no-dirty-flags", with(&|c| c.sim.dirty_flags = false)),
        ("no-witness-index", with(&|c| c.sim.witness_index = false)),
        ("no-batch-direct", with(&|c| c.sim.batch_direct = false)),
        (
            "no-early-termination",
            with(&|c| {
                c.sim.early_termination = false;
                c.early_termination = false;
            }),
        ),
        ("no-local-search", with(&|c| c.sim.local_search_budget = 0)),
        ("no-trim", with(&|c| c.trim = false)),
        (
            "all-off",
            with(&|c| {
                c.sim = SimOptions::plain();
                c.early_termination = false;
                c.trim = false;
            }),
        ),
    ]
}

pub fn enumerate_all(q: &PatternQuery, rig: &Rig, order: &SearchOrder) -> Answer {
    let mut out = Answer::new();
    let mut dup = false;
    mjoin(q, rig, order, &EnumLimits::unlimited(), |t| {
        dup |= !out.insert(t.to_vec());
        Ok::<(), ()>(())
    })
    .expect("collecting sink cannot fail");
    assert!(!dup, "enumerator emitted a duplicate tuple");
    out
}

fn engine_answer(q: &PatternQuery, g: &DataGraph, ix: &ReachIndex, cfg: &RigConfig, order: Order) -> Answer {
    let rig = build_rig(q, g, ix, cfg).expect("auto simulation accepts any query");
    if rig.is_empty() {
        return Answer::new();
    }
    let order = match order {
        Order::Jo => jo_order(q, &rig).expect("nonempty rig"),
        Order::Ri => ri_order(q),
        Order::Explicit(seq) => validate_order(q, seq).expect("valid order"),
    };
    enumerate_all(q, &rig, &order)
}

#[derive(Clone, Copy)]
enum Order<'a> {
    Jo,
    Ri,
    Explicit(&'a [usize]),
}

/// A random order with connected prefixes.
fn random_valid_order<R: Rng>(rng: &mut R, q: &PatternQuery) -> Vec<usize> {
    let k = q.num_nodes();
    let mut placed = vec![false; k];
    let mut seq = vec![rng.gen_range(0..k)];
    placed[seq[0]] = true;
    while seq.len() < k {
        let eligible: Vec<usize> = (0..k)
            .filter(|&n| !placed[n] && q.neighbors(n).iter().any(|&m| placed[m]))
            .collect();
        let n = eligible[rng.gen_range(0..eligible.len())];
        placed[n] = true;
        seq.push(n);
    }
    seq
}

fn describe(a: &Answer, b: &Answer) -> String {
    let missing: Vec<&Vec<NodeId>> = a.difference(b).take(3).collect();
    let extra: Vec<&Vec<NodeId>> = b.difference(a).take(3).collect();
    format!(
        "expected {} tuples, got {}; missing {:?}, unexpected {:?}",
        a.len(),
        b.len(),
        missing,
        extra
    )
}

fn same_sets(a: &FbRelation, b: &FbRelation) -> bool {
    a.sets() == b.sets()
}

/// Runs the full invariant suite on one instance.
pub fn check_instance(inst: &Instance, opts: &CheckOptions) -> Result<CheckSummary, Violation> {
    let fail = |check: &'static str, detail: String| Violation {
        seed: inst.seed,
        check,
        detail,
    };
    let g = &inst.graph;
    let q = &inst.query;
    let ix = ReachIndex::build(g);
    let bfs = BfsTester::new(g);
    let oracle = brute_force_with(q, g, &bfs).map_err(|e| fail("oracle guard", e.to_string()))?;
    let mut summary = CheckSummary {
        answer_size: oracle.len(),
        query_is_dag: q.is_dag(),
        engine_runs: 0,
    };

    let engine_q = match opts.mutation {
        Some(Mutation::WeakenFirstDirectEdge) => match q.edges().iter().position(|e| e.kind == EdgeKind::Direct) {
            Some(i) => q.with_edge_kind(i, EdgeKind::Reachability),
            None => q.clone(),
        },
        _ => q.clone(),
    };

    // Answers under both RIG modes and all orders.
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed ^ 0x5eed);
    let explicit = random_valid_order(&mut rng, &engine_q);
    for mode in [RigMode::Refined, RigMode::Match] {
        let cfg = RigConfig::default().with_mode(mode);
        for (name, order) in [
            ("jo", Order::Jo),
            ("ri", Order::Ri),
            ("random", Order::Explicit(&explicit)),
        ] {
            let got = engine_answer(&engine_q, g, &ix, &cfg, order);
            summary.engine_runs += 1;
            if got != oracle {
                return Err(fail(
                    "oracle equivalence",
                    format!("mode {mode:?}, order {name}: {}", describe(&oracle, &got)),
                ));
            }
        }
    }

    // Optimisation toggles.
    for (name, cfg) in optimisation_variants() {
        let got = engine_answer(&engine_q, g, &ix, &cfg, Order::Jo);
        summary.engine_runs += 1;
        if got != oracle {
            return Err(fail(
                "optimisation transparency",
                format!("{name}: {}", describe(&oracle, &got)),
            ));
        }
    }

    // Reduction preserves the answer.
    let reduced = match opts.mutation {
        Some(Mutation::CorruptReduction) => corrupt_reduction(q),
        _ => q.transitive_reduction(),
    };
    let reduced_answer = brute_force_with(&reduced, g, &bfs).map_err(|e| fail("oracle guard", e.to_string()))?;
    if reduced_answer != oracle {
        return Err(fail("reduction equivalence", describe(&oracle, &reduced_answer)));
    }

    // Uniqueness of the double simulation across algorithms.
    let exact = SimOptions::exact();
    let bas = fb_sim_bas(q, g, &ix, &exact);
    let auto = fb_sim(q, g, &ix, &exact);
    if !same_sets(&bas, &auto) {
        return Err(fail("simulation uniqueness", "fb_sim differs from fb_sim_bas".into()));
    }
    if let Ok(dag) = fb_sim_dag(q, g, &ix, &exact) {
        if !same_sets(&bas, &dag) {
            return Err(fail(
                "simulation uniqueness",
                "fb_sim_dag differs from fb_sim_bas".into(),
            ));
        }
    }
    let plain = fb_sim_bas(q, g, &ix, &SimOptions::plain());
    if !same_sets(&bas, &plain) {
        return Err(fail(
            "simulation uniqueness",
            "optimised and plain fb_sim_bas differ".into(),
        ));
    }

    // Sandwich: os ⊆ FB ⊆ ms per node, os(e) ⊆ cos(e) ⊆ ms(e) per edge.
    let os = occurrence_sets(&oracle, q.num_nodes());
    let ms = naive_match_sets(q, g);
    for n in 0..q.num_nodes() {
        if !os[n].is_subset(bas.set(n)) || !bas.set(n).is_subset(&ms[n]) {
            return Err(fail("node sandwich", format!("query node {n}")));
        }
    }
    let os_e = occurrence_edges(&oracle, q);
    let ms_e = naive_match_edges(q, g, &bfs);
    for mode in [RigMode::Refined, RigMode::Match] {
        let rig = build_rig(q, g, &ix, &RigConfig::default().with_mode(mode)).expect("auto simulation");
        for n in 0..q.num_nodes() {
            let cos: &NodeSet = rig.cos(n);
            if !os[n].is_subset(cos) || !cos.is_subset(&ms[n]) {
                return Err(fail("node sandwich", format!("{mode:?} RIG, query node {n}")));
            }
        }
        for i in 0..q.num_edges() {
            let cos_e: BTreeSet<(NodeId, NodeId)> = rig.edge_pairs(i).into_iter().collect();
            if !os_e[i].is_subset(&cos_e) || !cos_e.is_subset(&ms_e[i]) {
                return Err(fail("edge sandwich", format!("{mode:?} RIG, query edge {i}")));
            }
            if mode == RigMode::Match && !rig.is_empty() && cos_e != ms_e[i] {
                return Err(fail("match RIG edges", format!("query edge {i}")));
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_reproducible() {
        let b = FuzzBounds::default();
        let a = generate_instance(instance_seed(1, 5), &b);
        let c = generate_instance(instance_seed(1, 5), &b);
        assert_eq!(a.graph.to_text(), c.graph.to_text());
        assert_eq!(a.query, c.query);
        assert_ne!(instance_seed(1, 5), instance_seed(1, 6));
    }

    #[test]
    fn a_few_instances_pass() {
        let b = FuzzBounds::default();
        for i in 0..6 {
            let inst = generate_instance(instance_seed(42, i), &b);
            check_instance(&inst, &CheckOptions::default()).unwrap();
        }
    }
}
