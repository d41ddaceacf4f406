use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigmatch::fuzz::{enumerate_all, generate_instance, instance_seed, FuzzBounds};
use rigmatch::generate::{random_graph, templates, EdgeMix, GraphParams};
use rigmatch::graph::Direction;
use rigmatch::oracle::brute_force_oracle;
use rigmatch::order::{jo_order, ri_order, validate_order, OrderError};
use rigmatch::rig::{build_rig, reach_row, RigConfig, RigMode};
use rigmatch::{count_matches, mjoin, EnumLimits, GraphBuilder, NodeId, NodeSet, PatternQuery, ReachIndex};

fn corpus(n: u64) -> impl Iterator<Item = rigmatch::fuzz::Instance> {
    let b = FuzzBounds::default();
    (0..n).map(move |i| generate_instance(instance_seed(99, i), &b))
}

fn is_valid_order(q: &PatternQuery, seq: &[usize]) -> bool {
    validate_order(q, seq).is_ok()
}

#[test]
fn early_termination_does_not_change_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..30 {
        let g = random_graph(
            &mut rng,
            GraphParams {
                nodes: 150,
                edges: 400,
                labels: 3,
                acyclic: true,
            },
        );
        let ix = ReachIndex::build(&g);
        assert!(ix.ids_follow_discovery());
        let pool: NodeSet = (0..150).filter(|_| rng.gen_bool(0.4)).collect();
        for u in 0..150 {
            assert_eq!(
                reach_row(&ix, u, &pool, true),
                reach_row(&ix, u, &pool, false),
                "node {u}"
            );
        }
    }
}

#[test]
fn rig_rows_are_consistent_and_k_partite() {
    for inst in corpus(60) {
        let (g, q) = (&inst.graph, &inst.query);
        let ix = ReachIndex::build(g);
        for mode in [RigMode::Refined, RigMode::Match] {
            let rig = build_rig(q, g, &ix, &RigConfig::default().with_mode(mode)).unwrap();
            for (i, e) in q.edges().iter().enumerate() {
                let pairs = rig.edge_pairs(i);
                for &(u, v) in &pairs {
                    assert!(rig.cos(e.tail).contains(u) && rig.cos(e.head).contains(v));
                    assert!(rig.row(i, Direction::Backward, v).unwrap().contains(u));
                }
                let back: usize = rig
                    .cos(e.head)
                    .iter()
                    .filter_map(|v| rig.row(i, Direction::Backward, v))
                    .map(NodeSet::len)
                    .sum();
                assert_eq!(back, pairs.len());
            }
            let s = rig.stats(g);
            assert_eq!(s.nodes, rig.cos_sets().iter().map(NodeSet::len).sum::<usize>());
            assert_eq!(
                s.edges,
                (0..q.num_edges()).map(|i| rig.edge_pairs(i).len()).sum::<usize>()
            );
        }
    }
}

#[test]
fn refined_rig_is_inside_match_rig_and_encodes_every_answer() {
    for inst in corpus(80) {
        let (g, q) = (&inst.graph, &inst.query);
        let ix = ReachIndex::build(g);
        let refined = build_rig(q, g, &ix, &RigConfig::default()).unwrap();
        let matched = build_rig(q, g, &ix, &RigConfig::default().with_mode(RigMode::Match)).unwrap();
        for n in 0..q.num_nodes() {
            assert!(refined.cos(n).is_subset(matched.cos(n)));
        }
        for i in 0..q.num_edges() {
            let m: BTreeSet<_> = matched.edge_pairs(i).into_iter().collect();
            assert!(refined.edge_pairs(i).iter().all(|p| m.contains(p)));
        }
        let answer = brute_force_oracle(q, g, &ix).unwrap();
        for t in &answer {
            for (i, e) in q.edges().iter().enumerate() {
                assert!(refined.has_edge(i, t[e.tail], t[e.head]));
            }
        }
    }
}

#[test]
fn orders_are_valid_and_answers_order_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for inst in corpus(80) {
        let (g, q) = (&inst.graph, &inst.query);
        let ix = ReachIndex::build(g);
        let rig = build_rig(q, g, &ix, &RigConfig::default()).unwrap();
        let ri = ri_order(q);
        assert!(is_valid_order(q, ri.sequence()));
        assert_eq!(ri, ri_order(q));
        if rig.is_empty() {
            assert_eq!(jo_order(q, &rig), Err(OrderError::EmptyRig));
            continue;
        }
        let jo = jo_order(q, &rig).unwrap();
        assert!(is_valid_order(q, jo.sequence()));
        let first = jo.sequence()[0];
        let min = (0..q.num_nodes()).map(|n| rig.cos(n).len()).min().unwrap();
        assert_eq!(rig.cos(first).len(), min);
        let reference = enumerate_all(q, &rig, &jo);
        assert_eq!(reference, enumerate_all(q, &rig, &ri));
        // A few shuffled orders that keep prefixes connected.
        for _ in 0..3 {
            let mut seq: Vec<usize> = Vec::new();
            let mut left: Vec<usize> = (0..q.num_nodes()).collect();
            while !left.is_empty() {
                let ok: Vec<usize> = left
                    .iter()
                    .copied()
                    .filter(|&n| seq.is_empty() || q.neighbors(n).iter().any(|m| seq.contains(m)))
                    .collect();
                let n = ok[rng.gen_range(0..ok.len())];
                left.retain(|&m| m != n);
                seq.push(n);
            }
            let o = validate_order(q, &seq).unwrap();
            assert_eq!(reference, enumerate_all(q, &rig, &o));
        }
    }
}

#[test]
fn jo_star_takes_a_leaf_then_the_center() {
    // The center label is common, the leaf labels are rare.
    let mut b = GraphBuilder::new();
    let centers: Vec<NodeId> = (0..20).map(|_| b.add_node("c")).collect();
    for leaf in ["x", "y", "z"] {
        let v = b.add_node(leaf);
        b.add_edge(centers[0], v).unwrap();
    }
    let g = b.build();
    let ix = ReachIndex::build(&g);
    let q = PatternQuery::parse_str("n 0 c\nn 1 x\nn 2 y\nn 3 z\nd 0 1\nd 0 2\nd 0 3\n").unwrap();
    let rig = build_rig(&q, &g, &ix, &RigConfig::default().with_mode(RigMode::Match)).unwrap();
    assert_eq!(jo_order(&q, &rig).unwrap().sequence(), &[1, 0, 2, 3]);
}

#[test]
fn template_orders_have_connected_prefixes() {
    for t in templates() {
        let q = t.instantiate(&vec!["a".to_string(); t.nodes], EdgeMix::Hybrid);
        assert!(is_valid_order(&q, ri_order(&q).sequence()), "{}", t.name);
    }
}

#[test]
fn match_cap_yields_prefix_of_full_enumeration() {
    for inst in corpus(60) {
        let (g, q) = (&inst.graph, &inst.query);
        let ix = ReachIndex::build(g);
        let rig = build_rig(q, g, &ix, &RigConfig::default()).unwrap();
        if rig.is_empty() {
            continue;
        }
        let order = jo_order(q, &rig).unwrap();
        let total = count_matches(q, &rig, &order, &EnumLimits::unlimited()).matches;
        let truth = brute_force_oracle(q, g, &ix).unwrap();
        assert_eq!(total as usize, truth.len());
        for k in [0, 1, 2, total.saturating_sub(1), total, total + 1] {
            let mut got: Vec<Vec<NodeId>> = Vec::new();
            let r = mjoin(q, &rig, &order, &EnumLimits::unlimited().with_max_matches(k), |t| {
                got.push(t.to_vec());
                Ok::<(), ()>(())
            })
            .unwrap();
            assert_eq!(r.matches, k.min(total));
            assert_eq!(got.len() as u64, k.min(total));
            assert_eq!(r.completed, k >= total, "k {k}, total {total}");
            assert!(got.iter().all(|t| truth.contains(t)));
        }
    }
}
