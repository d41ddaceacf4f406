use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigmatch::generate::{random_graph, GraphParams};
use rigmatch::oracle::BfsReach;
use rigmatch::reach::ReachConfig;
use rigmatch::{DataGraph, ReachIndex};

fn assert_agrees(g: &DataGraph, ix: &ReachIndex, tag: &str) {
    let bfs = BfsReach::new(g);
    let n = g.num_nodes() as u32;
    for u in 0..n {
        for v in 0..n {
            assert_eq!(ix.reaches(u, v).unwrap(), bfs.reaches(u, v), "{tag}: ({u}, {v})");
        }
    }
}

#[test]
fn index_matches_bfs_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..60 {
        let nodes = rng.gen_range(2..=200);
        let p = GraphParams {
            nodes,
            edges: rng.gen_range(nodes / 2..=nodes * 3),
            labels: 3,
            acyclic: i % 3 == 0,
        };
        let g = random_graph(&mut rng, p);
        assert_agrees(&g, &ReachIndex::build(&g), &format!("graph {i}"));
        // A tiny cache forces evictions on the fallback path.
        let small = ReachConfig {
            cache_capacity: 4,
            ..ReachConfig::default()
        };
        assert_agrees(
            &g,
            &ReachIndex::build_with(&g, small),
            &format!("graph {i}, small cache"),
        );
    }
}

#[test]
fn components_match_mutual_reachability() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let nodes = rng.gen_range(2..=80);
        let g = random_graph(
            &mut rng,
            GraphParams {
                nodes,
                edges: nodes * 2,
                labels: 2,
                acyclic: false,
            },
        );
        let ix = ReachIndex::build(&g);
        let bfs = BfsReach::new(&g);
        let n = g.num_nodes() as u32;
        for u in 0..n {
            for v in 0..n {
                let same = u == v || (bfs.reaches(u, v) && bfs.reaches(v, u));
                assert_eq!(ix.component(u) == ix.component(v), same, "({u}, {v})");
            }
        }
        // Components come out in topological order of the condensation.
        for (u, v) in g.edges() {
            assert!(ix.component(u) <= ix.component(v));
        }
    }
}
