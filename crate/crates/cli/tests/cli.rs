use std::path::PathBuf;
use std::process::{Command, Output};

use rigmatch::DataGraph;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn rigmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigmatch"))
        .args(args)
        .env_remove("RIGMATCH_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn query_args<'a>(graph: &'a str, query: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["query", "--graph", graph, "--query", query];
    v.extend_from_slice(extra);
    v
}

fn without_timing(s: &str) -> String {
    s.lines()
        .map(|l| match l.find(" elapsed_ms=") {
            Some(i) => &l[..i],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn running_example_prints_four_tuples() {
    let (g, q) = (fixture("running_graph.txt"), fixture("running_query.txt"));
    let o = rigmatch(&query_args(g.to_str().unwrap(), q.to_str().unwrap(), &[]));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "0:A\t1:B\t2:C");
    let mut tuples: Vec<&str> = lines[1..lines.len() - 1].to_vec();
    tuples.sort_unstable();
    assert_eq!(tuples, ["1\t3\t7", "1\t3\t8", "2\t5\t7", "2\t5\t9"]);
    assert!(lines
        .last()
        .unwrap()
        .starts_with("# matches=4 completed=true elapsed_ms="));
}

#[test]
fn match_cap_truncates_and_exits_three() {
    let (g, q) = (fixture("running_graph.txt"), fixture("running_query.txt"));
    let o = rigmatch(&query_args(
        g.to_str().unwrap(),
        q.to_str().unwrap(),
        &["--max-matches", "2"],
    ));
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 4);
    assert!(out.lines().last().unwrap().starts_with("# matches=2 completed=false"));
    let o = rigmatch(&query_args(
        g.to_str().unwrap(),
        q.to_str().unwrap(),
        &["--max-matches", "4"],
    ));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn absent_label_gives_no_tuples_and_an_empty_rig() {
    let (g, q) = (fixture("running_graph.txt"), fixture("absent_label.txt"));
    let o = rigmatch(&query_args(
        g.to_str().unwrap(),
        q.to_str().unwrap(),
        &["--output", "stats"],
    ));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("rig_nodes=0 rig_edges=0"), "{out}");
    assert!(out.contains("rig_empty=true"));
    assert!(out.lines().last().unwrap().starts_with("# matches=0 completed=true"));
}

#[test]
fn output_is_deterministic_across_runs() {
    let (g, q) = (fixture("running_graph.txt"), fixture("running_query.txt"));
    for extra in [
        &[][..],
        &["--order", "ri"][..],
        &["--mode", "match", "--sim", "bas"][..],
    ] {
        let a = rigmatch(&query_args(g.to_str().unwrap(), q.to_str().unwrap(), extra));
        let b = rigmatch(&query_args(g.to_str().unwrap(), q.to_str().unwrap(), extra));
        assert_eq!(without_timing(&stdout(&a)), without_timing(&stdout(&b)));
    }
}

#[test]
fn every_configuration_finds_the_same_tuples() {
    let (g, q) = (fixture("running_graph.txt"), fixture("running_query.txt"));
    let sorted = |o: &Output| {
        let mut v: Vec<String> = stdout(o)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(String::from)
            .collect();
        v.sort();
        v
    };
    let base = sorted(&rigmatch(&query_args(g.to_str().unwrap(), q.to_str().unwrap(), &[])));
    let variants: &[&[&str]] = &[
        &["--order", "ri"],
        &["--order", "2,1,0"],
        &["--mode", "match"],
        &["--sim", "dag"],
        &["--sim", "bas", "--sim-cap", "exact"],
        &["--sim-cap", "1"],
        &["--no-reduce"],
    ];
    for v in variants {
        let o = rigmatch(&query_args(g.to_str().unwrap(), q.to_str().unwrap(), v));
        assert_eq!(o.status.code(), Some(0), "{v:?}");
        assert_eq!(sorted(&o), base, "{v:?}");
    }
}

#[test]
fn count_output_prints_only_the_trailer() {
    let (g, q) = (fixture("running_graph.txt"), fixture("running_query.txt"));
    let o = rigmatch(&query_args(
        g.to_str().unwrap(),
        q.to_str().unwrap(),
        &["--output", "count"],
    ));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("# matches=4 completed=true"));
}

#[test]
fn dumps_go_to_stderr() {
    let (g, q) = (fixture("running_graph.txt"), fixture("running_query.txt"));
    let o = rigmatch(&query_args(
        g.to_str().unwrap(),
        q.to_str().unwrap(),
        &["--dump-sim", "--dump-rig", "--sim-cap", "exact"],
    ));
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert!(err.contains("s 0 A 1 2\n"), "{err}");
    assert!(err.contains("s 1 B 3 5\n"));
    assert!(err.contains("s 2 C 7 8 9\n"));
    assert!(err.contains("t 7 11\n"));
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn exit_codes_follow_the_contract() {
    let (g, q) = (fixture("running_graph.txt"), fixture("running_query.txt"));
    let (g, q) = (g.to_str().unwrap(), q.to_str().unwrap());
    let cyclic = fixture("cyclic.txt");
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["frobnicate"], 1),
        (vec!["query", "--graph", g], 1),
        (query_args(g, q, &["--mode", "sideways"]), 1),
        (query_args(g, q, &["--sim-cap", "0"]), 1),
        (query_args(g, q, &["--order", "0,0,1"]), 1),
        (query_args(g, cyclic.to_str().unwrap(), &["--sim", "dag"]), 1),
        (query_args(g, cyclic.to_str().unwrap(), &["--sim", "bas"]), 0),
        (query_args("/nonexistent/graph.txt", q, &[]), 2),
        (query_args(g, "/nonexistent/query.txt", &[]), 2),
        (query_args(q, q, &[]), 2),
        (query_args(g, g, &[]), 2),
        (vec!["--help"], 0),
    ];
    for (args, code) in cases {
        assert_eq!(rigmatch(&args).status.code(), Some(code), "{args:?}");
    }
}

#[test]
fn several_queries_share_one_run() {
    let g = fixture("running_graph.txt");
    let (q1, q2) = (fixture("running_query.txt"), fixture("absent_label.txt"));
    let o = rigmatch(&[
        "query",
        "-g",
        g.to_str().unwrap(),
        "-q",
        q1.to_str().unwrap(),
        q2.to_str().unwrap(),
        "--output",
        "count",
    ]);
    let out = stdout(&o);
    let trailers: Vec<&str> = out.lines().filter(|l| l.starts_with("# matches=")).collect();
    assert_eq!(trailers.len(), 2);
    assert!(trailers[0].starts_with("# matches=4 "));
    assert!(trailers[1].starts_with("# matches=0 "));
}

#[test]
fn empty_workload_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("empty.txt");
    std::fs::write(&w, "# nothing\n\n").unwrap();
    let o = rigmatch(&["bench", "--workload", w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "graph,query,nodes,edges,sim_passes,rig_nodes,rig_edges,rig_ratio,match_ms,enum_ms,matches,completed\n"
    );
}

#[test]
fn bench_writes_one_row_per_query() {
    let o = rigmatch(&["bench", "--workload", fixture("workload.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][1].ends_with("running_query.txt"));
    assert_eq!(&rows[0][2], "10");
    assert_eq!(&rows[0][3], "14");
    assert_eq!(&rows[0][10], "4");
    assert_eq!(&rows[0][11], "true");
    assert_eq!(&rows[1][5], "0");
    assert_eq!(&rows[1][10], "0");
}

#[test]
fn bench_records_failures_and_keeps_going() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.txt");
    std::fs::write(
        &w,
        format!(
            "{g} missing.txt {q}\n",
            g = fixture("running_graph.txt").display(),
            q = fixture("running_query.txt").display()
        ),
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let o = rigmatch(&["bench", "-w", w.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][11], "error");
    assert_eq!(&rows[1][10], "4");
}

#[test]
fn bench_limits_exit_three() {
    let o = rigmatch(&[
        "bench",
        "--workload",
        fixture("workload.txt").to_str().unwrap(),
        "--max-matches",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn synthetic_bench_covers_every_template() {
    let o = rigmatch(&[
        "bench",
        "--synthetic",
        "--nodes",
        "2000",
        "--edges",
        "8000",
        "--labels",
        "5",
        "--max-matches",
        "1000",
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(3)));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), rigmatch::generate::templates().len());
    assert!(rows.iter().all(|r| &r[11] == "true" || &r[10] == "1000"));
}

#[test]
fn fuzz_passes_and_reports_seed() {
    let o = rigmatch(&["fuzz", "--seed", "1", "--count", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("# fuzz seed=1 instances=50"));
    assert!(out.contains("# passed=50 failed=0"));
}

#[test]
fn fuzz_seed_env_overrides_flag() {
    let o = Command::new(env!("CARGO_BIN_EXE_rigmatch"))
        .args(["fuzz", "--seed", "1", "--count", "3"])
        .env("RIGMATCH_SEED", "99")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("# fuzz seed=99 "));
    let bad = Command::new(env!("CARGO_BIN_EXE_rigmatch"))
        .args(["fuzz", "--count", "3"])
        .env("RIGMATCH_SEED", "soon")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn fuzz_mutation_is_reported_and_replays_identically() {
    let o = rigmatch(&["fuzz", "--seed", "3", "--count", "200", "--mutate", "corrupt-reduction"]);
    assert_eq!(o.status.code(), Some(4));
    let out = stdout(&o);
    let fail = out.lines().find(|l| l.starts_with("FAIL ")).expect("a counterexample");
    assert!(fail.contains("check=reduction equivalence"), "{fail}");
    let seed: &str = fail.split_whitespace().find_map(|t| t.strip_prefix("seed=")).unwrap();
    let replay_line = out.lines().find(|l| l.starts_with("# replay: ")).unwrap();
    let args: Vec<&str> = replay_line["# replay: rigmatch ".len()..].split_whitespace().collect();
    let a = rigmatch(&args);
    let b = rigmatch(&args);
    assert_eq!(a.status.code(), Some(4));
    assert_eq!(a.stdout, b.stdout);
    let detail = |s: &str| s[s.find(" check=").unwrap()..].to_string();
    let replayed = stdout(&a);
    let replay_fail = replayed.lines().find(|l| l.starts_with("FAIL ")).unwrap();
    assert!(replay_fail.contains(&format!("seed={seed} ")));
    assert_eq!(detail(replay_fail), detail(fail));

    let weak = rigmatch(&["fuzz", "--seed", "3", "--count", "50", "--mutate", "weaken-direct"]);
    assert_eq!(weak.status.code(), Some(4));
}

#[test]
fn fuzz_rejects_tiny_bounds() {
    assert_eq!(rigmatch(&["fuzz", "--max-graph-nodes", "2"]).status.code(), Some(1));
}

#[test]
fn convert_handles_sparse_records() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("g.lg");
    std::fs::write(
        &src,
        "% snap export\nt 3 3\nv 10 X 2\nv 20 Y 1\nv 30 X 1\ne 10 20 0\ne 20 30 0\ne 10 20 1\n",
    )
    .unwrap();
    let out = dir.path().join("g.txt");
    let o = rigmatch(&["convert", src.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let g = DataGraph::parse_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(g.num_nodes(), 3);
    assert_eq!(g.num_edges(), 2);
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "t 3 2\nv 0 X\nv 1 Y\nv 2 X\ne 0 1\ne 1 2\n"
    );
}

#[test]
fn convert_handles_edge_lists_with_label_files() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, labels) = (dir.path().join("e.txt"), dir.path().join("l.txt"));
    std::fs::write(&edges, "# FromNodeId\tToNodeId\n5\t7\n7\t5\n7\t9\n").unwrap();
    std::fs::write(&labels, "5 a\n7 b\n").unwrap();
    let o = rigmatch(&["convert", edges.to_str().unwrap(), "--labels", labels.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = rigmatch(&[
        "convert",
        edges.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--default-label",
        "z",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "t 3 3\nv 0 a\nv 1 b\nv 2 z\ne 0 1\ne 1 0\ne 1 2\n");
}

#[test]
fn converted_running_example_matches() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("g.lg");
    let text = std::fs::read_to_string(fixture("running_graph.txt")).unwrap();
    std::fs::write(&src, text.replace("t 10 14\n", "")).unwrap();
    let out = dir.path().join("g.txt");
    assert_eq!(
        rigmatch(&["convert", src.to_str().unwrap(), "-o", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let o = rigmatch(&query_args(
        out.to_str().unwrap(),
        fixture("running_query.txt").to_str().unwrap(),
        &["--output", "count"],
    ));
    assert!(stdout(&o).starts_with("# matches=4 completed=true"));
}

#[test]
fn convert_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.lg");
    std::fs::write(&src, "v 1 a\nx 1 2\n").unwrap();
    assert_eq!(rigmatch(&["convert", src.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(rigmatch(&["convert", "/nonexistent"]).status.code(), Some(2));
}
