use rigmatch::fuzz::{check_instance, generate_instance, instance_seed, CheckOptions, FuzzBounds, Mutation};

#[test]
fn random_corpus_matches_oracles() {
    let bounds = FuzzBounds::default();
    let (mut dag, mut cyclic, mut nonempty) = (0, 0, 0);
    for i in 0..300 {
        let inst = generate_instance(instance_seed(2024, i), &bounds);
        let s = check_instance(&inst, &CheckOptions::default()).unwrap_or_else(|v| panic!("{v}"));
        if s.query_is_dag {
            dag += 1;
        } else {
            cyclic += 1;
        }
        if s.answer_size > 0 {
            nonempty += 1;
        }
    }
    assert!(dag >= 100 && cyclic >= 50, "dag {dag}, cyclic {cyclic}");
    assert!(nonempty >= 30, "only {nonempty} instances had a nonempty answer");
}

#[test]
fn weakened_edges_are_caught() {
    let bounds = FuzzBounds::default();
    let opts = CheckOptions {
        mutation: Some(Mutation::WeakenFirstDirectEdge),
    };
    let caught = (0..200)
        .map(|i| generate_instance(instance_seed(7, i), &bounds))
        .filter(|inst| check_instance(inst, &opts).is_err())
        .count();
    assert!(caught > 0);
}

#[test]
fn corrupted_reduction_is_caught() {
    let bounds = FuzzBounds::default();
    let opts = CheckOptions {
        mutation: Some(Mutation::CorruptReduction),
    };
    let caught: Vec<_> = (0..200)
        .map(|i| generate_instance(instance_seed(11, i), &bounds))
        .filter_map(|inst| check_instance(&inst, &opts).err())
        .collect();
    assert!(!caught.is_empty());
    assert!(caught.iter().all(|v| v.check == "reduction equivalence"));
}
