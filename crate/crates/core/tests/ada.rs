mod support;

use hetree::ada::{create_edges, merge_leaves, rebuild_reference, replace_node, Route};
use hetree::tree::{compare_subtrees, compare_trees};
use hetree::{adapt, build_hetree_c, build_tree, sort_dataset, AdaptTarget, AdaptationCase, Dataset, Error, HETree, NodeStats, TreeParams, Variant};
use rand::Rng;
use support::*;

/// Sixteen values in eight two-object leaves named h..o, under a binary tree of height 3.
const VALUES: [f64; 16] = [10.0, 12.0, 14.0, 16.0, 20.0, 22.0, 30.0, 32.0, 40.0, 44.0, 50.0, 52.0, 60.0, 64.0, 70.0, 80.0];

fn sample_tree() -> HETree {
    let ds = sort_dataset(Dataset::from_values("v", VALUES.iter().enumerate().map(|(i, v)| (format!("x{i:02}"), *v))));
    let (t, _) = build_hetree_c(ds, 8, 2).unwrap();
    assert_eq!(t.height(), 3);
    t
}

fn leaf_stats(t: &HETree) -> Vec<NodeStats> {
    t.leaves().iter().map(|&l| t.node(l).stats).collect()
}

#[test]
fn halving_the_leaves_merges_sibling_pairs() {
    let mut t = sample_tree();
    let height_one: Vec<NodeStats> = t.levels()[1].iter().map(|&n| t.node(n).stats).collect();
    let (_, rep) = adapt(&mut t, None, AdaptTarget::Leaves(4)).unwrap();
    assert_eq!(rep.case, AdaptationCase::LeavesDivPow { k: 1 });
    assert_eq!(rep.route, Route::Direct);
    assert_eq!(leaf_values(&t), [vec![10.0, 12.0, 14.0, 16.0], vec![20.0, 22.0, 30.0, 32.0], vec![40.0, 44.0, 50.0, 52.0], vec![60.0, 64.0, 70.0, 80.0]]);
    assert_eq!(leaf_stats(&t), height_one);
    assert_eq!(t.height(), 2);
    assert_eq!((rep.leaves_derived, rep.counters().nodes_built - rep.leaves_derived), (4, 0));
    assert_eq!(rep.counters().stats_from_scratch + rep.counters().stats_aggregated, 0);
    t.check_invariants().unwrap();
}

#[test]
fn degree_six_keeps_leaves_and_reuses_lower_stats() {
    let mut t = sample_tree();
    let leaves = t.leaves().to_vec();
    let old_first: Vec<NodeStats> = t.levels()[1].iter().map(|&n| t.node(n).stats).collect();
    let (_, rep) = adapt(&mut t, None, AdaptTarget::Degree(6)).unwrap();
    assert_eq!(rep.case, AdaptationCase::DegreeMult { k: 3 });
    assert_eq!(t.leaves(), leaves.as_slice());
    let first: Vec<&hetree::tree::Node> = t.levels()[1].iter().map(|&n| t.node(n)).collect();
    assert_eq!(first.iter().map(|n| n.children.len()).collect::<Vec<_>>(), [6, 2]);
    assert_eq!(first[0].stats, NodeStats::merge(&old_first[0..3]));
    assert_eq!(first[1].stats, old_first[3]);
    assert_eq!(t.height(), 2);
    assert_eq!((rep.internals_scratch, rep.stats_internals_derived, rep.stats_internals_scratch), (3, 2, 1));
    t.check_invariants().unwrap();
}

#[test]
fn squaring_the_degree_skips_a_level() {
    let mut t = sample_tree();
    let before: std::collections::BTreeSet<_> = t.nodes().map(|n| n.id).collect();
    let (h2, root) = (t.levels()[2].clone(), t.root().unwrap());
    let (_, rep) = adapt(&mut t, None, AdaptTarget::Degree(4)).unwrap();
    assert_eq!(rep.case, AdaptationCase::DegreePow { k: 2 });
    assert_eq!(rep.counters().nodes_built + rep.counters().stats_from_scratch + rep.counters().stats_aggregated, 0);
    assert_eq!(t.levels()[1], h2);
    assert_eq!(t.root(), Some(root));
    assert!(t.nodes().all(|n| before.contains(&n.id)));
    assert_eq!(t.node(h2[0]).children.len(), 4);
    assert_eq!(t.node_count(), 11);
    t.check_invariants().unwrap();
}

#[test]
fn five_leaves_mix_reused_stats_and_raw_values() {
    let mut t = sample_tree();
    let old = leaf_stats(&t);
    let (_, rep) = adapt(&mut t, None, AdaptTarget::Leaves(5)).unwrap();
    assert_eq!(rep.case, AdaptationCase::LeavesMinus { k: 3 });
    assert_eq!(
        leaf_values(&t),
        [vec![10.0, 12.0, 14.0, 16.0], vec![20.0, 22.0, 30.0], vec![32.0, 40.0, 44.0], vec![50.0, 52.0, 60.0], vec![64.0, 70.0, 80.0]]
    );
    let got = leaf_stats(&t);
    // First leaf from the stats of h and i alone.
    assert_eq!(got[0], NodeStats::merge([&old[0], &old[1]]));
    assert_eq!(got[0].mean, 13.0);
    // Second from j's stats plus raw 30; third from raw 32 plus l's stats.
    assert_eq!(got[1], NodeStats::merge([&old[2], &NodeStats::from_values([30.0])]));
    assert!(close(got[1].mean, 24.0, 1e-12));
    assert_eq!(got[2], NodeStats::merge([&old[4], &NodeStats::from_values([32.0])]));
    assert!(close(got[2].mean, 116.0 / 3.0, 1e-12));
    assert_eq!((rep.leaves_scratch, rep.stats_leaves_derived, rep.stats_leaves_scratch), (5, 5, 0));
    assert_eq!(rep.objects_scanned, 4);
    assert_eq!(rep.internals_scratch, 6);
    t.check_invariants().unwrap();
}

#[test]
fn rejections() {
    let mut t = sample_tree();
    assert_eq!(adapt(&mut t, None, AdaptTarget::Degree(2)).unwrap_err(), Error::NoChange);
    assert!(matches!(adapt(&mut t, None, AdaptTarget::Degree(1)), Err(Error::InvalidParams(_))));
    assert!(matches!(adapt(&mut t, None, AdaptTarget::Leaves(17)), Err(Error::InvalidParams(_))));
    let leaf = t.leaves()[0];
    assert!(matches!(adapt(&mut t, Some(leaf), AdaptTarget::Degree(3)), Err(Error::Unsupported(_))));
    assert!(matches!(adapt(&mut t, Some(hetree::NodeId(999)), AdaptTarget::Degree(3)), Err(Error::UnknownNode(_))));
    let mut s = hetree::ExplorationSession::incremental(running_sorted(), TreeParams::new(Variant::C, 5, 3), &hetree::StartRequest::Bsc).unwrap();
    assert!(matches!(s.adapt(AdaptTarget::Degree(2), None), Err(Error::Unsupported(_))));
}

#[test]
fn single_leaf_results_keep_a_root() {
    let mut t = sample_tree();
    let (_, rep) = adapt(&mut t, None, AdaptTarget::Leaves(1)).unwrap();
    assert_eq!(rep.case, AdaptationCase::LeavesDivPow { k: 3 });
    assert_eq!(t.leaves().len(), 1);
    assert_eq!(t.height(), 1);
    compare_trees(&t, &build_tree(t.dataset().clone(), TreeParams::new(Variant::C, 1, 2)).unwrap().0, 1e-9).unwrap();
}

#[test]
fn helper_procedures() {
    let mut t = sample_tree();
    let leaves = t.leaves().to_vec();
    let merged = merge_leaves(&mut t, &leaves, 3);
    assert_eq!(merged.len(), 3);
    assert_eq!(t.values(merged[2]), [60.0, 64.0, 70.0, 80.0]);
    assert!(t.node(merged[0]).stats.approx_eq(&NodeStats::from_values(VALUES[..6].iter().copied()), 1e-12));

    let mut t = sample_tree();
    let (a, b) = (t.levels()[1][0], t.levels()[1][1]);
    let root = t.root().unwrap();
    replace_node(&mut t, a, b);
    let p = t.node(b).parent.unwrap();
    assert_eq!(t.node(p).children[0], b);
    replace_node(&mut t, root, a);
    assert_eq!((t.root(), t.node(a).parent), (Some(a), None));

    let mut t = sample_tree();
    let (h1, leaves) = (t.levels()[1].clone(), t.leaves().to_vec());
    create_edges(&mut t, &h1[..2], &leaves, 4).unwrap();
    assert_eq!(t.node(h1[1]).children, leaves[4..]);
    assert!(create_edges(&mut t, &h1[..1], &leaves, 4).is_err());
}

#[test]
fn subtree_adaptation_leaves_the_rest_alone() {
    for variant in [Variant::C, Variant::R] {
        for (seed, target) in [(1, AdaptTarget::Degree(9)), (2, AdaptTarget::Leaves(3)), (3, AdaptTarget::Leaves(5)), (4, AdaptTarget::Degree(2)), (5, AdaptTarget::Leaves(20))] {
            let mut r = rng(seed);
            let ds = random_dataset(&mut r, 2000, false);
            let (mut t, _) = build_tree(ds, TreeParams::new(variant, 243, 3)).unwrap();
            let original = t.clone();
            let level = &t.levels()[2];
            let sub = level[r.random_range(0..level.len())];
            let (l2, d2) = match target {
                AdaptTarget::Degree(d2) => (9, d2),
                AdaptTarget::Leaves(l2) => (l2, 3),
            };
            let reference = rebuild_reference(&t, sub, l2, d2).unwrap();
            let inside: std::collections::HashSet<_> = hetree::ada::subtree_levels(&t, sub).into_iter().flatten().collect();
            let (new_root, _) = adapt(&mut t, Some(sub), target).unwrap();
            compare_subtrees(&t, new_root, &reference, reference.root().unwrap(), 1e-9).unwrap();
            assert_eq!(t.params(), original.params());
            for n in original.nodes().filter(|n| !inside.contains(&n.id)) {
                let now = t.node(n.id);
                assert_eq!((now.interval, now.stats, &now.data), (n.interval, n.stats, &n.data));
            }
            let pos = original.node(original.node(sub).parent.unwrap()).children.iter().position(|&c| c == sub).unwrap();
            assert_eq!(t.node(t.node(new_root).parent.unwrap()).children[pos], new_root);
        }
    }
}

#[test]
fn chained_adaptations_stay_equivalent() {
    for variant in [Variant::C, Variant::R] {
        let mut r = rng(17);
        let ds = random_dataset(&mut r, 3000, true);
        let (mut t, _) = build_tree(ds.clone(), TreeParams::new(variant, 81, 3)).unwrap();
        let chain = [
            AdaptTarget::Degree(9),
            AdaptTarget::Leaves(27),
            AdaptTarget::Degree(3),
            AdaptTarget::Leaves(100),
            AdaptTarget::Degree(5),
            AdaptTarget::Leaves(40),
            AdaptTarget::Leaves(7),
            AdaptTarget::Degree(2),
        ];
        for target in chain {
            adapt(&mut t, None, target).unwrap();
            let fresh = build_tree(ds.clone(), *t.params()).unwrap().0;
            compare_trees(&t, &fresh, 1e-9).unwrap_or_else(|e| panic!("{variant} {target:?}: {e}"));
            t.check_invariants().unwrap();
        }
    }
}

fn sweep(case: usize, table2: bool) {
    let sizes = AdaSizes { max_leaves: 100, max_objects: 3000 };
    let mut failures = Vec::new();
    for variant in [Variant::C, Variant::R] {
        for seed in 0..25u64 {
            if let Err(e) = ada_instance(seed * 104_729 + case as u64, case, variant, sizes, table2) {
                failures.push(format!("{variant} seed {seed}: {e}"));
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn randomized_cases_match_fresh_builds() {
    for case in 0..ADA_CASES.len() {
        sweep(case, false);
    }
}

#[test]
fn randomized_cases_respect_work_table() {
    for case in 0..ADA_CASES.len() {
        sweep(case, true);
    }
}
