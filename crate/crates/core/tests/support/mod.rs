//! Fixtures and independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use hetree::ada::AdaptationReport;
use hetree::explore::{legal_operations, Operation, Rendered};
use hetree::{sort_dataset, AdaptationCase, Dataset, ExplorationSession, HETree, NodeId, NodeStats, StartRequest, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const AGE: &str = "http://persons.com/age";

/// The ten-person running example.
pub const RUNNING: [(&str, f64); 10] = [
    ("p0", 35.0),
    ("p1", 100.0),
    ("p2", 55.0),
    ("p3", 37.0),
    ("p4", 30.0),
    ("p5", 35.0),
    ("p6", 45.0),
    ("p7", 80.0),
    ("p8", 20.0),
    ("p9", 50.0),
];

pub fn person(s: &str) -> String {
    format!("http://persons.com/{s}")
}

pub fn running() -> Dataset {
    Dataset::from_values(AGE, RUNNING.iter().map(|(s, v)| (person(s), *v)))
}

pub fn running_sorted() -> Arc<Dataset> {
    Arc::new(sort_dataset(running()))
}

pub fn running_ntriples() -> String {
    RUNNING
        .iter()
        .map(|(s, v)| format!("<{}> <{AGE}> \"{v}\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n", person(s)))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dataset: integer-valued with duplicates when `coarse`, else continuous.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, coarse: bool) -> Arc<Dataset> {
    let pairs: Vec<(String, f64)> = (0..n)
        .map(|i| {
            let v = if coarse { rng.random_range(0..(n as i64 / 2 + 3)) as f64 } else { rng.random_range(-1e4..1e4) };
            (format!("s{i:06}"), v)
        })
        .collect();
    let mut d = sort_dataset(Dataset::from_values("v", pairs));
    if d.minv() == d.maxv() {
        d = sort_dataset(Dataset::from_values("v", [("a", 0.0), ("b", 1.0)]));
    }
    Arc::new(d)
}

pub fn leaf_values(tree: &HETree) -> Vec<Vec<f64>> {
    tree.leaves().iter().map(|&l| tree.values(l)).collect()
}

/// Two-pass population statistics.
pub fn direct_stats(values: &[f64]) -> (u64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (values.len() as u64, mean, var)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Leaf sizes by repeatedly taking ⌈remaining / leaves left⌉.
pub fn slicer_sizes(n: usize, leaves: usize) -> Vec<usize> {
    let mut rem = n;
    (0..leaves)
        .map(|i| {
            let left = leaves - i;
            let take = (rem + left - 1) / left;
            rem -= take;
            take
        })
        .collect()
}

/// Per-object 1-based bin `⌊(o − min)/ρ⌋ + 1`, clamped to ℓ, returned 0-based.
pub fn bin_of(v: f64, min: f64, max: f64, leaves: usize) -> usize {
    let rho = (max - min) / leaves as f64;
    let j = ((v - min) / rho).floor() as usize + 1;
    j.min(leaves) - 1
}

/// Nested grouping of `count` items by `d`, level by level; returns sizes per level bottom-up.
pub fn grouping_sizes(leaves: usize, d: usize) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![1usize; leaves]];
    loop {
        let below = levels.last().unwrap().len();
        let parents: Vec<usize> = (0..below).step_by(d).map(|s| (below - s).min(d)).collect();
        let done = parents.len() == 1;
        levels.push(parents);
        if done {
            return levels;
        }
    }
}

/// A random legal script of `len` operations starting from `req`, recorded as slots.
pub fn random_script(session: &mut ExplorationSession, rng: &mut ChaCha8Rng, len: usize) -> Vec<Operation> {
    let mut ops = Vec::new();
    for _ in 0..len {
        let legal = session.legal_operations();
        let op = legal[rng.random_range(0..legal.len())];
        match op {
            Operation::DrillDown { node, .. } => {
                session.drill_down(node).expect("legal drill");
            }
            Operation::RollUp => {
                session.roll_up().expect("legal roll-up");
            }
            _ => unreachable!(),
        }
        ops.push(op);
    }
    ops
}

pub type Slot = (u32, u32);

pub fn slot(tree: &HETree, id: NodeId) -> Slot {
    let n = tree.node(id);
    (n.height, n.pos)
}

fn non_empty(tree: &HETree, id: NodeId) -> bool {
    !tree.node(id).stats.is_empty()
}

/// Replays slot-addressed operations over a full tree and returns, per state, the rendered
/// slots and the union of rendered plus one-operation-reachable non-empty slots.
pub struct ReplayOracle {
    pub rendered: Vec<BTreeSet<Slot>>,
    pub required: BTreeSet<Slot>,
}

pub fn replay_oracle(full: &HETree, req: &StartRequest, ops: &[Operation]) -> ReplayOracle {
    let mut session = ExplorationSession::full(full.clone(), Default::default(), req).expect("full start");
    let mut required = BTreeSet::new();
    let mut rendered = Vec::new();
    let record = |s: &ExplorationSession, required: &mut BTreeSet<Slot>, rendered: &mut Vec<BTreeSet<Slot>>| {
        let t = s.tree();
        let cur = s.current();
        let shown: BTreeSet<Slot> = match cur {
            Rendered::Objects { leaf } => [slot(t, *leaf)].into(),
            Rendered::Nodes { nodes } => nodes.iter().filter(|&&n| non_empty(t, n)).map(|&n| slot(t, n)).collect(),
        };
        required.extend(shown.iter().copied());
        for op in legal_operations(t, cur) {
            let next = match op {
                // Empty range-variant nodes are never shown, so never drilled.
                Operation::DrillDown { node, .. } if !non_empty(t, node) => continue,
                Operation::DrillDown { node, .. } => hetree::explore::drill_target(t, cur, node),
                Operation::RollUp => hetree::explore::roll_target(t, cur),
                _ => unreachable!(),
            };
            match next.expect("full tree operations succeed") {
                Rendered::Objects { leaf } => {
                    required.insert(slot(t, leaf));
                }
                Rendered::Nodes { nodes } => {
                    required.extend(nodes.iter().filter(|&&n| non_empty(t, n)).map(|&n| slot(t, n)));
                }
            }
        }
        rendered.push(shown);
    };
    record(&session, &mut required, &mut rendered);
    for op in ops {
        match *op {
            Operation::DrillDown { height, pos, .. } => {
                let id = full.levels()[height as usize][pos as usize];
                session.drill_down(id).expect("replayed drill");
            }
            Operation::RollUp => {
                session.roll_up().expect("replayed roll-up");
            }
            _ => unreachable!(),
        }
        record(&session, &mut required, &mut rendered);
    }
    ReplayOracle { rendered, required }
}

pub fn rendered_slots(tree: &HETree, cur: &Rendered) -> BTreeSet<Slot> {
    match cur {
        Rendered::Objects { leaf } => [slot(tree, *leaf)].into(),
        Rendered::Nodes { nodes } => nodes.iter().map(|&n| slot(tree, n)).collect(),
    }
}

pub fn built_slots(tree: &HETree) -> BTreeSet<Slot> {
    tree.nodes().map(|n| (n.height, n.pos)).collect()
}

/// Every built node equals its full-build counterpart at the same slot.
pub fn check_equivalent(partial: &HETree, full: &HETree) -> Result<(), String> {
    for n in partial.nodes() {
        let id = full
            .levels()
            .get(n.height as usize)
            .and_then(|l| l.get(n.pos as usize))
            .copied()
            .ok_or_else(|| format!("slot ({}, {}) missing in full tree", n.height, n.pos))?;
        let f = full.node(id);
        if n.interval != f.interval {
            return Err(format!("slot ({}, {}): interval {} vs {}", n.height, n.pos, n.interval, f.interval));
        }
        if !n.stats.approx_eq(&f.stats, 1e-9) {
            return Err(format!("slot ({}, {}): stats {:?} vs {:?}", n.height, n.pos, n.stats, f.stats));
        }
        if n.is_leaf() {
            let key = |t: &HETree, d: &[u32]| -> Vec<(f64, String)> {
                d.iter().map(|&i| (t.dataset().value(i), t.dataset().get(i).subject.to_string())).collect()
            };
            if key(partial, &n.data) != key(full, &f.data) {
                return Err(format!("leaf ({}, {}) contents differ", n.height, n.pos));
            }
        }
    }
    Ok(())
}

pub fn init_bound(req: &StartRequest, d: u64) -> u64 {
    match req {
        StartRequest::Res { .. } => d,
        StartRequest::Ran { .. } => 2 * d + d * d,
        StartRequest::Bsc => d + 1,
    }
}

/// Runs one randomized incremental-vs-full instance; returns a description of the first failure.
pub fn ico_instance(seed: u64, scenario: usize, variant: Variant) -> Result<(), String> {
    let mut r = rng(seed);
    let n = r.random_range(2..400usize);
    let coarse = r.random_bool(0.5);
    let ds = random_dataset(&mut r, n, coarse);
    let n = ds.len();
    let leaves = r.random_range(1..=n.min(60));
    let d = r.random_range(2..=5usize);
    let params = hetree::TreeParams::new(variant, leaves, d);
    let (full, _) = hetree::build_tree(ds.clone(), params).map_err(|e| e.to_string())?;
    let req = match scenario {
        0 => StartRequest::Bsc,
        1 => {
            let i = r.random_range(0..n as u32);
            StartRequest::Res { resource: ds.get(i).subject.to_string() }
        }
        _ => {
            let (lo, hi) = (ds.minv().unwrap(), ds.maxv().unwrap());
            let a = r.random_range(lo..=hi);
            let b = r.random_range(a..=hi);
            StartRequest::Ran { lower: a, upper: b }
        }
    };
    // The incremental side sees the objects in their original, unsorted order.
    let mut shuffled: Vec<(String, f64)> = ds.objects().iter().map(|o| (o.subject.to_string(), o.value)).collect();
    for i in (1..shuffled.len()).rev() {
        shuffled.swap(i, r.random_range(0..=i));
    }
    let raw = Arc::new(Dataset::from_values("v", shuffled));
    let len = r.random_range(0..25usize);
    ico_check(&full, raw, &req, &mut r, len)
}

/// Drives an incremental session over `raw` with a random script of `len` steps, checking
/// safety, step bounds, the replay oracle and equivalence with `full` along the way.
pub fn ico_check(full: &HETree, raw: Arc<Dataset>, req: &StartRequest, r: &mut ChaCha8Rng, len: usize) -> Result<(), String> {
    let params = *full.params();
    let d = params.degree;
    let req = req.clone();
    let mut ico = ExplorationSession::incremental(raw, params, &req).map_err(|e| e.to_string())?;
    let d64 = d as u64;
    let init = ico.counters().nodes_built;
    if init > init_bound(&req, d64) {
        return Err(format!("init built {init} nodes, bound {}", init_bound(&req, d64)));
    }
    let mut ops = Vec::new();
    for _ in 0..len {
        // Safety: every legal next operation's targets already exist.
        for op in ico.legal_operations() {
            let cur = ico.current();
            let t = ico.tree();
            let next = match op {
                Operation::DrillDown { node, .. } => hetree::explore::drill_target(t, cur, node),
                Operation::RollUp => hetree::explore::roll_target(t, cur),
                _ => unreachable!(),
            };
            next.map_err(|e| format!("safety: {op:?} from {cur:?} fails: {e}"))?;
        }
        let before = ico.counters().nodes_built;
        let op = random_script(&mut ico, r, 1)[0];
        let step = ico.counters().nodes_built - before;
        if step > d64 * d64 {
            return Err(format!("step {op:?} built {step} > d²"));
        }
        ops.push(op);
    }
    let oracle = replay_oracle(full, &req, &ops);
    let built = built_slots(ico.tree());
    if built != oracle.required {
        return Err(format!(
            "built {} nodes, oracle requires {}; extra {:?}, missing {:?}",
            built.len(),
            oracle.required.len(),
            built.difference(&oracle.required).collect::<Vec<_>>(),
            oracle.required.difference(&built).collect::<Vec<_>>()
        ));
    }
    if ico.counters().nodes_built != built.len() as u64 {
        return Err("nodes_built counter disagrees with the partial tree".into());
    }
    let last_rendered = rendered_slots(ico.tree(), ico.current());
    if oracle.rendered.last() != Some(&last_rendered) {
        return Err(format!("final rendering {last_rendered:?} vs full {:?}", oracle.rendered.last()));
    }
    check_equivalent(ico.tree(), full)
}

/// Report fields the work table requires to be zero for a case.
pub fn zero_cells(case: AdaptationCase) -> &'static [&'static str] {
    use AdaptationCase::*;
    match case {
        DegreePow { .. } => &[
            "leaves_scratch",
            "leaves_derived",
            "internals_scratch",
            "internals_derived",
            "stats_leaves_scratch",
            "stats_leaves_derived",
            "stats_internals_scratch",
            "stats_internals_derived",
        ],
        DegreeMult { .. } => {
            &["leaves_scratch", "leaves_derived", "internals_derived", "stats_leaves_scratch", "stats_leaves_derived"]
        }
        DegreeRoot { .. } | DegreeOther => &[
            "leaves_scratch",
            "leaves_derived",
            "internals_derived",
            "stats_leaves_scratch",
            "stats_leaves_derived",
            "stats_internals_derived",
        ],
        LeavesIncrease => &["leaves_derived", "internals_derived", "stats_leaves_derived", "stats_internals_derived"],
        LeavesDivPow { .. } => &[
            "leaves_scratch",
            "internals_scratch",
            "internals_derived",
            "stats_leaves_scratch",
            "stats_leaves_derived",
            "stats_internals_scratch",
            "stats_internals_derived",
        ],
        LeavesDiv { .. } => &["leaves_scratch", "internals_derived", "stats_leaves_scratch", "stats_internals_derived"],
        LeavesMinus { .. } => &["leaves_derived", "internals_derived", "stats_internals_derived"],
    }
}

pub fn report_field(r: &AdaptationReport, name: &str) -> u64 {
    match name {
        "leaves_scratch" => r.leaves_scratch,
        "leaves_derived" => r.leaves_derived,
        "internals_scratch" => r.internals_scratch,
        "internals_derived" => r.internals_derived,
        "stats_leaves_scratch" => r.stats_leaves_scratch,
        "stats_leaves_derived" => r.stats_leaves_derived,
        "stats_internals_scratch" => r.stats_internals_scratch,
        "stats_internals_derived" => r.stats_internals_derived,
        other => panic!("unknown report field {other}"),
    }
}

/// Checks zero cells plus the exactly stated non-zero cells.
pub fn check_table2(r: &AdaptationReport, old_internals: usize, new_internals: usize) -> Result<(), String> {
    for f in zero_cells(r.case) {
        if report_field(r, f) != 0 {
            return Err(format!("{:?}: {f} = {} but must be 0", r.case, report_field(r, f)));
        }
    }
    let (l2, d2) = (r.leaves as u64, r.degree as u64);
    let expect = |what: &str, got: u64, want: u64| {
        if got == want {
            Ok(())
        } else {
            Err(format!("{:?}: {what} = {got}, expected {want}", r.case))
        }
    };
    let new_i = new_internals as u64;
    use AdaptationCase::*;
    match r.case {
        DegreePow { .. } => Ok(()),
        DegreeMult { .. } => {
            expect("internals_scratch", r.internals_scratch, new_i)?;
            expect("stats_internals_derived", r.stats_internals_derived, l2.div_ceil(d2))?;
            expect("stats_internals_scratch", r.stats_internals_scratch, new_i - l2.div_ceil(d2))
        }
        DegreeRoot { .. } => {
            expect("internals_scratch", r.internals_scratch, new_i - old_internals as u64)?;
            expect("stats_internals_scratch", r.stats_internals_scratch, new_i - old_internals as u64)
        }
        DegreeOther | LeavesIncrease | LeavesDiv { .. } | LeavesMinus { .. } => {
            expect("internals_scratch", r.internals_scratch, new_i)?;
            expect("stats_internals_scratch", r.stats_internals_scratch, new_i)?;
            match r.case {
                LeavesIncrease => {
                    expect("leaves_scratch", r.leaves_scratch, l2)?;
                    expect("stats_leaves_scratch", r.stats_leaves_scratch, l2)
                }
                LeavesDiv { .. } => {
                    expect("leaves_derived", r.leaves_derived, l2)?;
                    expect("stats_leaves_derived", r.stats_leaves_derived, l2)
                }
                LeavesMinus { .. } => {
                    expect("leaves_scratch", r.leaves_scratch, l2)?;
                    expect("stats leaves total", r.stats_leaves_scratch + r.stats_leaves_derived, l2)
                }
                _ => Ok(()),
            }
        }
        LeavesDivPow { .. } => expect("leaves_derived", r.leaves_derived, l2),
    }
}

pub fn merge_all(stats: &[NodeStats]) -> NodeStats {
    NodeStats::merge(stats.iter())
}

pub const ADA_CASES: [&str; 8] =
    ["degree_pow", "degree_mult", "degree_root", "degree_other", "leaves_increase", "leaves_div_pow", "leaves_div", "leaves_minus"];

/// Size limits for [`ada_instance`].
#[derive(Debug, Clone, Copy)]
pub struct AdaSizes {
    pub max_leaves: usize,
    pub max_objects: usize,
}

/// Random `(dataset, params, target)` for case `case` (an index into [`ADA_CASES`]).
/// With `aligned`, content datasets for the division cases hold a multiple of ℓ objects so
/// merged leaves line up with a fresh layout.
pub fn ada_setup(r: &mut ChaCha8Rng, case: usize, variant: Variant, sizes: AdaSizes, aligned: bool) -> (Arc<Dataset>, hetree::TreeParams, hetree::AdaptTarget) {
    use hetree::AdaptTarget::*;
    let pick = |r: &mut ChaCha8Rng, xs: &[(usize, usize)]| xs[r.random_range(0..xs.len())];
    let cap = sizes.max_leaves;
    let (d, l, target) = match case {
        0 => {
            let (d, d2) = pick(r, &[(2, 4), (3, 9), (2, 8)]);
            (d, r.random_range(1..=cap), Degree(d2))
        }
        1 => {
            let (d, d2) = pick(r, &[(2, 6), (3, 6), (2, 10), (4, 12), (3, 12)]);
            (d, r.random_range(1..=cap), Degree(d2))
        }
        2 => {
            let (d, d2) = pick(r, &[(4, 2), (9, 3), (8, 2)]);
            (d, r.random_range(1..=cap), Degree(d2))
        }
        3 => {
            let (d, d2) = pick(r, &[(3, 5), (6, 4), (5, 3), (4, 6)]);
            (d, r.random_range(1..=cap), Degree(d2))
        }
        4 => {
            let l = r.random_range(1..cap.max(2));
            (r.random_range(2..=5), l, Leaves(r.random_range(l + 1..=cap.max(l + 1))))
        }
        5 => {
            let d = r.random_range(2..=4usize);
            let max_k = (cap as f64).log(d as f64).floor().max(1.0) as u32;
            let k = r.random_range(1..=max_k);
            let l2 = r.random_range(1..=(cap / d.pow(k)).max(1));
            (d, l2 * d.pow(k), Leaves(l2))
        }
        6 => {
            let (d, k) = pick(r, &[(2, 3), (2, 5), (3, 2), (3, 4), (4, 2), (4, 3), (5, 2)]);
            let l2 = r.random_range(1..=(cap / k).max(1));
            (d, l2 * k, Leaves(l2))
        }
        _ => {
            let l = r.random_range(3..=cap.max(3));
            let l2 = loop {
                let c = r.random_range(1..l);
                if l % c != 0 {
                    break c;
                }
            };
            (r.random_range(2..=5), l, Leaves(l2))
        }
    };
    let need = match target {
        Leaves(l2) => l.max(l2),
        Degree(_) => l,
    };
    let n = if aligned && variant == Variant::C && matches!(case, 5 | 6) {
        let per = r.random_range(1..=(sizes.max_objects / l).max(1));
        l * per
    } else {
        r.random_range(need.max(2)..=sizes.max_objects.max(need.max(2)))
    };
    let coarse = r.random_bool(0.3);
    let mut ds = random_dataset(r, n, coarse);
    if ds.len() < need {
        ds = random_dataset(r, n, false);
    }
    (ds, hetree::TreeParams::new(variant, l, d), target)
}

/// Adapts a random tree and checks it against a fresh build; with `table2`, also the report's
/// work cells. Returns the report.
pub fn ada_instance(seed: u64, case: usize, variant: Variant, sizes: AdaSizes, table2: bool) -> Result<AdaptationReport, String> {
    let mut r = rng(seed);
    let (ds, params, target) = ada_setup(&mut r, case, variant, sizes, table2);
    let (mut tree, _) = hetree::build_tree(ds.clone(), params).map_err(|e| e.to_string())?;
    let old_internals = tree.internal_count();
    let (_, report) = hetree::adapt(&mut tree, None, target).map_err(|e| format!("{params:?} {target:?}: {e}"))?;
    if ADA_CASES[case] != case_name(report.case) {
        return Err(format!("{params:?} {target:?} classified as {:?}", report.case));
    }
    let fresh_params = hetree::TreeParams::new(variant, report.leaves, report.degree);
    if *tree.params() != fresh_params {
        return Err(format!("params {:?} after adapting to {fresh_params:?}", tree.params()));
    }
    tree.check_invariants().map_err(|e| format!("{params:?} {target:?}: {e}"))?;
    let (fresh, _) = hetree::build_tree(ds, fresh_params).map_err(|e| e.to_string())?;
    hetree::tree::compare_trees(&tree, &fresh, 1e-9).map_err(|e| format!("{params:?} {target:?} {:?}: {e}", report.case))?;
    if table2 && report.route == hetree::ada::Route::Direct {
        check_table2(&report, old_internals, tree.internal_count()).map_err(|e| format!("{params:?} {target:?}: {e}"))?;
    }
    Ok(report)
}

pub fn case_name(case: AdaptationCase) -> String {
    serde_json::to_value(case).unwrap()["kind"].as_str().unwrap().to_owned()
}
