use std::time::{Duration, Instant};

use hetree::params::leaf_bounds;
use hetree::{
    adapt, build_tree, estimate_params, sort_dataset, AdaptTarget, AdaptationReport, Dataset, EstimateOptions, ExplorationSession,
    Result, StartRequest, TreeParams, Variant, VisBounds,
};
use serde::{Deserialize, Serialize};

use crate::generate::{generate, Distribution};

/// Total timed work per size before small sizes stop repeating.
pub const MIN_SAMPLE_TIME: Duration = Duration::from_millis(200);
const MAX_SAMPLES: usize = 2_000;

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub sizes: Vec<usize>,
    pub dist: Distribution,
    pub variant: Variant,
    /// Minimum timed runs per size; the median is reported. Small sizes repeat further until
    /// [`MIN_SAMPLE_TIME`] has elapsed so that timer and scheduler noise averages out.
    pub repeat: usize,
    pub seed: u64,
    pub bounds: VisBounds,
    /// Fixes d and picks ℓ as a power of d inside the leaf bounds; otherwise both are estimated.
    pub degree: Option<usize>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            sizes: vec![1_000, 10_000, 100_000],
            dist: Distribution::Uniform,
            variant: Variant::C,
            repeat: 5,
            seed: 42,
            bounds: VisBounds::default(),
            degree: None,
        }
    }
}

/// One line of the benchmark CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    /// Median wall time to sort and fully build the tree.
    pub construction_ms: f64,
    /// Nodes a full build creates before anything can be shown.
    pub first_response_nodes_full: u64,
    /// Nodes incremental construction creates for the basic scenario's first view.
    pub first_response_nodes_ico: u64,
    pub ico_init_bsc: u64,
    pub ico_init_res: u64,
    pub ico_init_ran: u64,
    pub leaves: usize,
    pub degree: usize,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "size,construction_ms,first_response_nodes_full,first_response_nodes_ico,ico_init_bsc,ico_init_res,ico_init_ran,leaves,degree";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.3},{},{},{},{},{},{},{}",
            self.size,
            self.construction_ms,
            self.first_response_nodes_full,
            self.first_response_nodes_ico,
            self.ico_init_bsc,
            self.ico_init_res,
            self.ico_init_ran,
            self.leaves,
            self.degree
        )
    }
}

/// The power of `degree` (at least `degree`) nearest the centre of the leaf bounds for `n`.
pub fn leaves_for_degree(n: usize, bounds: VisBounds, degree: usize) -> usize {
    let (lmin, lmax) = leaf_bounds(n, bounds);
    let centre = (lmin + lmax) as f64 / 2.0;
    let mut best = degree;
    let mut p = degree;
    while p <= lmax.max(degree) {
        if (p as f64 - centre).abs() < (best as f64 - centre).abs() {
            best = p;
        }
        match p.checked_mul(degree) {
            Some(next) => p = next,
            None => break,
        }
    }
    best.min(n)
}

fn params_for(n: usize, config: &HarnessConfig) -> Result<TreeParams> {
    match config.degree {
        Some(d) => Ok(TreeParams::new(config.variant, leaves_for_degree(n, config.bounds, d), d)),
        None => estimate_params(n, config.bounds, config.variant, EstimateOptions::default()),
    }
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

fn init_count(raw: &Dataset, params: TreeParams, req: &StartRequest) -> Result<u64> {
    let shared = std::sync::Arc::new(raw.clone());
    Ok(ExplorationSession::incremental(shared, params, req)?.counters().nodes_built)
}

/// Runs every size in turn. Timed runs are sequential.
pub fn run(config: &HarnessConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &size in &config.sizes {
        let raw = generate(config.dist, size, config.seed);
        let params = params_for(raw.len(), config)?;
        let mut times = Vec::new();
        let mut full_nodes = 0;
        let started = Instant::now();
        while times.len() < config.repeat.max(1) || (started.elapsed() < MIN_SAMPLE_TIME && times.len() < MAX_SAMPLES) {
            let input = raw.clone();
            let t0 = Instant::now();
            let (tree, counters) = build_tree(sort_dataset(input), params)?;
            times.push(t0.elapsed());
            full_nodes = counters.nodes_built;
            drop(tree);
        }
        let (lo, hi) = (raw.minv().unwrap_or(0.0), raw.maxv().unwrap_or(0.0));
        let res = StartRequest::Res { resource: raw.get(raw.len() as u32 / 2).subject.to_string() };
        let ran = StartRequest::Ran { lower: lo + 0.4 * (hi - lo), upper: lo + 0.6 * (hi - lo) };
        let bsc = init_count(&raw, params, &StartRequest::Bsc)?;
        rows.push(BenchRow {
            size,
            construction_ms: median(times).as_secs_f64() * 1e3,
            first_response_nodes_full: full_nodes,
            first_response_nodes_ico: bsc,
            ico_init_bsc: bsc,
            ico_init_res: init_count(&raw, params, &res)?,
            ico_init_ran: init_count(&raw, params, &ran)?,
            leaves: params.leaves,
            degree: params.degree,
        });
    }
    Ok(rows)
}

/// One adaptation measured on a fresh tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaRow {
    pub size: usize,
    pub from_leaves: usize,
    pub from_degree: usize,
    pub adapt_ms: f64,
    /// Time for a from-scratch build at the new parameters, for comparison.
    pub rebuild_ms: f64,
    pub report: AdaptationReport,
}

impl AdaRow {
    pub fn csv_header() -> String {
        format!("size,from_leaves,from_degree,adapt_ms,rebuild_ms,{}", AdaptationReport::CSV_HEADER)
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{:.3},{:.3},{}", self.size, self.from_leaves, self.from_degree, self.adapt_ms, self.rebuild_ms, self.report.csv_row())
    }
}

/// One representative adaptation per case over `size` generated objects.
pub fn ada_reports(size: usize, dist: Distribution, variant: Variant, seed: u64) -> Result<Vec<AdaRow>> {
    let sorted = std::sync::Arc::new(sort_dataset(generate(dist, size, seed)));
    let plan: [((usize, usize), AdaptTarget); 8] = [
        ((81, 3), AdaptTarget::Degree(9)),
        ((81, 3), AdaptTarget::Degree(6)),
        ((81, 9), AdaptTarget::Degree(3)),
        ((81, 3), AdaptTarget::Degree(5)),
        ((81, 3), AdaptTarget::Leaves(100)),
        ((81, 3), AdaptTarget::Leaves(27)),
        ((80, 3), AdaptTarget::Leaves(40)),
        ((81, 3), AdaptTarget::Leaves(50)),
    ];
    let mut rows = Vec::new();
    for ((leaves, degree), target) in plan {
        let (mut tree, _) = build_tree(sorted.clone(), TreeParams::new(variant, leaves, degree))?;
        let t0 = Instant::now();
        let (_, report) = adapt(&mut tree, None, target)?;
        let adapt_ms = t0.elapsed().as_secs_f64() * 1e3;
        let t1 = Instant::now();
        build_tree(sorted.clone(), *tree.params())?;
        let rebuild_ms = t1.elapsed().as_secs_f64() * 1e3;
        rows.push(AdaRow { size, from_leaves: leaves, from_degree: degree, adapt_ms, rebuild_ms, report });
    }
    Ok(rows)
}
