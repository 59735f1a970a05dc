//! Choosing (ℓ, d) from dataset size and per-leaf visualization bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{TreeParams, Variant};

/// Minimum and maximum objects a leaf may show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisBounds {
    pub lambda_min: usize,
    pub lambda_max: usize,
}

impl VisBounds {
    pub fn new(lambda_min: usize, lambda_max: usize) -> Result<Self> {
        if lambda_min == 0 || lambda_min > lambda_max {
            return Err(Error::InvalidParams(format!("bad bounds ({lambda_min}, {lambda_max})")));
        }
        Ok(Self { lambda_min, lambda_max })
    }
}

impl Default for VisBounds {
    fn default() -> Self {
        Self { lambda_min: 10, lambda_max: 50 }
    }
}

/// A perfect tree with ℓ = dʰ leaves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateSetting {
    pub leaves: usize,
    pub degree: usize,
    pub height: u32,
    pub centre_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeightPreference {
    #[default]
    Highest,
    Shortest,
    /// Skip the height rule; rank by centre distance, then degree.
    Unranked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub d_max: usize,
    pub prefer: HeightPreference,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { d_max: 6, prefer: HeightPreference::Highest }
    }
}

/// `(⌈n/λmax⌉, ⌈n/λmin⌉)`.
pub fn leaf_bounds(n: usize, b: VisBounds) -> (usize, usize) {
    (n.div_ceil(b.lambda_max), n.div_ceil(b.lambda_min))
}

fn centre_distance(leaves: usize, lmin: usize, lmax: usize) -> f64 {
    (leaves as f64 - (lmin + lmax) as f64 / 2.0).abs()
}

/// All perfect trees with `3 <= d <= d_max`, `h >= 2` and `lmin <= dʰ <= lmax`.
pub fn enumerate_candidates(lmin: usize, lmax: usize, d_max: usize) -> Vec<CandidateSetting> {
    let mut out = Vec::new();
    for degree in 3..=d_max {
        let mut height = 2u32;
        while let Some(leaves) = degree.checked_pow(height).filter(|&l| l <= lmax) {
            if leaves >= lmin {
                out.push(CandidateSetting { leaves, degree, height, centre_distance: centre_distance(leaves, lmin, lmax) });
            }
            height += 1;
        }
    }
    out
}

/// Preferred height first, then smallest centre distance, then smallest degree.
pub fn select_setting(candidates: &[CandidateSetting], prefer: HeightPreference) -> Result<CandidateSetting> {
    candidates
        .iter()
        .copied()
        .min_by(|a, b| {
            let by_height = match prefer {
                HeightPreference::Highest => b.height.cmp(&a.height),
                HeightPreference::Shortest => a.height.cmp(&b.height),
                HeightPreference::Unranked => std::cmp::Ordering::Equal,
            };
            by_height
                .then(a.centre_distance.total_cmp(&b.centre_distance))
                .then(a.degree.cmp(&b.degree))
        })
        .ok_or(Error::NoCandidate)
}

/// Full estimate. Both variants use the same ℓ/d selection.
///
/// Without a perfect candidate: d = 3 and ℓ = the in-range power of 3 nearest the centre
/// (ties to the smaller), else ℓ = ℓmin.
pub fn estimate_params(n: usize, b: VisBounds, variant: Variant, opts: EstimateOptions) -> Result<TreeParams> {
    if n == 0 {
        return Err(Error::EmptyDataset("cannot estimate parameters for no objects".into()));
    }
    if opts.d_max < 3 {
        return Err(Error::InvalidParams("d_max must be at least 3".into()));
    }
    let (lmin, lmax) = leaf_bounds(n, b);
    let candidates = enumerate_candidates(lmin, lmax, opts.d_max);
    if let Ok(best) = select_setting(&candidates, opts.prefer) {
        return Ok(TreeParams::new(variant, best.leaves, best.degree));
    }
    let leaves = std::iter::successors(Some(1usize), |p| p.checked_mul(3))
        .take_while(|&p| p <= lmax)
        .filter(|&p| p >= lmin)
        .min_by(|&a, &b| centre_distance(a, lmin, lmax).total_cmp(&centre_distance(b, lmin, lmax)).then(a.cmp(&b)))
        .unwrap_or(lmin);
    Ok(TreeParams::new(variant, leaves, 3))
}
