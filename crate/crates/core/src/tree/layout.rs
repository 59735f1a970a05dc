//! Positional arithmetic shared by full construction, incremental construction and adaptation.
//!
//! A node is addressed by its slot `(height, pos)`: node `(h, i)` covers leaves
//! `[i·dʰ, min((i+1)·dʰ, ℓ))`, which is exactly what bottom-up grouping of d consecutive nodes yields.

use std::ops::Range;

use crate::interval::Interval;

/// Leaf sizes of the content variant: the first `long` leaves hold λ objects, the rest λ−1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContentLayout {
    pub n: usize,
    pub leaves: usize,
    pub lambda: usize,
    pub long: usize,
}

impl ContentLayout {
    /// Requires `n >= leaves >= 1`.
    pub fn new(n: usize, leaves: usize) -> Self {
        debug_assert!(leaves >= 1 && n >= leaves);
        let lambda = n.div_ceil(leaves);
        let long = leaves - (lambda * leaves - n);
        Self { n, leaves, lambda, long }
    }

    /// First sorted position of leaf `j`; `leaf_start(leaves) == n`.
    pub fn leaf_start(&self, j: usize) -> usize {
        j * self.lambda - j.saturating_sub(self.long)
    }

    pub fn leaf_range(&self, j: usize) -> Range<usize> {
        self.leaf_start(j)..self.leaf_start(j + 1)
    }

    /// Positions covered by leaves `[first, end)`.
    pub fn span(&self, leaves: Range<usize>) -> Range<usize> {
        self.leaf_start(leaves.start)..self.leaf_start(leaves.end)
    }

    pub fn leaf_of(&self, pos: usize) -> usize {
        let boundary = self.long * self.lambda;
        if pos < boundary {
            pos / self.lambda
        } else {
            self.long + (pos - boundary) / (self.lambda - 1)
        }
    }
}

/// Equal-width tiling of `[lower, upper]` into `leaves` intervals; only the last may be closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeFrame {
    pub lower: f64,
    pub upper: f64,
    pub leaves: usize,
    /// Closedness of the last leaf. Whole-data frames are closed; a subtree frame inherits its root's.
    pub upper_closed: bool,
}

impl RangeFrame {
    pub fn new(lower: f64, upper: f64, leaves: usize) -> Self {
        debug_assert!(lower < upper && leaves >= 1);
        Self { lower, upper, leaves, upper_closed: true }
    }

    /// Frame tiling an existing interval.
    pub fn over(interval: &crate::interval::Interval, leaves: usize) -> Self {
        Self { upper_closed: interval.upper_closed, ..Self::new(interval.lower, interval.upper, leaves) }
    }

    pub fn with_leaves(&self, leaves: usize) -> Self {
        Self { leaves, ..*self }
    }

    /// Leaf interval length ρ.
    pub fn rho(&self) -> f64 {
        (self.upper - self.lower) / self.leaves as f64
    }

    /// Lower bound of leaf `j`. Computed as `lower + (W·j)/ℓ` so coarser frames over the
    /// same range produce bit-identical shared boundaries.
    pub fn boundary(&self, j: usize) -> f64 {
        if j == 0 {
            self.lower
        } else if j >= self.leaves {
            self.upper
        } else {
            self.lower + ((self.upper - self.lower) * j as f64) / self.leaves as f64
        }
    }

    /// Leaf holding `v`: the floor formula clamped to `[0, ℓ)`, then snapped to the boundaries.
    pub fn leaf_of(&self, v: f64) -> usize {
        let last = self.leaves - 1;
        let guess = ((v - self.lower) / self.rho()).floor();
        let mut j = if guess.is_nan() || guess < 0.0 { 0 } else { (guess as usize).min(last) };
        while j > 0 && v < self.boundary(j) {
            j -= 1;
        }
        while j < last && v >= self.boundary(j + 1) {
            j += 1;
        }
        j
    }

    /// Interval of leaves `[first, end)`.
    pub fn span(&self, leaves: Range<usize>) -> Interval {
        Interval {
            lower: self.boundary(leaves.start),
            upper: self.boundary(leaves.end),
            upper_closed: leaves.end >= self.leaves && self.upper_closed,
        }
    }
}

/// Bottom-up grouping of ℓ leaves by degree d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grouping {
    pub leaves: usize,
    pub degree: usize,
}

impl Grouping {
    pub fn new(leaves: usize, degree: usize) -> Self {
        debug_assert!(leaves >= 1 && degree >= 2);
        Self { leaves, degree }
    }

    /// Leaves under one node of height `h`, saturating.
    pub fn span_width(&self, h: u32) -> usize {
        self.degree.checked_pow(h).unwrap_or(usize::MAX)
    }

    /// Root height: the smallest `h >= 1` with a single node.
    pub fn height(&self) -> u32 {
        let mut h = 1;
        while self.count(h) > 1 {
            h += 1;
        }
        h
    }

    /// Number of nodes at height `h`.
    pub fn count(&self, h: u32) -> usize {
        self.leaves.div_ceil(self.span_width(h))
    }

    pub fn leaf_span(&self, h: u32, pos: usize) -> Range<usize> {
        let w = self.span_width(h);
        let start = pos.saturating_mul(w).min(self.leaves);
        start..pos.saturating_add(1).saturating_mul(w).min(self.leaves)
    }

    /// Positions at `h − 1` of the children of `(h, pos)`.
    pub fn children(&self, h: u32, pos: usize) -> Range<usize> {
        let count = self.count(h - 1);
        (pos * self.degree).min(count)..(pos * self.degree + self.degree).min(count)
    }

    /// Positions at `h` of the sibling group that contains `(h, pos)`.
    pub fn sibling_block(&self, h: u32, pos: usize) -> Range<usize> {
        if h >= self.height() {
            return 0..1;
        }
        self.children(h + 1, pos / self.degree)
    }

    /// Slot at height `h` above leaf `leaf`.
    pub fn ancestor_of_leaf(&self, h: u32, leaf: usize) -> usize {
        leaf / self.span_width(h)
    }
}
