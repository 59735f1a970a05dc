use std::fmt;

use serde::{Deserialize, Serialize};

/// `[lower, upper]` when `upper_closed`, else `[lower, upper)`. Lower bounds are always closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub upper_closed: bool,
}

impl Interval {
    pub fn closed(lower: f64, upper: f64) -> Self {
        Self { lower, upper, upper_closed: true }
    }

    pub fn half_open(lower: f64, upper: f64) -> Self {
        Self { lower, upper, upper_closed: false }
    }

    pub fn point(v: f64) -> Self {
        Self::closed(v, v)
    }

    pub fn length(&self) -> f64 {
        (self.upper - self.lower).abs()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && (v < self.upper || (self.upper_closed && v <= self.upper))
    }

    /// Every point of `other` lies in `self`.
    pub fn covers(&self, other: &Interval) -> bool {
        let upper_ok = other.upper < self.upper
            || (other.upper == self.upper && (self.upper_closed || !other.upper_closed));
        self.lower <= other.lower && upper_ok
    }

    /// Spans from `first.lower` to `last.upper`, taking the closedness of `last`.
    pub fn hull(first: &Interval, last: &Interval) -> Interval {
        Interval { lower: first.lower, upper: last.upper, upper_closed: last.upper_closed }
    }

    pub fn approx_eq(&self, other: &Interval, rel: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0);
        close(self.lower, other.lower) && close(self.upper, other.upper) && self.upper_closed == other.upper_closed
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let close = if self.upper_closed { ']' } else { ')' };
        write!(f, "[{}, {}{close}", self.lower, self.upper)
    }
}
