//! Per-node statistics and their exact merge.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Count, mean, population variance and extremes. `count == 0` marks empty stats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStats {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl NodeStats {
    pub const EMPTY: NodeStats = NodeStats { count: 0, mean: 0.0, variance: 0.0, min: 0.0, max: 0.0 };

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// One pass (Welford) over raw values.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> NodeStats {
        let mut count = 0u64;
        let (mut mean, mut m2) = (0.0f64, 0.0f64);
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            count += 1;
            let delta = v - mean;
            mean += delta / count as f64;
            m2 += delta * (v - mean);
            min = min.min(v);
            max = max.max(v);
        }
        if count == 0 {
            return NodeStats::EMPTY;
        }
        let mean = mean.clamp(min, max);
        NodeStats { count, mean, variance: (m2 / count as f64).max(0.0), min, max }
    }

    /// Combines disjoint groups; empty inputs are ignored.
    pub fn merge<'a>(parts: impl IntoIterator<Item = &'a NodeStats>) -> NodeStats {
        let parts: Vec<&NodeStats> = parts.into_iter().filter(|s| !s.is_empty()).collect();
        match parts.as_slice() {
            [] => return NodeStats::EMPTY,
            [one] => return **one,
            _ => {}
        }
        let count: u64 = parts.iter().map(|s| s.count).sum();
        let n = count as f64;
        let mean = parts.iter().map(|s| s.count as f64 * s.mean).sum::<f64>() / n;
        let within: f64 = parts.iter().map(|s| s.count as f64 * s.variance).sum();
        let between: f64 = parts.iter().map(|s| s.count as f64 * (s.mean - mean).powi(2)).sum();
        let min = parts.iter().map(|s| s.min).fold(f64::INFINITY, f64::min);
        let max = parts.iter().map(|s| s.max).fold(f64::NEG_INFINITY, f64::max);
        NodeStats { count, mean: mean.clamp(min, max), variance: ((within + between) / n).max(0.0), min, max }
    }

    /// Relative closeness on every field, for equivalence checks.
    pub fn approx_eq(&self, other: &NodeStats, rel: f64) -> bool {
        if self.count != other.count {
            return false;
        }
        if self.is_empty() {
            return true;
        }
        let close = |a: f64, b: f64| (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0);
        close(self.mean, other.mean)
            && close(self.variance, other.variance)
            && self.min == other.min
            && self.max == other.max
    }
}

impl Default for NodeStats {
    fn default() -> Self {
        NodeStats::EMPTY
    }
}

impl Serialize for NodeStats {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_empty() {
            let mut s = serializer.serialize_struct("NodeStats", 1)?;
            s.serialize_field("count", &0u64)?;
            return s.end();
        }
        let mut s = serializer.serialize_struct("NodeStats", 5)?;
        s.serialize_field("count", &self.count)?;
        s.serialize_field("mean", &self.mean)?;
        s.serialize_field("variance", &self.variance)?;
        s.serialize_field("min", &self.min)?;
        s.serialize_field("max", &self.max)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for NodeStats {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            count: u64,
            mean: Option<f64>,
            variance: Option<f64>,
            min: Option<f64>,
            max: Option<f64>,
        }
        let r = Raw::deserialize(deserializer)?;
        if r.count == 0 {
            return Ok(NodeStats::EMPTY);
        }
        let missing = |name| serde::de::Error::missing_field(name);
        Ok(NodeStats {
            count: r.count,
            mean: r.mean.ok_or_else(|| missing("mean"))?,
            variance: r.variance.ok_or_else(|| missing("variance"))?,
            min: r.min.ok_or_else(|| missing("min"))?,
            max: r.max.ok_or_else(|| missing("max"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_values() {
        let h = NodeStats::from_values([80.0, 100.0]);
        assert_eq!((h.count, h.mean, h.variance, h.min, h.max), (2, 90.0, 100.0, 80.0, 100.0));
        let single = NodeStats::from_values([42.0]);
        assert_eq!((single.count, single.mean, single.variance), (1, 42.0, 0.0));
        let d = NodeStats::from_values([20.0, 30.0]);
        assert_eq!((d.mean, d.variance), (25.0, 25.0));
        assert!(NodeStats::from_values([]).is_empty());
    }

    #[test]
    fn merge_skips_empty_and_is_identity_on_one() {
        let g = NodeStats::from_values([50.0, 55.0]);
        assert_eq!(NodeStats::merge([&g]), g);
        assert_eq!(NodeStats::merge([&NodeStats::EMPTY, &g, &NodeStats::EMPTY]), g);
        assert!(NodeStats::merge([&NodeStats::EMPTY]).is_empty());
    }

    #[test]
    fn serde_round_trip() {
        for s in [NodeStats::EMPTY, NodeStats::from_values([1.0, 4.0])] {
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<NodeStats>(&json).unwrap(), s);
        }
        assert_eq!(serde_json::to_string(&NodeStats::EMPTY).unwrap(), r#"{"count":0}"#);
    }
}
