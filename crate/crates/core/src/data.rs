//! Flat data model: objects, scalar values and datasets.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Numeric,
    /// Milliseconds since the Unix epoch, UTC.
    Temporal,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Numeric => "numeric",
            ValueKind::Temporal => "temporal",
        })
    }
}

/// A value tagged with its kind. Datasets store bare magnitudes and one kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarValue {
    pub kind: ValueKind,
    pub magnitude: f64,
}

impl ScalarValue {
    pub fn numeric(magnitude: f64) -> Self {
        Self { kind: ValueKind::Numeric, magnitude }
    }

    pub fn temporal(epoch_ms: f64) -> Self {
        Self { kind: ValueKind::Temporal, magnitude: epoch_ms }
    }
}

impl fmt::Display for ScalarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ValueKind::Numeric => write!(f, "{}", self.magnitude),
            ValueKind::Temporal => f.write_str(&format_temporal(self.magnitude)),
        }
    }
}

/// Canonical text for an epoch-ms value: `%Y-%m-%dT%H:%M:%S%.3fZ`.
pub fn format_temporal(epoch_ms: f64) -> String {
    match DateTime::from_timestamp_millis(epoch_ms as i64) {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => format!("{epoch_ms}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataObject {
    pub subject: Arc<str>,
    pub predicate: Arc<str>,
    /// Always finite.
    pub value: f64,
}

impl DataObject {
    pub fn new(subject: impl Into<Arc<str>>, predicate: impl Into<Arc<str>>, value: f64) -> Self {
        Self { subject: subject.into(), predicate: predicate.into(), value }
    }
}

/// Total order used for the sorted set: value, then subject.
/// Maps a finite float to an integer with the same ordering as `total_cmp`.
fn order_key(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

pub fn object_order(a: &DataObject, b: &DataObject) -> Ordering {
    a.value.total_cmp(&b.value).then_with(|| a.subject.cmp(&b.subject))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    objects: Vec<DataObject>,
    kind: ValueKind,
    predicate: Arc<str>,
    sorted: bool,
    minv: Option<f64>,
    maxv: Option<f64>,
    skipped: usize,
}

impl Dataset {
    /// Builds an unsorted dataset. Non-finite values are dropped and counted as skipped.
    pub fn new(predicate: impl Into<Arc<str>>, kind: ValueKind, objects: Vec<DataObject>) -> Self {
        let total = objects.len();
        let objects: Vec<DataObject> = objects.into_iter().filter(|o| o.value.is_finite()).collect();
        let skipped = total - objects.len();
        let (minv, maxv) = extremes(&objects);
        Self { objects, kind, predicate: predicate.into(), sorted: false, minv, maxv, skipped }
    }

    /// Convenience constructor for numeric `(subject, value)` pairs.
    pub fn from_values<S: AsRef<str>>(predicate: &str, pairs: impl IntoIterator<Item = (S, f64)>) -> Self {
        let predicate: Arc<str> = predicate.into();
        let objects = pairs
            .into_iter()
            .map(|(s, v)| DataObject { subject: s.as_ref().into(), predicate: predicate.clone(), value: v })
            .collect();
        Self::new(predicate, ValueKind::Numeric, objects)
    }

    pub fn with_skipped(mut self, skipped: usize) -> Self {
        self.skipped += skipped;
        self
    }

    pub fn objects(&self) -> &[DataObject] {
        &self.objects
    }

    pub fn get(&self, index: u32) -> &DataObject {
        &self.objects[index as usize]
    }

    pub fn value(&self, index: u32) -> f64 {
        self.objects[index as usize].value
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn minv(&self) -> Option<f64> {
        self.minv
    }

    pub fn maxv(&self) -> Option<f64> {
        self.maxv
    }

    /// Lines, rows or values dropped while parsing.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Position of the first object with this subject in the current order.
    pub fn position_of_subject(&self, subject: &str) -> Option<u32> {
        self.objects.iter().position(|o| &*o.subject == subject).map(|i| i as u32)
    }

    /// Checks the sorted-set ordering without trusting the flag.
    pub fn verify_sorted(&self) -> bool {
        self.objects.windows(2).all(|w| object_order(&w[0], &w[1]) != Ordering::Greater)
    }
}

fn extremes(objects: &[DataObject]) -> (Option<f64>, Option<f64>) {
    objects.iter().fold((None, None), |(lo, hi), o| {
        (
            Some(lo.map_or(o.value, |l: f64| l.min(o.value))),
            Some(hi.map_or(o.value, |h: f64| h.max(o.value))),
        )
    })
}

/// Returns the sorted set S: ascending value, ties by subject. Stable and idempotent.
pub fn sort_dataset(mut dataset: Dataset) -> Dataset {
    if !dataset.sorted {
        // Sort compact (key, index) pairs, then move each object once. The key orders like
        // `total_cmp`; equal keys fall back to the subject.
        let objects = std::mem::take(&mut dataset.objects);
        let mut keys: Vec<(u64, u32)> = objects.iter().enumerate().map(|(i, o)| (order_key(o.value), i as u32)).collect();
        keys.sort_unstable_by(|a, b| a.0.cmp(&b.0).then_with(|| objects[a.1 as usize].subject.cmp(&objects[b.1 as usize].subject)));
        let mut slots: Vec<Option<DataObject>> = objects.into_iter().map(Some).collect();
        dataset.objects = keys.iter().map(|&(_, i)| slots[i as usize].take().expect("each index once")).collect();
        dataset.sorted = true;
    }
    dataset
}

/// Shared handle used by trees and sessions.
pub type SharedDataset = Arc<Dataset>;
