use std::sync::Arc;

use super::literal::{parse_typed, parse_untyped};
use crate::data::{format_temporal, DataObject, Dataset, ValueKind};
use crate::error::{Error, Result};

/// Parses CSV with a header row, selecting columns by header name.
///
/// The first parseable value fixes the kind; later cells of the other kind are a mixed-kind error.
pub fn parse_csv(bytes: &[u8], subject_column: &str, value_column: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(bytes);
    let headers = reader.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Input(format!("column {name:?} not found in header")))
    };
    let (si, vi) = (column(subject_column)?, column(value_column)?);
    let predicate: Arc<str> = headers[vi].trim().into();

    let mut kind: Option<ValueKind> = None;
    let mut skipped = 0usize;
    let mut objects = Vec::new();
    for record in reader.records() {
        let Ok(record) = record else {
            skipped += 1;
            continue;
        };
        let (Some(subject), Some(cell)) = (record.get(si), record.get(vi)) else {
            skipped += 1;
            continue;
        };
        let parsed = match kind {
            Some(k) => match parse_typed(k, cell) {
                Some(v) => Some(v),
                None if parse_untyped(cell).is_some() => {
                    return Err(Error::MixedKinds { predicate: predicate.to_string() })
                }
                None => None,
            },
            None => parse_untyped(cell).map(|(k, v)| {
                kind = Some(k);
                v
            }),
        };
        match parsed {
            Some(value) => objects.push(DataObject { subject: subject.into(), predicate: predicate.clone(), value }),
            None => skipped += 1,
        }
    }
    if objects.is_empty() {
        return Err(Error::EmptyDataset("no parseable rows".into()));
    }
    Ok(Dataset::new(predicate, kind.unwrap_or(ValueKind::Numeric), objects).with_skipped(skipped))
}

/// Canonical CSV: header `subject,<predicate>`, shortest round-trip numbers, ISO-8601 ms timestamps.
pub fn to_csv(dataset: &Dataset) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, a: &str, b: &str| w.write_record([a, b]).expect("in-memory write");
    write(&mut writer, "subject", dataset.predicate());
    for o in dataset.objects() {
        let value = match dataset.kind() {
            ValueKind::Numeric => o.value.to_string(),
            ValueKind::Temporal => format_temporal(o.value),
        };
        write(&mut writer, &o.subject, &value);
    }
    writer.into_inner().expect("in-memory flush")
}
