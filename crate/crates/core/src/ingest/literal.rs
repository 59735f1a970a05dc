//! Lexical forms of eligible literals.

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use crate::data::ValueKind;

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

const NUMERIC_TYPES: &[&str] = &[
    "integer",
    "int",
    "long",
    "short",
    "byte",
    "nonNegativeInteger",
    "positiveInteger",
    "negativeInteger",
    "nonPositiveInteger",
    "unsignedLong",
    "unsignedInt",
    "unsignedShort",
    "unsignedByte",
    "decimal",
    "double",
    "float",
];

/// Value kind for an eligible datatype IRI, `None` otherwise.
pub fn datatype_kind(datatype: &str) -> Option<ValueKind> {
    let local = datatype.strip_prefix(XSD)?;
    if NUMERIC_TYPES.contains(&local) {
        Some(ValueKind::Numeric)
    } else if local == "date" || local == "dateTime" {
        Some(ValueKind::Temporal)
    } else {
        None
    }
}

/// Finite number, or `None`. Rejects `INF`/`NaN` spellings.
pub fn parse_number(text: &str) -> Option<f64> {
    let v: f64 = text.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// ISO-8601 date or date-time to epoch milliseconds. Missing zones read as UTC.
pub fn parse_temporal(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(t) {
        return Some(dt.timestamp_millis() as f64);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(t, fmt) {
            return Some(dt.and_utc().timestamp_millis() as f64);
        }
    }
    parse_date(t)
}

fn parse_date(t: &str) -> Option<f64> {
    // xsd:date may carry a zone suffix: 2000-01-01Z or 2000-01-01+02:00.
    let (date, offset_ms) = if let Some(d) = t.strip_suffix('Z') {
        (d, 0i64)
    } else if t.len() > 10 && (t.as_bytes()[10] == b'+' || t.as_bytes()[10] == b'-') {
        let zone = &t[10..];
        let sign = if zone.starts_with('-') { -1 } else { 1 };
        let (h, m) = zone[1..].split_once(':')?;
        let minutes = h.parse::<i64>().ok()? * 60 + m.parse::<i64>().ok()?;
        (&t[..10], sign * minutes * 60_000)
    } else {
        (t, 0)
    };
    let day = NaiveDate::parse_from_str(date, "%Y-%m-%d").ok()?;
    let ms = day.and_hms_opt(0, 0, 0)?.and_utc().timestamp_millis() - offset_ms;
    Some(ms as f64)
}

/// Parses an untyped cell: a number first, then an ISO-8601 temporal value.
pub fn parse_untyped(text: &str) -> Option<(ValueKind, f64)> {
    if let Some(v) = parse_number(text) {
        return Some((ValueKind::Numeric, v));
    }
    parse_temporal(text).map(|v| (ValueKind::Temporal, v))
}

pub fn parse_typed(kind: ValueKind, text: &str) -> Option<f64> {
    match kind {
        ValueKind::Numeric => parse_number(text),
        ValueKind::Temporal => parse_temporal(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datatypes() {
        assert_eq!(datatype_kind("http://www.w3.org/2001/XMLSchema#integer"), Some(ValueKind::Numeric));
        assert_eq!(datatype_kind("http://www.w3.org/2001/XMLSchema#dateTime"), Some(ValueKind::Temporal));
        assert_eq!(datatype_kind("http://www.w3.org/2001/XMLSchema#string"), None);
    }

    #[test]
    fn numbers_reject_non_finite() {
        assert_eq!(parse_number("+5"), Some(5.0));
        assert_eq!(parse_number("1.5e3"), Some(1500.0));
        assert_eq!(parse_number("INF"), None);
        assert_eq!(parse_number("NaN"), None);
    }

    #[test]
    fn temporal_forms() {
        assert_eq!(parse_temporal("1970-01-02"), Some(86_400_000.0));
        assert_eq!(parse_temporal("1970-01-01T00:00:01Z"), Some(1000.0));
        assert_eq!(parse_temporal("1970-01-01T00:00:01.250"), Some(1250.0));
        assert_eq!(parse_temporal("1970-01-01T01:00:00+01:00"), Some(0.0));
        assert_eq!(parse_temporal("1970-01-02+01:00"), Some(86_400_000.0 - 3_600_000.0));
        assert_eq!(parse_temporal("yesterday"), None);
    }
}
