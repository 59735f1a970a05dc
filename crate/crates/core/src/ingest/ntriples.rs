use std::collections::HashMap;
use std::sync::Arc;

use oxrdf::{NamedOrBlankNode, Term};
use oxttl::NTriplesParser;

use super::literal::{datatype_kind, parse_typed};
use crate::data::{DataObject, Dataset, ValueKind};
use crate::error::{Error, Result};

struct Candidate {
    subject: String,
    predicate: String,
    kind: ValueKind,
    lexical: String,
}

/// Parses line-oriented N-Triples into an unsorted dataset for one predicate.
///
/// Without a filter the most frequent eligible predicate wins (ties by IRI).
/// Malformed lines and unparseable literals are skipped and counted.
pub fn parse_ntriples(bytes: &[u8], predicate_filter: Option<&str>) -> Result<Dataset> {
    let filter = predicate_filter.map(|p| p.trim().trim_start_matches('<').trim_end_matches('>'));
    let mut skipped = 0usize;
    let mut candidates = Vec::new();
    for line in bytes.split(|&b| b == b'\n') {
        let trimmed = line.trim_ascii();
        if trimmed.is_empty() || trimmed.starts_with(b"#") {
            continue;
        }
        let mut parsed = NTriplesParser::new().for_slice(trimmed);
        let triple = match (parsed.next(), parsed.next()) {
            (Some(Ok(t)), None) => t,
            _ => {
                skipped += 1;
                continue;
            }
        };
        let predicate = triple.predicate.as_str();
        if filter.is_some_and(|f| f != predicate) {
            continue;
        }
        let Term::Literal(literal) = &triple.object else {
            continue;
        };
        let Some(kind) = datatype_kind(literal.datatype().as_str()) else {
            continue;
        };
        let subject = match &triple.subject {
            NamedOrBlankNode::NamedNode(n) => n.as_str().to_owned(),
            NamedOrBlankNode::BlankNode(b) => format!("_:{}", b.as_str()),
        };
        candidates.push(Candidate {
            subject,
            predicate: predicate.to_owned(),
            kind,
            lexical: literal.value().to_owned(),
        });
    }

    let chosen = match filter {
        Some(f) => f.to_owned(),
        None => most_frequent(&candidates)
            .ok_or_else(|| Error::EmptyDataset("no eligible numeric or temporal triples".into()))?,
    };
    let mut kind = None;
    let predicate: Arc<str> = chosen.as_str().into();
    let mut objects = Vec::new();
    for c in candidates.iter().filter(|c| c.predicate == chosen) {
        match kind {
            None => kind = Some(c.kind),
            Some(k) if k != c.kind => return Err(Error::MixedKinds { predicate: chosen }),
            _ => {}
        }
        match parse_typed(c.kind, &c.lexical) {
            Some(v) => objects.push(DataObject {
                subject: c.subject.as_str().into(),
                predicate: predicate.clone(),
                value: v,
            }),
            None => skipped += 1,
        }
    }
    if objects.is_empty() {
        return Err(Error::EmptyDataset(format!("no eligible values for predicate {chosen}")));
    }
    Ok(Dataset::new(predicate, kind.unwrap_or(ValueKind::Numeric), objects).with_skipped(skipped))
}

fn most_frequent(candidates: &[Candidate]) -> Option<String> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for c in candidates {
        *counts.entry(&c.predicate).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(p, _)| p.to_owned())
}
