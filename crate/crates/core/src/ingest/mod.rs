//! Parsers from N-Triples and CSV into a [`Dataset`](crate::data::Dataset).

mod csv;
pub mod literal;
mod ntriples;

pub use self::csv::{parse_csv, to_csv};
pub use self::ntriples::parse_ntriples;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Ntriples,
    Csv,
}

impl std::str::FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "nt" | "ntriples" | "n-triples" => Ok(Self::Ntriples),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown format {other:?} (expected nt or csv)")),
        }
    }
}

/// Dispatches on format. For CSV the predicate names the value column and the subject column is `subject`.
pub fn parse(bytes: &[u8], format: InputFormat, predicate: Option<&str>) -> Result<Dataset> {
    match format {
        InputFormat::Ntriples => parse_ntriples(bytes, predicate),
        InputFormat::Csv => {
            let value_column = match predicate {
                Some(p) => p.to_owned(),
                None => first_non_subject_column(bytes)?,
            };
            parse_csv(bytes, "subject", &value_column)
        }
    }
}

fn first_non_subject_column(bytes: &[u8]) -> Result<String> {
    let mut reader = ::csv::Reader::from_reader(bytes);
    let headers = reader.headers().map_err(|e| crate::Error::Input(e.to_string()))?;
    headers
        .iter()
        .find(|h| h.trim() != "subject")
        .map(|h| h.trim().to_owned())
        .ok_or_else(|| crate::Error::Input("CSV has no value column".into()))
}
