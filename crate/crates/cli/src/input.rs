use std::path::PathBuf;

use clap::Args;
use hetree::ingest::{self, InputFormat};
use hetree::Dataset;
use hetree_bench::{generate, Distribution};

use crate::Failure;

#[derive(Debug, Args)]
pub struct InputArgs {
    /// N-Triples or CSV file.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// `nt` or `csv`; guessed from the file extension when omitted.
    #[arg(long)]
    format: Option<InputFormat>,
    /// Predicate IRI (N-Triples) or value column (CSV).
    #[arg(long)]
    predicate: Option<String>,
    /// Generate this many synthetic values instead of reading a file.
    #[arg(long, value_parser = crate::parse_size)]
    synthetic: Option<usize>,
    #[arg(long, default_value = "uniform")]
    dist: Distribution,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl InputArgs {
    pub fn load(&self) -> Result<Dataset, Failure> {
        if let Some(n) = self.synthetic {
            return Ok(generate(self.dist, n, self.seed));
        }
        let path = self.input.as_ref().expect("clap requires input or synthetic");
        let bytes = std::fs::read(path).map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
        let format = self.format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Ntriples,
        });
        let dataset = ingest::parse(&bytes, format, self.predicate.as_deref()).map_err(|e| Failure::Data(e.to_string()))?;
        if dataset.skipped() > 0 {
            eprintln!("skipped {} unusable lines", dataset.skipped());
        }
        Ok(dataset)
    }
}
