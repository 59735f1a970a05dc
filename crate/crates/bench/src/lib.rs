//! Seeded synthetic datasets and the construction / first-response benchmark harness.
//!
//! Counts in every report are deterministic for a fixed seed; only timings vary.

mod generate;
mod harness;

pub use generate::{generate, Distribution};
pub use harness::{ada_reports, leaves_for_degree, run, AdaRow, BenchRow, HarnessConfig};
