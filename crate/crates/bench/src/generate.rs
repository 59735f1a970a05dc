use std::str::FromStr;

use hetree::Dataset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Uniform, Zipf};
use serde::{Deserialize, Serialize};

pub const PREDICATE: &str = "http://example.org/bench#value";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Uniform over [0, 10⁶].
    Uniform,
    /// Normal with μ = 5·10⁵, σ = 10⁵.
    Normal,
    /// Zipf ranks with exponent 1.1 over 10⁴ distinct values, scaled by 100.
    Zipf,
}

impl FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "normal" => Ok(Self::Normal),
            "zipf" => Ok(Self::Zipf),
            other => Err(format!("unknown distribution {other:?} (uniform, normal or zipf)")),
        }
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Normal => "normal",
            Self::Zipf => "zipf",
        })
    }
}

/// `n` objects in generation order (unsorted), identical for equal `(dist, n, seed)`.
pub fn generate(dist: Distribution, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = match dist {
        Distribution::Uniform => {
            let u = Uniform::new_inclusive(0.0, 1e6).expect("valid bounds");
            (0..n).map(|_| u.sample(&mut rng)).collect()
        }
        Distribution::Normal => {
            let d = Normal::new(5e5, 1e5).expect("valid parameters");
            (0..n).map(|_| d.sample(&mut rng)).collect()
        }
        Distribution::Zipf => {
            let d = Zipf::new(1e4, 1.1).expect("valid parameters");
            (0..n).map(|_| d.sample(&mut rng) * 100.0).collect()
        }
    };
    Dataset::from_values(PREDICATE, values.into_iter().enumerate().map(|(i, v)| (format!("http://example.org/bench#s{i}"), v)))
}
