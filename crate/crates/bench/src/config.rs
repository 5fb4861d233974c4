use std::path::PathBuf;
use std::str::FromStr;

use maxprod_core::argmax::SearchMode;

use crate::error::{config, BenchError, Result};

/// List sizes: `64`, `64,100,512`, or `64..8192` for every power of two in between.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sizes(pub Vec<usize>);

impl FromStr for Sizes {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim().parse::<usize>().map_err(|_| BenchError::Config(format!("`{t}` is not a size")))
        };
        let sizes = if let Some((lo, hi)) = s.split_once("..") {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo == 0 || hi < lo {
                return config(format!("empty size range {s}"));
            }
            std::iter::successors(Some(lo), |&n| n.checked_mul(2)).take_while(|&n| n <= hi).collect()
        } else {
            s.split(',').map(parse).collect::<Result<Vec<_>>>()?
        };
        if sizes.is_empty() || sizes.contains(&0) {
            return config("sizes must be positive");
        }
        Ok(Self(sizes))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub experiment: String,
    pub sizes: Vec<usize>,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub corr: f64,
    pub mode: SearchMode,
    pub out: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            experiment: "bench-argmax".into(),
            sizes: vec![64],
            k: 2,
            trials: 1000,
            seed: 0,
            corr: 0.0,
            mode: SearchMode::Analysis,
            out: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return config("trials must be at least 1");
        }
        if self.k < 2 {
            return config("k must be at least 2");
        }
        if !(-1.0..=1.0).contains(&self.corr) {
            return config(format!("correlation {} outside [-1, 1]", self.corr));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return config("sizes must be positive");
        }
        Ok(())
    }
}
