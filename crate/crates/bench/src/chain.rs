//! Cost of exact inference on random chains as the state count grows.

use std::time::Instant;

use maxprod_core::argmax::SearchMode;
use maxprod_core::bp::{build_topology, run_bp, BpConfig, FactorGraph, MessageMode, Pairwise, Topology};
use maxprod_core::{Execution, Semiring};
use rand::{Rng, SeedableRng};

use crate::csvout::Record;
use crate::error::{config, Result};
use crate::lists::trial_rng;

/// Random uniform unary tables and one shared random pairwise table.
pub fn random_chain(q: usize, n: usize, seed: u64, trial: usize) -> Result<FactorGraph> {
    let mut rng = trial_rng(seed, n, trial);
    let unary: Vec<Vec<f64>> = (0..q).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
    let mut table_rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng.random());
    let pairwise: Vec<f64> = (0..n * n).map(|_| table_rng.random()).collect();
    Ok(build_topology(Topology::Chain(q), n, Semiring::MaxSum, |v| Some(unary[v].clone()), Pairwise::Shared(pairwise))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRow {
    pub n: usize,
    pub q: usize,
    pub trial: usize,
    pub mode: MessageMode,
    /// Factor cells combined while computing messages.
    pub cells: u64,
    /// Maximizations performed (one per message entry).
    pub searches: u64,
    pub sort_seconds: f64,
    pub search_seconds: f64,
}

impl ChainRow {
    pub fn cells_per_message(&self) -> f64 {
        self.cells as f64 / self.messages() as f64
    }

    pub fn messages(&self) -> u64 {
        2 * (self.q as u64 - 1)
    }
}

impl Record for ChainRow {
    const HEADER: &'static [&'static str] =
        &["n", "q", "trial", "mode", "cells", "searches", "cells_per_message", "sort_seconds", "search_seconds"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.q.to_string(),
            self.trial.to_string(),
            format!("{:?}", self.mode).to_lowercase(),
            self.cells.to_string(),
            self.searches.to_string(),
            self.cells_per_message().to_string(),
            self.sort_seconds.to_string(),
            self.search_seconds.to_string(),
        ]
    }
}

/// One forward-backward pass per chain, in each requested mode.
pub fn chain_scaling(
    sizes: &[usize],
    q: usize,
    trials: usize,
    seed: u64,
    modes: &[MessageMode],
    search: SearchMode,
    execution: Execution,
) -> Result<Vec<ChainRow>> {
    if q < 2 || trials == 0 {
        return config("chains need at least 2 nodes and 1 trial");
    }
    let mut rows = Vec::new();
    for &n in sizes {
        for trial in 0..trials {
            let g = random_chain(q, n, seed, trial)?;
            for &mode in modes {
                let mut cfg = BpConfig { mode, search, execution, ..BpConfig::default() };
                cfg.schedule.budget = 1;
                let start = Instant::now();
                let r = run_bp(&g, cfg)?;
                let total = start.elapsed().as_secs_f64();
                let t = &r.trace[0];
                let search_seconds = t.search_time.as_secs_f64();
                rows.push(ChainRow {
                    n,
                    q,
                    trial,
                    mode,
                    cells: t.cells,
                    searches: t.naive_cells / n as u64,
                    sort_seconds: (total - search_seconds).max(0.0),
                    search_seconds,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_cost_is_quadratic() {
        let rows = chain_scaling(&[4, 8], 3, 1, 0, &[MessageMode::Naive, MessageMode::Fast], SearchMode::EarlyStop, Execution::Sequential)
            .unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].cells, 4 * 4 * 4);
        assert_eq!(rows[2].cells, 4 * 8 * 8);
        assert!(rows[3].cells <= rows[2].cells);
        assert_eq!(rows[1].searches, 4 * 4);
    }
}
