//! Funny matrix products `C[i][j] = best_k A[i][k] ⊗ B[k][j]` and model max-marginals, fast against brute force.

use std::time::Instant;

use maxprod_core::argmax::SearchMode;
use maxprod_core::bp::FactorGraph;
use maxprod_core::clique::{funny_matmul_with, max_marginal_auto, GroupedConfig};
use maxprod_core::tensor::{max_marginal_brute, unflatten, VarId};
use maxprod_core::{Execution, Semiring};
use rand::Rng;

use crate::csvout::Record;
use crate::error::Result;
use crate::lists::trial_rng;

/// Triple-loop reference product.
pub fn naive_matmul(a: &[f64], b: &[f64], n: usize, s: Semiring) -> Vec<f64> {
    let mut c = vec![s.zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut best = s.zero();
            for k in 0..n {
                let v = s.combine(a[i * n + k], b[k * n + j]);
                if s.is_better(v, best) {
                    best = v;
                }
            }
            c[i * n + j] = best;
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatmulRow {
    pub n: usize,
    pub semiring: Semiring,
    pub mode: SearchMode,
    pub probes: u64,
    pub naive: u64,
    pub fast_seconds: f64,
    pub naive_seconds: f64,
    pub equal: bool,
}

impl Record for MatmulRow {
    const HEADER: &'static [&'static str] =
        &["n", "semiring", "mode", "probes", "naive", "fast_seconds", "naive_seconds", "equal"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.semiring.to_string(),
            self.mode.to_string(),
            self.probes.to_string(),
            self.naive.to_string(),
            self.fast_seconds.to_string(),
            self.naive_seconds.to_string(),
            self.equal.to_string(),
        ]
    }
}

/// Random `n × n` matrices with entries in `(0, 1]` (negated logs for the additive semirings).
pub fn bench_matmul(sizes: &[usize], seed: u64, s: Semiring, mode: SearchMode, exec: Execution) -> Result<Vec<MatmulRow>> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut rng = trial_rng(seed, n, 0);
        let mut draw = || {
            let p: f64 = 1.0 - rng.random::<f64>();
            match s {
                Semiring::MaxProduct => p,
                Semiring::MaxSum => p.ln(),
                Semiring::MinSum => -p.ln(),
            }
        };
        let a: Vec<f64> = (0..n * n).map(|_| draw()).collect();
        let b: Vec<f64> = (0..n * n).map(|_| draw()).collect();
        let t = Instant::now();
        let (fast, probes) = funny_matmul_with(&a, &b, n, s, mode, exec)?;
        let fast_seconds = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let slow = naive_matmul(&a, &b, n, s);
        let naive_seconds = t.elapsed().as_secs_f64();
        rows.push(MatmulRow {
            n,
            semiring: s,
            mode,
            probes,
            naive: (n * n * n) as u64,
            fast_seconds,
            naive_seconds,
            equal: fast == slow,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalRow {
    pub states: Vec<usize>,
    pub fast: f64,
    pub brute: f64,
}

impl Record for MarginalRow {
    const HEADER: &'static [&'static str] = &["states", "fast", "brute", "equal"];

    fn fields(&self) -> Vec<String> {
        let states: Vec<String> = self.states.iter().map(|s| s.to_string()).collect();
        vec![states.join(" "), self.fast.to_string(), self.brute.to_string(), (self.fast == self.brute).to_string()]
    }
}

/// Max-marginal of a model over `target`, by the grouped algorithm and by enumeration.
pub fn model_marginal(graph: &FactorGraph, target: &[VarId], mode: SearchMode) -> Result<Vec<MarginalRow>> {
    let factors = graph.plain_factors();
    let s = graph.semiring();
    let cfg = GroupedConfig { mode, ..GroupedConfig::default() };
    let fast = max_marginal_auto(&factors, target, s, cfg)?;
    let brute = max_marginal_brute(&factors, target, s)?;
    (0..fast.len())
        .map(|i| {
            Ok(MarginalRow { states: unflatten(i, fast.vars())?, fast: fast.values()[i], brute: brute.values()[i] })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_matches_naive() {
        for s in [Semiring::MaxProduct, Semiring::MaxSum, Semiring::MinSum] {
            let rows = bench_matmul(&[1, 7, 32], 3, s, SearchMode::EarlyStop, Execution::default()).unwrap();
            assert!(rows.iter().all(|r| r.equal && r.probes <= r.naive));
        }
    }
}
