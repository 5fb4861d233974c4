//! Step and probe counts of the sorted-list search on synthetic lists.

use maxprod_core::argmax::{
    expected_steps, fast_argmax_k_trusted, fast_argmax_pair_trusted, step_bound, ArgmaxOutcome, PermRef, ReadScratch,
    SearchMode, SortedPermutation,
};
use maxprod_core::{Execution, Semiring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::BenchConfig;
use crate::csvout::{opt, Record};
use crate::error::Result;

/// Generator for one trial, independent of how trials are scheduled.
pub fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) ^ trial as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArgmaxRow {
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub steps: usize,
    pub probes: usize,
    /// Expected analysis-mode steps on random lists; only for two lists.
    pub expected: Option<f64>,
    pub bound: f64,
}

impl Record for ArgmaxRow {
    const HEADER: &'static [&'static str] = &["n", "k", "trial", "steps", "probes", "expected", "bound"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.trial.to_string(),
            self.steps.to_string(),
            self.probes.to_string(),
            opt(self.expected),
            self.bound.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedRow {
    pub n: usize,
    pub corr: f64,
    pub trial: usize,
    pub steps: usize,
    pub probes: usize,
}

impl Record for CorrelatedRow {
    const HEADER: &'static [&'static str] = &["n", "corr", "trial", "steps", "probes"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.corr.to_string(),
            self.trial.to_string(),
            self.steps.to_string(),
            self.probes.to_string(),
        ]
    }
}

/// Sorts every list and runs the search over all of them.
pub fn search_lists(lists: &[Vec<f64>], mode: SearchMode, scratch: &mut ReadScratch) -> ArgmaxOutcome {
    let s = Semiring::MaxSum;
    let perms: Vec<SortedPermutation> =
        lists.iter().map(|l| SortedPermutation::sort(&l[..], s).expect("finite values")).collect();
    let refs: Vec<PermRef<'_>> = perms.iter().map(|p| p.as_ref()).collect();
    if lists.len() == 2 {
        fast_argmax_pair_trusted(&lists[0][..], &lists[1][..], refs[0], refs[1], mode, s)
    } else {
        let views: Vec<&[f64]> = lists.iter().map(|l| &l[..]).collect();
        scratch.reserve(lists[0].len());
        fast_argmax_k_trusted(&views, &refs, scratch, mode, s)
    }
}

/// `k` lists of i.i.d. uniform `[0, 1)` values per trial.
pub fn bench_argmax(cfg: &BenchConfig) -> Result<Vec<ArgmaxRow>> {
    bench_argmax_with(cfg, Execution::default())
}

pub fn bench_argmax_with(cfg: &BenchConfig, exec: Execution) -> Result<Vec<ArgmaxRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.sizes.len() * cfg.trials);
    for &n in &cfg.sizes {
        let expected = if cfg.k == 2 { Some(expected_steps(n)?) } else { None };
        let bound = step_bound(n, cfg.k);
        rows.extend(exec.map_init(
            cfg.trials,
            || ReadScratch::new(n),
            |scratch, trial| {
                let mut rng = trial_rng(cfg.seed, n, trial);
                let lists: Vec<Vec<f64>> = (0..cfg.k).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
                let out = search_lists(&lists, cfg.mode, scratch);
                ArgmaxRow { n, k: cfg.k, trial, steps: out.steps, probes: out.probes, expected, bound }
            },
        ));
    }
    Ok(rows)
}

/// Two lists of standard normal pairs with correlation `cfg.corr`.
pub fn bench_correlated(cfg: &BenchConfig) -> Result<Vec<CorrelatedRow>> {
    bench_correlated_with(cfg, Execution::default())
}

pub fn bench_correlated_with(cfg: &BenchConfig, exec: Execution) -> Result<Vec<CorrelatedRow>> {
    cfg.validate()?;
    let c = cfg.corr;
    let residual = (1.0 - c * c).max(0.0).sqrt();
    let mut rows = Vec::with_capacity(cfg.sizes.len() * cfg.trials);
    for &n in &cfg.sizes {
        rows.extend(exec.map_init(
            cfg.trials,
            || ReadScratch::new(n),
            |scratch, trial| {
                let mut rng = trial_rng(cfg.seed, n, trial);
                let mut a = Vec::with_capacity(n);
                let mut b = Vec::with_capacity(n);
                for _ in 0..n {
                    let z1: f64 = rng.sample(StandardNormal);
                    let z2: f64 = rng.sample(StandardNormal);
                    a.push(z1);
                    b.push(c * z1 + residual * z2);
                }
                let out = search_lists(&[a, b], cfg.mode, scratch);
                CorrelatedRow { n, corr: c, trial, steps: out.steps, probes: out.probes }
            },
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csvout::to_csv_string;

    #[test]
    fn single_element_lists_take_one_step() {
        let cfg = BenchConfig { sizes: vec![1], trials: 20, ..Default::default() };
        assert!(bench_argmax(&cfg).unwrap().iter().all(|r| r.steps == 1 && r.probes == 1));
    }

    #[test]
    fn deterministic_across_runs_and_executions() {
        let cfg = BenchConfig { sizes: vec![16, 33], k: 3, trials: 50, seed: 9, ..Default::default() };
        let a = to_csv_string(&bench_argmax_with(&cfg, Execution::Parallel).unwrap()).unwrap();
        let b = to_csv_string(&bench_argmax_with(&cfg, Execution::Sequential).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("n,k,trial,steps,probes,expected,bound\n"));
    }

    #[test]
    fn correlation_endpoints() {
        let n = 64;
        let one = BenchConfig { sizes: vec![n], trials: 20, corr: 1.0, ..Default::default() };
        assert!(bench_correlated(&one).unwrap().iter().all(|r| r.steps == 1));
        let rev = BenchConfig { corr: -1.0, ..one };
        assert!(bench_correlated(&rev).unwrap().iter().all(|r| r.steps == n / 2 + 1));
    }
}
