//! Character-level denoising with bigram priors.
//!
//! The chain model couples neighbouring characters; the skip-2 model also
//! couples characters two apart and is decoded by a second-order Viterbi
//! pass whose inner maximization is a 3-clique max-marginal.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use maxprod_core::argmax::SearchMode;
use maxprod_core::bp::{decode_map, run_bp, BpConfig, FactorGraph, FactorRole, MessageMode};
use maxprod_core::clique::{three_clique_sorted, SortedRows};
use maxprod_core::tensor::{Factor, Variable};
use maxprod_core::{Execution, Semiring};
use rand::Rng;

use crate::csvout::Record;
use crate::error::{config, BenchError, Result};

/// Minimum corpus length used to estimate the prior.
pub const MIN_CORPUS_CHARS: usize = 10_000;

/// The bundled sample text.
pub const BUNDLED_CORPUS: &str = include_str!("../data/corpus.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TextModel {
    #[default]
    Chain,
    Skip2,
}

impl FromStr for TextModel {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Self::Chain),
            "skip-2" | "skip2" => Ok(Self::Skip2),
            other => config(format!("unknown text model `{other}`, expected chain or skip-2")),
        }
    }
}

/// Collapses all whitespace runs to single spaces.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn load_corpus(path: Option<&Path>) -> Result<String> {
    let raw = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => BUNDLED_CORPUS.to_string(),
    };
    Ok(normalize_text(&raw))
}

/// Symmetric noise: keep a character with probability `1-ε`, otherwise
/// replace it by one of the other characters uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub alphabet: Vec<char>,
    pub eps: f64,
}

impl NoiseModel {
    pub fn new(alphabet: Vec<char>, eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return config(format!("noise rate {eps} outside [0, 1)"));
        }
        if alphabet.len() < 2 {
            return config("alphabet needs at least two characters");
        }
        Ok(Self { alphabet, eps })
    }

    pub fn index(&self, c: char) -> Option<usize> {
        self.alphabet.binary_search(&c).ok()
    }

    /// `p(observed | true)` for symbols of the alphabet.
    pub fn prob(&self, observed: usize, truth: usize) -> f64 {
        if observed == truth {
            1.0 - self.eps
        } else {
            self.eps / (self.alphabet.len() - 1) as f64
        }
    }

    /// Log-likelihood of every true state given an observation. Characters
    /// outside the alphabet are equally likely under every state.
    pub fn log_emission(&self, observed: Option<usize>) -> Vec<f64> {
        let a = self.alphabet.len();
        match observed {
            Some(o) => (0..a).map(|x| self.prob(o, x).ln()).collect(),
            None => vec![0.0; a],
        }
    }

    pub fn corrupt<R: Rng + ?Sized>(&self, text: &[char], rng: &mut R) -> Vec<char> {
        let a = self.alphabet.len();
        text.iter()
            .map(|&c| {
                if rng.random::<f64>() < self.eps {
                    let i = self.index(c).unwrap_or(0);
                    let j = rng.random_range(0..a - 1);
                    self.alphabet[if j >= i { j + 1 } else { j }]
                } else {
                    c
                }
            })
            .collect()
    }
}

/// Log bigram tables with add-one smoothing, row-major over `(previous, next)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramPrior {
    pub alphabet: Vec<char>,
    /// `ln p(next | previous)` for adjacent characters.
    pub adjacent: Vec<f64>,
    /// `ln p(next | previous)` for characters two apart.
    pub skip: Vec<f64>,
}

impl BigramPrior {
    pub fn train(corpus: &str, alphabet: Option<Vec<char>>) -> Result<Self> {
        let chars: Vec<char> = corpus.chars().collect();
        if chars.len() < MIN_CORPUS_CHARS {
            return config(format!("corpus has {} characters, need at least {MIN_CORPUS_CHARS}", chars.len()));
        }
        let alphabet = alphabet.unwrap_or_else(|| chars.iter().copied().collect::<BTreeSet<_>>().into_iter().collect());
        let a = alphabet.len();
        let idx = |c: char| alphabet.binary_search(&c).ok();
        let table = |gap: usize| {
            let mut counts = vec![1.0f64; a * a];
            for w in chars.windows(gap + 1) {
                if let (Some(p), Some(n)) = (idx(w[0]), idx(w[gap])) {
                    counts[p * a + n] += 1.0;
                }
            }
            for row in counts.chunks_mut(a) {
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|c| *c = (*c / total).ln());
            }
            counts
        };
        let adjacent = table(1);
        let skip = table(2);
        Ok(Self { alphabet, adjacent, skip })
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecodeStats {
    /// Entries probed by the searches.
    pub probes: u64,
    /// Entries a full scan would have combined.
    pub naive: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Denoised {
    pub text: String,
    /// Log-score of the decoded text under the model.
    pub score: f64,
    pub stats: DecodeStats,
}

fn observations(input: &str, noise: &NoiseModel, stats: &mut DecodeStats) -> Vec<Option<usize>> {
    input
        .chars()
        .enumerate()
        .map(|(i, c)| {
            let o = noise.index(c);
            if o.is_none() {
                stats.warnings.push(format!("character {c:?} at position {i} is outside the alphabet"));
            }
            o
        })
        .collect()
}

/// Log-score of a state sequence: emissions plus the model's prior terms.
pub fn score_states(states: &[usize], obs: &[Option<usize>], prior: &BigramPrior, noise: &NoiseModel, model: TextModel) -> f64 {
    let a = prior.len();
    let mut s = 0.0;
    for (i, &x) in states.iter().enumerate() {
        s += noise.log_emission(obs[i])[x];
        if i >= 1 {
            s += prior.adjacent[states[i - 1] * a + x];
        }
        if i >= 2 && model == TextModel::Skip2 {
            s += prior.skip[states[i - 2] * a + x];
        }
    }
    s
}

/// Decodes `input` under the chosen model, returning the most likely clean text.
pub fn run_denoise(prior: &BigramPrior, input: &str, eps: f64, model: TextModel) -> Result<Denoised> {
    let noise = NoiseModel::new(prior.alphabet.clone(), eps)?;
    let mut stats = DecodeStats::default();
    let obs = observations(input, &noise, &mut stats);
    if obs.is_empty() {
        return Ok(Denoised { text: String::new(), score: 0.0, stats });
    }
    let states = match model {
        TextModel::Chain => decode_chain(prior, &noise, &obs, &mut stats)?,
        TextModel::Skip2 => decode_skip2(prior, &noise, &obs, &mut stats)?,
    };
    let score = score_states(&states, &obs, prior, &noise, model);
    Ok(Denoised { text: states.iter().map(|&s| prior.alphabet[s]).collect(), score, stats })
}

fn decode_chain(prior: &BigramPrior, noise: &NoiseModel, obs: &[Option<usize>], stats: &mut DecodeStats) -> Result<Vec<usize>> {
    let a = prior.len();
    let q = obs.len();
    let mut g = FactorGraph::new(&vec![a; q], Semiring::MaxSum)?;
    for (i, &o) in obs.iter().enumerate() {
        g.add_factor(Factor::new(vec![Variable::new(i, a)], noise.log_emission(o))?, FactorRole::DataDependent, None)?;
    }
    let shared: std::sync::Arc<[f64]> = prior.adjacent.clone().into();
    for i in 1..q {
        let f = Factor::new(vec![Variable::new(i - 1, a), Variable::new(i, a)], std::sync::Arc::clone(&shared))?;
        g.add_factor(f, FactorRole::DataIndependent, Some(0))?;
    }
    let mut cfg = BpConfig { mode: MessageMode::Fast, ..BpConfig::default() };
    cfg.schedule.budget = 1;
    let r = run_bp(&g, cfg)?;
    for t in &r.trace {
        stats.probes += t.cells;
        stats.naive += t.naive_cells;
    }
    Ok(decode_map(&r, &g)?.states().to_vec())
}

fn decode_skip2(prior: &BigramPrior, noise: &NoiseModel, obs: &[Option<usize>], stats: &mut DecodeStats) -> Result<Vec<usize>> {
    let a = prior.len();
    let q = obs.len();
    let s = Semiring::MaxSum;
    let emit: Vec<Vec<f64>> = obs.iter().map(|&o| noise.log_emission(o)).collect();
    if q == 1 {
        return Ok(vec![s.argbest(&emit[0]).expect("non-empty alphabet")]);
    }
    // delta[(p, c)]: best score of a prefix ending in states (p, c).
    let mut delta: Vec<f64> = (0..a * a).map(|pc| emit[0][pc / a] + prior.adjacent[pc] + emit[1][pc % a]).collect();
    // skip rows indexed by the later character, listing the earlier one.
    let mut skip_t = vec![0.0; a * a];
    for p in 0..a {
        for n in 0..a {
            skip_t[n * a + p] = prior.skip[p * a + n];
        }
    }
    let skip_rows = SortedRows::from_table(skip_t, a, s, Execution::Sequential)?;
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(q.saturating_sub(2));
    for i in 2..q {
        let mut delta_t = vec![0.0; a * a];
        for p in 0..a {
            for c in 0..a {
                delta_t[c * a + p] = delta[p * a + c];
            }
        }
        let delta_rows = SortedRows::from_table(delta_t, a, s, Execution::Sequential)?;
        let local: Vec<f64> = (0..a * a).map(|cn| prior.adjacent[cn] + emit[i][cn % a]).collect();
        let t = three_clique_sorted(&local, &delta_rows, &skip_rows, SearchMode::EarlyStop, s, Execution::Sequential)?;
        stats.probes += t.probes;
        stats.naive += (a * a * a) as u64;
        delta = t.values;
        back.push(t.argbest);
    }
    let last = s.argbest(&delta).expect("non-empty table");
    let mut states = vec![0usize; q];
    states[q - 2] = last / a;
    states[q - 1] = last % a;
    for i in (2..q).rev() {
        states[i - 2] = back[i - 2][states[i - 1] * a + states[i]] as usize;
    }
    Ok(states)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseRow {
    pub model: TextModel,
    pub eps: f64,
    pub chars: usize,
    pub corrupted: usize,
    pub errors: usize,
    pub accuracy: f64,
    pub probes: u64,
    pub naive: u64,
}

impl Record for DenoiseRow {
    const HEADER: &'static [&'static str] = &["model", "eps", "chars", "corrupted", "errors", "accuracy", "probes", "naive"];

    fn fields(&self) -> Vec<String> {
        vec![
            match self.model {
                TextModel::Chain => "chain".into(),
                TextModel::Skip2 => "skip-2".into(),
            },
            self.eps.to_string(),
            self.chars.to_string(),
            self.corrupted.to_string(),
            self.errors.to_string(),
            self.accuracy.to_string(),
            self.probes.to_string(),
            self.naive.to_string(),
        ]
    }
}

/// Trains on the leading `train_fraction` of the corpus, corrupts the rest
/// at rate `eps` and measures the character accuracy of the decoded text.
pub fn heldout_accuracy<R: Rng + ?Sized>(
    corpus: &str,
    train_fraction: f64,
    eps: f64,
    model: TextModel,
    rng: &mut R,
) -> Result<DenoiseRow> {
    let chars: Vec<char> = corpus.chars().collect();
    let split = (chars.len() as f64 * train_fraction).round() as usize;
    if split < MIN_CORPUS_CHARS || split >= chars.len() {
        return config(format!(
            "training part has {split} of {} characters, need at least {MIN_CORPUS_CHARS} and a non-empty held-out part",
            chars.len()
        ));
    }
    let alphabet: Vec<char> = chars.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let train: String = chars[..split].iter().collect();
    let prior = BigramPrior::train(&train, Some(alphabet.clone()))?;
    let truth = &chars[split..];
    let noise = NoiseModel::new(alphabet, eps)?;
    let noisy = noise.corrupt(truth, rng);
    let out = run_denoise(&prior, &noisy.iter().collect::<String>(), eps, model)?;
    let errors = out.text.chars().zip(truth).filter(|(a, b)| a != *b).count();
    Ok(DenoiseRow {
        model,
        eps,
        chars: truth.len(),
        corrupted: noisy.iter().zip(truth).filter(|(a, b)| a != b).count(),
        errors,
        accuracy: 1.0 - errors as f64 / truth.len() as f64,
        probes: out.stats.probes,
        naive: out.stats.naive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prior() -> BigramPrior {
        BigramPrior::train(&load_corpus(None).unwrap(), None).unwrap()
    }

    #[test]
    fn emission_rows_sum_to_one() {
        let n = NoiseModel::new(vec!['a', 'b', 'c', 'd'], 0.1).unwrap();
        for x in 0..4 {
            let total: f64 = (0..4).map(|o| n.prob(o, x)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!(NoiseModel::new(vec!['a', 'b'], 1.0).is_err());
    }

    #[test]
    fn prior_rows_are_distributions() {
        let p = prior();
        let a = p.len();
        for row in p.adjacent.chunks(a).chain(p.skip.chunks(a)) {
            let total: f64 = row.iter().map(|v| v.exp()).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        assert!(BigramPrior::train("too short", None).is_err());
    }

    #[test]
    fn noiseless_emission_keeps_input() {
        let p = prior();
        let text = "the sea was wide and grey";
        for model in [TextModel::Chain, TextModel::Skip2] {
            assert_eq!(run_denoise(&p, text, 0.0, model).unwrap().text, text);
        }
    }

    #[test]
    fn corrects_the_example_sentence() {
        let p = prior();
        for model in [TextModel::Chain, TextModel::Skip2] {
            let out = run_denoise(&p, "wondrous sight of th4 ivory Pequod", 0.01, model).unwrap();
            assert_eq!(out.text, "wondrous sight of the ivory Pequod");
            assert_eq!(out.stats.warnings.len(), 1);
        }
    }

    #[test]
    fn model_names() {
        assert_eq!("skip-2".parse::<TextModel>().unwrap(), TextModel::Skip2);
        assert!("trigram".parse::<TextModel>().is_err());
    }
}
