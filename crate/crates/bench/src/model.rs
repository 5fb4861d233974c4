//! UAI-style model files.
//!
//! ```text
//! MARKOV
//! 2            # variable count
//! 2 2          # cardinalities
//! 3            # factor count
//! 1 0          # scope: arity, then variable ids
//! 1 1
//! 2 0 1
//! 2            # table: entry count, then values (last scope variable fastest)
//! 1 3
//! ...
//! ```
//!
//! Tables hold nonnegative potentials. A comment `# latent <factor>` marks a
//! factor as data-independent; any other `#` text is ignored.

use std::fmt::Write as _;

use maxprod_core::bp::{FactorGraph, FactorRole};
use maxprod_core::tensor::{Factor, Variable};
use maxprod_core::Semiring;

use crate::error::{BenchError, Result};

struct Tokens {
    items: Vec<(usize, String)>,
    at: usize,
    last_line: usize,
}

impl Tokens {
    fn next(&mut self, what: &str) -> Result<(usize, &str)> {
        match self.items.get(self.at) {
            Some((line, tok)) => {
                self.at += 1;
                Ok((*line, tok.as_str()))
            }
            None => Err(BenchError::Parse { line: self.last_line, message: format!("unexpected end of file, expected {what}") }),
        }
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let (line, tok) = self.next(what)?;
        tok.parse().map_err(|_| BenchError::Parse { line, message: format!("expected {what}, found `{tok}`") })
    }

    fn f64(&mut self, what: &str) -> Result<(usize, f64)> {
        let (line, tok) = self.next(what)?;
        tok.parse()
            .map(|v| (line, v))
            .map_err(|_| BenchError::Parse { line, message: format!("expected {what}, found `{tok}`") })
    }
}

fn to_semiring(p: f64, semiring: Semiring) -> f64 {
    match semiring {
        Semiring::MaxProduct => p,
        Semiring::MaxSum => p.ln(),
        Semiring::MinSum => -p.ln(),
    }
}

fn from_semiring(v: f64, semiring: Semiring) -> f64 {
    match semiring {
        Semiring::MaxProduct => v,
        Semiring::MaxSum => v.exp(),
        Semiring::MinSum => (-v).exp(),
    }
}

/// Parses a model as max-product potentials.
pub fn parse_model(text: &str) -> Result<FactorGraph> {
    parse_model_in(text, Semiring::MaxProduct)
}

/// Parses a model, mapping potentials `p` to `p`, `ln p` or `-ln p` for the given semiring.
pub fn parse_model_in(text: &str, semiring: Semiring) -> Result<FactorGraph> {
    let mut items = Vec::new();
    let mut latent = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c)),
            None => (raw, None),
        };
        if let Some(c) = comment {
            let mut words = c.split_whitespace();
            if words.next() == Some("latent") {
                let idx = words.next().and_then(|w| w.parse::<usize>().ok()).ok_or_else(|| BenchError::Parse {
                    line,
                    message: "`# latent` needs a factor index".into(),
                })?;
                latent.push((line, idx));
            }
        }
        items.extend(body.split_whitespace().map(|t| (line, t.to_string())));
    }
    let last_line = text.lines().count().max(1);
    let mut tok = Tokens { items, at: 0, last_line };

    let (line, kind) = tok.next("model type")?;
    if kind != "MARKOV" {
        return Err(BenchError::Parse { line, message: format!("unknown model type `{kind}`, expected MARKOV") });
    }
    let n_vars = tok.usize("variable count")?;
    let mut cards = Vec::with_capacity(n_vars);
    for v in 0..n_vars {
        let c = tok.usize(&format!("cardinality of variable {v}"))?;
        if c == 0 {
            return Err(BenchError::Parse { line: tok.items[tok.at - 1].0, message: format!("variable {v} has cardinality 0") });
        }
        cards.push(c);
    }
    let n_factors = tok.usize("factor count")?;
    let mut scopes = Vec::with_capacity(n_factors);
    for f in 0..n_factors {
        let arity = tok.usize(&format!("arity of factor {f}"))?;
        let mut scope = Vec::with_capacity(arity);
        for _ in 0..arity {
            let line = tok.items.get(tok.at).map_or(last_line, |t| t.0);
            let id = tok.usize(&format!("variable id in scope of factor {f}"))?;
            if id >= n_vars {
                return Err(BenchError::Parse { line, message: format!("factor {f} refers to unknown variable {id}") });
            }
            if scope.iter().any(|v: &Variable| v.id == id) {
                return Err(BenchError::Parse { line, message: format!("factor {f} lists variable {id} twice") });
            }
            scope.push(Variable::new(id, cards[id]));
        }
        scopes.push(scope);
    }

    let mut graph = FactorGraph::new(&cards, semiring)?;
    let mut roles = vec![FactorRole::DataDependent; n_factors];
    for &(line, idx) in &latent {
        if idx >= n_factors {
            return Err(BenchError::Parse { line, message: format!("`# latent {idx}` but the model has {n_factors} factors") });
        }
        roles[idx] = FactorRole::DataIndependent;
    }
    for (f, scope) in scopes.into_iter().enumerate() {
        let line = tok.items.get(tok.at).map_or(last_line, |t| t.0);
        let count = tok
            .usize(&format!("entry count of factor {f}"))
            .map_err(|e| match e {
                BenchError::Parse { line, message } => BenchError::Parse { line, message: format!("factor {f}: {message}") },
                other => other,
            })?;
        let size: usize = scope.iter().map(|v| v.card).product();
        if count != size {
            return Err(BenchError::Parse { line, message: format!("factor {f} declares {count} entries, its scope has {size}") });
        }
        let mut values = Vec::with_capacity(size);
        for _ in 0..size {
            let (line, p) = tok.f64(&format!("value of factor {f}")).map_err(|e| match e {
                BenchError::Parse { line, message } => {
                    BenchError::Parse { line, message: format!("factor {f} table truncated: {message}") }
                }
                other => other,
            })?;
            if !(p >= 0.0 && p.is_finite()) {
                return Err(BenchError::Parse { line, message: format!("factor {f} has invalid potential {p}") });
            }
            values.push(to_semiring(p, semiring));
        }
        let factor = Factor::from_scope_order(scope, values)?;
        graph.add_factor(factor, roles[f], None)?;
    }
    if let Some((line, t)) = tok.items.get(tok.at) {
        return Err(BenchError::Parse { line: *line, message: format!("unexpected trailing token `{t}`") });
    }
    Ok(graph)
}

/// Writes a graph in the format read by [`parse_model_in`] for the graph's semiring.
pub fn serialize_model(graph: &FactorGraph) -> String {
    let s = graph.semiring();
    let mut out = String::from("MARKOV\n");
    let _ = writeln!(out, "{}", graph.num_vars());
    let cards: Vec<String> = graph.vars().iter().map(|v| v.card.to_string()).collect();
    let _ = writeln!(out, "{}", cards.join(" "));
    let _ = writeln!(out, "{}", graph.factors().len());
    for gf in graph.factors() {
        let ids: Vec<String> = gf.factor.vars().iter().map(|v| v.id.to_string()).collect();
        let _ = writeln!(out, "{} {}", ids.len(), ids.join(" "));
    }
    for (i, gf) in graph.factors().iter().enumerate() {
        if gf.role == FactorRole::DataIndependent {
            let _ = writeln!(out, "# latent {i}");
        }
    }
    for gf in graph.factors() {
        let vals: Vec<String> = gf.factor.values().iter().map(|&v| from_semiring(v, s).to_string()).collect();
        let _ = writeln!(out, "{}\n{}", vals.len(), vals.join(" "));
    }
    out
}
