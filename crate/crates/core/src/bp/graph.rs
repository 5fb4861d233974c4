use std::sync::Arc;

use crate::error::{domain, Result};
use crate::tensor::{Assignment, Factor, VarId, Variable};
use crate::Semiring;

/// Whether a factor depends on the observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FactorRole {
    #[default]
    DataDependent,
    /// Purely latent: its tables can be sorted before any data is seen.
    DataIndependent,
}

#[derive(Debug, Clone)]
pub struct GraphFactor {
    pub factor: Factor,
    pub role: FactorRole,
    /// Factors of one class share their order statistics and are sorted once.
    pub class: Option<usize>,
}

/// Variables plus factors over them. Variable ids are `0..num_vars()`.
#[derive(Debug, Clone)]
pub struct FactorGraph {
    semiring: Semiring,
    vars: Vec<Variable>,
    factors: Vec<GraphFactor>,
    adjacency: Vec<Vec<usize>>,
}

impl FactorGraph {
    pub fn new(cards: &[usize], semiring: Semiring) -> Result<Self> {
        if let Some(i) = cards.iter().position(|&c| c == 0) {
            return domain(format!("variable {i} has cardinality 0"));
        }
        Ok(Self {
            semiring,
            vars: cards.iter().enumerate().map(|(i, &c)| Variable::new(i, c)).collect(),
            factors: Vec::new(),
            adjacency: vec![Vec::new(); cards.len()],
        })
    }

    /// Adds a factor, returning its index.
    pub fn add_factor(&mut self, factor: Factor, role: FactorRole, class: Option<usize>) -> Result<usize> {
        for v in factor.vars() {
            match self.vars.get(v.id) {
                Some(d) if d.card == v.card => {}
                Some(d) => {
                    return domain(format!(
                        "factor uses variable {} with cardinality {}, declared {}",
                        v.id, v.card, d.card
                    ))
                }
                None => return domain(format!("factor uses undeclared variable {}", v.id)),
            }
        }
        self.semiring.validate(factor.values())?;
        if let Some(c) = class {
            if let Some(other) = self.factors.iter().find(|g| g.class == Some(c)) {
                let shape = |f: &Factor| f.vars().iter().map(|v| v.card).collect::<Vec<_>>();
                if shape(&other.factor) != shape(&factor) {
                    return domain(format!("factor does not match the shape of class {c}"));
                }
            }
        }
        let idx = self.factors.len();
        for v in factor.vars() {
            self.adjacency[v.id].push(idx);
        }
        self.factors.push(GraphFactor { factor, role, class });
        Ok(idx)
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> Variable {
        self.vars[id]
    }

    pub fn factors(&self) -> &[GraphFactor] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &GraphFactor {
        &self.factors[i]
    }

    /// Indices of the factors touching variable `v`.
    pub fn neighbors(&self, v: VarId) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn plain_factors(&self) -> Vec<Factor> {
        self.factors.iter().map(|g| g.factor.clone()).collect()
    }

    /// Combined value of a full assignment, folding factors in insertion order.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<f64> {
        let mut v = self.semiring.one();
        for g in &self.factors {
            v = self.semiring.combine(v, g.factor.value_of(assignment)?);
        }
        Ok(v)
    }

    /// Number of distinct value buffers among factors of arity ≥ 2.
    pub fn distinct_pairwise_tables(&self) -> usize {
        let mut seen: Vec<&Arc<[f64]>> = Vec::new();
        for g in self.factors.iter().filter(|g| g.factor.arity() >= 2) {
            let b = g.factor.shared_values();
            if !seen.iter().any(|s| Arc::ptr_eq(s, b)) {
                seen.push(b);
            }
        }
        seen.len()
    }

    /// Whether the variable/factor incidence graph (ignoring unary factors) has no cycles.
    pub fn is_forest(&self) -> bool {
        let big: Vec<&GraphFactor> = self.factors.iter().filter(|g| g.factor.arity() >= 2).collect();
        let mut parent: Vec<usize> = (0..self.vars.len() + big.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (fi, g) in big.iter().enumerate() {
            let node = self.vars.len() + fi;
            for v in g.factor.vars() {
                let (a, b) = (find(&mut parent, node), find(&mut parent, v.id));
                if a == b {
                    return false;
                }
                parent[a] = b;
            }
        }
        true
    }
}
