use std::sync::Arc;

use super::graph::{FactorGraph, FactorRole};
use crate::error::{domain, Result};
use crate::tensor::{Factor, Variable};
use crate::Semiring;

/// Built-in pairwise model shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Chain(usize),
    Ring(usize),
    /// `rows × cols` 4-connected grid; variable `r * cols + c`.
    Grid(usize, usize),
}

impl Topology {
    pub fn num_vars(&self) -> usize {
        match *self {
            Topology::Chain(q) | Topology::Ring(q) => q,
            Topology::Grid(r, c) => r * c,
        }
    }

    /// Edges as `(lower id, higher id)`.
    pub fn edges(&self) -> Result<Vec<(usize, usize)>> {
        match *self {
            Topology::Chain(q) if q >= 2 => Ok((0..q - 1).map(|i| (i, i + 1)).collect()),
            Topology::Ring(q) if q >= 3 => {
                let mut e: Vec<(usize, usize)> = (0..q - 1).map(|i| (i, i + 1)).collect();
                e.push((0, q - 1));
                Ok(e)
            }
            Topology::Grid(r, c) if r >= 2 && c >= 2 => {
                let mut e = Vec::with_capacity(2 * r * c - r - c);
                for i in 0..r {
                    for j in 0..c {
                        let v = i * c + j;
                        if j + 1 < c {
                            e.push((v, v + 1));
                        }
                        if i + 1 < r {
                            e.push((v, v + c));
                        }
                    }
                }
                Ok(e)
            }
            t => domain(format!("invalid topology dimensions {t:?}")),
        }
    }
}

/// Pairwise tables for a built topology, laid out row-major over `(lower id, higher id)`.
pub enum Pairwise<'a> {
    /// One table shared by every edge (a homogeneous prior).
    Shared(Vec<f64>),
    /// `f(edge index, a, b)` builds the table of edge `(a, b)`.
    PerEdge(Box<dyn FnMut(usize, usize, usize) -> Vec<f64> + 'a>),
}

/// Builds a chain, ring or grid with `n` states per variable.
///
/// Unary factors (`unary(v)`, skipped when `None`) are data-dependent; pairwise
/// factors are data-independent. A shared table puts every edge in class 0.
pub fn build_topology(
    topology: Topology,
    n: usize,
    semiring: Semiring,
    mut unary: impl FnMut(usize) -> Option<Vec<f64>>,
    pairwise: Pairwise<'_>,
) -> Result<FactorGraph> {
    let edges = topology.edges()?;
    let mut g = FactorGraph::new(&vec![n; topology.num_vars()], semiring)?;
    for v in 0..topology.num_vars() {
        if let Some(values) = unary(v) {
            g.add_factor(Factor::new(vec![Variable::new(v, n)], values)?, FactorRole::DataDependent, None)?;
        }
    }
    match pairwise {
        Pairwise::Shared(table) => {
            let table: Arc<[f64]> = table.into();
            for &(a, b) in &edges {
                let f = Factor::new(vec![Variable::new(a, n), Variable::new(b, n)], Arc::clone(&table))?;
                g.add_factor(f, FactorRole::DataIndependent, Some(0))?;
            }
        }
        Pairwise::PerEdge(mut make) => {
            for (e, &(a, b)) in edges.iter().enumerate() {
                let f = Factor::new(vec![Variable::new(a, n), Variable::new(b, n)], make(e, a, b))?;
                g.add_factor(f, FactorRole::DataIndependent, None)?;
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        assert_eq!(Topology::Chain(5).edges().unwrap().len(), 4);
        assert_eq!(Topology::Ring(4).edges().unwrap().len(), 4);
        assert_eq!(Topology::Grid(3, 3).edges().unwrap().len(), 12);
        assert_eq!(Topology::Grid(50, 50).edges().unwrap().len(), 2 * 50 * 49);
        assert!(Topology::Chain(1).edges().is_err());
        assert!(Topology::Ring(2).edges().is_err());
        assert!(Topology::Grid(1, 4).edges().is_err());
    }

    #[test]
    fn ring_has_one_cycle() {
        let g = build_topology(Topology::Ring(4), 2, Semiring::MaxSum, |_| None, Pairwise::Shared(vec![0.; 4])).unwrap();
        assert!(!g.is_forest());
        assert_eq!(g.factors().len(), 4);
        let c = build_topology(Topology::Chain(4), 2, Semiring::MaxSum, |_| None, Pairwise::Shared(vec![0.; 4])).unwrap();
        assert!(c.is_forest());
    }

    #[test]
    fn shared_tables_are_shared() {
        let g = build_topology(Topology::Grid(3, 4), 3, Semiring::MaxSum, |_| Some(vec![0.; 3]), Pairwise::Shared(vec![1.; 9]))
            .unwrap();
        assert_eq!(g.distinct_pairwise_tables(), 1);
        assert_eq!(g.factors().len(), 12 + 17);
        assert!(g.factors().iter().filter(|f| f.factor.arity() == 2).all(|f| f.class == Some(0)));
    }
}
