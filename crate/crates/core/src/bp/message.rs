use super::graph::FactorGraph;
use super::prior::{PresortedPrior, RowLayout};
use crate::argmax::{fast_argmax_pair_trusted, ListAccess, PermRef, SearchMode, SortedPermutation};
use crate::error::{domain, Result};
use crate::tensor::VarId;
use crate::Semiring;

/// How factor-to-variable messages are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MessageMode {
    /// Scan every cell of the factor.
    Naive,
    /// Pair search against pre-sorted factor rows and the sorted incoming table.
    #[default]
    Fast,
}

impl std::str::FromStr for MessageMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(MessageMode::Naive),
            "fast" => Ok(MessageMode::Fast),
            other => domain(format!("unknown message mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Var(VarId),
    Factor(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub from: Node,
    pub to: Node,
    pub values: Vec<f64>,
    /// Iteration in which the message was produced.
    pub stamp: usize,
}

/// A directed factor-to-variable edge; `pos` is the variable's position in the factor scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub factor: usize,
    pub pos: usize,
    pub var: VarId,
}

/// Work done by one message computation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MessageCost {
    /// Factor cells combined (fast mode: distinct probes summed over rows).
    pub cells: u64,
    /// Cells the naive scan would have combined.
    pub naive_cells: u64,
}

/// Incoming table over the non-target variables (ascending id, row-major),
/// folded left over the variable-to-factor messages in that order.
pub(crate) fn incoming_table(inputs: &[&[f64]], semiring: Semiring) -> Vec<f64> {
    if let [single] = inputs {
        return single.to_vec();
    }
    let mut table = vec![semiring.one()];
    for m in inputs {
        let mut next = Vec::with_capacity(table.len() * m.len());
        for &a in &table {
            for &b in m.iter() {
                next.push(semiring.combine(a, b));
            }
        }
        table = next;
    }
    table
}

/// `m(q) = best_w inc[w] ⊗ row_q[w]` for every state `q` of the target.
#[allow(clippy::too_many_arguments)]
pub(crate) fn message_core(
    data: &[f64],
    layout: &RowLayout,
    rows: usize,
    inc: &[f64],
    mode: MessageMode,
    sorted: Option<(&PresortedPrior, usize, PermRef<'_>)>,
    search: SearchMode,
    semiring: Semiring,
) -> (Vec<f64>, MessageCost) {
    let len = inc.len();
    let mut out = Vec::with_capacity(rows);
    let mut cost = MessageCost { cells: 0, naive_cells: (rows * len) as u64 };
    match (mode, sorted) {
        (MessageMode::Fast, Some((prior, pos, inc_perm))) => {
            for q in 0..rows {
                let row = layout.row(data, q);
                let perm = prior.perm(pos, q).expect("direction checked by caller");
                let o = fast_argmax_pair_trusted(inc, &row, inc_perm, perm, search, semiring);
                cost.cells += o.probes as u64;
                out.push(o.value);
            }
        }
        _ => {
            for q in 0..rows {
                let row = layout.row(data, q);
                let mut best = semiring.combine(inc[0], row.get(0));
                for (w, &a) in inc.iter().enumerate().skip(1) {
                    let v = semiring.combine(a, row.get(w));
                    if semiring.is_better(v, best) {
                        best = v;
                    }
                }
                out.push(best);
            }
            cost.cells = cost.naive_cells;
        }
    }
    (out, cost)
}

/// Computes the unnormalized message along `edge` from the incoming
/// variable-to-factor messages of the factor's other variables.
///
/// Fast mode needs a prior sorted in the edge's direction; it returns the same
/// table as naive mode, bit for bit.
pub fn compute_message(
    graph: &FactorGraph,
    edge: Edge,
    incoming: &[Message],
    mode: MessageMode,
    prior: Option<&PresortedPrior>,
    search: SearchMode,
) -> Result<(Message, MessageCost)> {
    let semiring = graph.semiring();
    let gf = graph.factors().get(edge.factor).ok_or_else(|| {
        crate::Error::Protocol(format!("no factor {}", edge.factor))
    })?;
    let f = &gf.factor;
    if f.arity() < 2 || f.vars().get(edge.pos).map(|v| v.id) != Some(edge.var) {
        return Err(crate::Error::Protocol("edge does not match its factor's scope".into()));
    }
    let mut inputs: Vec<&[f64]> = Vec::with_capacity(f.arity() - 1);
    for (p, v) in f.vars().iter().enumerate() {
        if p == edge.pos {
            continue;
        }
        let m = incoming
            .iter()
            .find(|m| m.from == Node::Var(v.id) && m.to == Node::Factor(edge.factor))
            .ok_or_else(|| {
                crate::Error::Protocol(format!(
                    "missing message from variable {} to factor {}",
                    v.id, edge.factor
                ))
            })?;
        if m.values.len() != v.card {
            return Err(crate::Error::Protocol(format!("message from variable {} has the wrong length", v.id)));
        }
        inputs.push(&m.values);
    }
    let inc = incoming_table(&inputs, semiring);
    let rows = f.vars()[edge.pos].card;
    let (values, cost) = match mode {
        MessageMode::Naive => {
            let layout = RowLayout::new(f.vars(), edge.pos);
            message_core(f.values(), &layout, rows, &inc, mode, None, search, semiring)
        }
        MessageMode::Fast => {
            let prior = prior.ok_or_else(|| crate::Error::Protocol("fast mode needs a presorted prior".into()))?;
            let layout = prior.layout(edge.pos)?;
            let inc_perm = SortedPermutation::sort(&inc[..], semiring)?;
            message_core(
                f.values(),
                layout,
                rows,
                &inc,
                mode,
                Some((prior, edge.pos, inc_perm.as_ref())),
                search,
                semiring,
            )
        }
    };
    let msg = Message { from: Node::Factor(edge.factor), to: Node::Var(edge.var), values, stamp: 0 };
    Ok((msg, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::graph::FactorRole;
    use crate::bp::prior::presort_shared_prior;
    use crate::tensor::{Factor, Variable};

    fn example() -> FactorGraph {
        let mut g = FactorGraph::new(&[2, 2], Semiring::MaxProduct).unwrap();
        let v0 = Variable::new(0, 2);
        let v1 = Variable::new(1, 2);
        g.add_factor(Factor::new(vec![v0], vec![1., 1.]).unwrap(), FactorRole::DataDependent, None).unwrap();
        g.add_factor(Factor::new(vec![v1], vec![1., 2.]).unwrap(), FactorRole::DataDependent, None).unwrap();
        g.add_factor(Factor::new(vec![v0, v1], vec![1., 3., 2., 1.]).unwrap(), FactorRole::DataIndependent, None)
            .unwrap();
        g
    }

    fn from_var(v: VarId, f: usize, values: Vec<f64>) -> Message {
        Message { from: Node::Var(v), to: Node::Factor(f), values, stamp: 0 }
    }

    #[test]
    fn worked_example() {
        let g = example();
        let edge = Edge { factor: 2, pos: 0, var: 0 };
        let inc = [from_var(1, 2, vec![1., 2.])];
        let prior = presort_shared_prior(&g.factor(2).factor, &[0, 1], Semiring::MaxProduct).unwrap();
        for mode in [MessageMode::Naive, MessageMode::Fast] {
            let (m, _) = compute_message(&g, edge, &inc, mode, Some(&prior), SearchMode::Analysis).unwrap();
            assert_eq!(m.values, vec![6., 2.]);
        }
    }

    #[test]
    fn missing_incoming() {
        let g = example();
        let edge = Edge { factor: 2, pos: 0, var: 0 };
        let err = compute_message(&g, edge, &[], MessageMode::Naive, None, SearchMode::Analysis).unwrap_err();
        assert!(matches!(err, crate::Error::Protocol(_)));
        let inc = [from_var(1, 2, vec![1., 2.])];
        let err = compute_message(&g, edge, &inc, MessageMode::Fast, None, SearchMode::Analysis).unwrap_err();
        assert!(matches!(err, crate::Error::Protocol(_)));
    }

    #[test]
    fn three_way_factor() {
        let mut g = FactorGraph::new(&[2, 3, 2], Semiring::MaxSum).unwrap();
        let vars = vec![Variable::new(0, 2), Variable::new(1, 3), Variable::new(2, 2)];
        let vals: Vec<f64> = (0..12).map(|x| ((x * 5) % 7) as f64).collect();
        g.add_factor(Factor::new(vars, vals.clone()).unwrap(), FactorRole::DataIndependent, None).unwrap();
        let prior = presort_shared_prior(&g.factor(0).factor, &[0, 1, 2], Semiring::MaxSum).unwrap();
        let inc = [from_var(0, 0, vec![0.5, -1.0]), from_var(2, 0, vec![2.0, 0.0])];
        let edge = Edge { factor: 0, pos: 1, var: 1 };
        let (naive, _) = compute_message(&g, edge, &inc, MessageMode::Naive, None, SearchMode::Analysis).unwrap();
        let (fast, _) = compute_message(&g, edge, &inc, MessageMode::Fast, Some(&prior), SearchMode::EarlyStop).unwrap();
        assert_eq!(naive.values, fast.values);
        // oracle: enumerate (x0, x2) for each x1
        for (x1, &m) in naive.values.iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            for x0 in 0..2 {
                for x2 in 0..2 {
                    best = best.max(inc[0].values[x0] + inc[1].values[x2] + vals[x0 * 6 + x1 * 2 + x2]);
                }
            }
            assert_eq!(m, best);
        }
    }
}
