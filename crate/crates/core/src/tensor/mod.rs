//! Discrete variables, dense factors and the brute-force reference marginalizer.
//!
//! Factor tables are row-major over their scope, last variable fastest, and a
//! scope is always sorted by ascending variable id so that two factors over the
//! same variables compare structurally. State indices are 0-based.

mod brute;
mod factor;

pub use brute::{map_assignment_brute, max_marginal_brute, DEFAULT_ENUMERATION_CAP};
pub use factor::Factor;

use crate::error::{domain, Result};

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub id: VarId,
    pub card: usize,
}

impl Variable {
    pub fn new(id: VarId, card: usize) -> Self {
        Self { id, card }
    }
}

/// A joint state for an ordered list of variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    vars: Vec<Variable>,
    states: Vec<usize>,
}

impl Assignment {
    pub fn new(vars: Vec<Variable>, states: Vec<usize>) -> Result<Self> {
        if vars.len() != states.len() {
            return domain(format!(
                "assignment has {} variables but {} states",
                vars.len(),
                states.len()
            ));
        }
        for (v, &s) in vars.iter().zip(&states) {
            if s >= v.card {
                return domain(format!(
                    "state {s} out of range for variable {} with cardinality {}",
                    v.id, v.card
                ));
            }
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.id == v.id) {
                return domain(format!("variable {} assigned twice", v.id));
            }
        }
        Ok(Self { vars, states })
    }

    pub fn empty() -> Self {
        Self { vars: Vec::new(), states: Vec::new() }
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn state_of(&self, id: VarId) -> Option<usize> {
        self.vars.iter().position(|v| v.id == id).map(|p| self.states[p])
    }
}

/// Number of joint states of `scope`, or a resource error on overflow.
pub fn scope_size(scope: &[Variable]) -> Result<usize> {
    scope.iter().try_fold(1usize, |acc, v| {
        acc.checked_mul(v.card).ok_or_else(|| {
            crate::Error::Resource(format!("state space of {} variables overflows", scope.len()))
        })
    })
}

/// Row-major strides for `scope`, last variable fastest.
pub fn strides(scope: &[Variable]) -> Vec<usize> {
    let mut out = vec![1usize; scope.len()];
    for i in (0..scope.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * scope[i + 1].card;
    }
    out
}

/// Linearizes an assignment covering exactly `scope`.
pub fn flatten(assignment: &Assignment, scope: &[Variable]) -> Result<usize> {
    if assignment.len() != scope.len() {
        return domain(format!(
            "assignment covers {} variables, scope has {}",
            assignment.len(),
            scope.len()
        ));
    }
    let mut idx = 0usize;
    for v in scope {
        let p = assignment.vars.iter().position(|w| w.id == v.id).ok_or_else(|| {
            crate::Error::Domain(format!("variable {} missing from assignment", v.id))
        })?;
        let s = assignment.states[p];
        if s >= v.card {
            return domain(format!("state {s} out of range for variable {}", v.id));
        }
        idx = idx * v.card + s;
    }
    Ok(idx)
}

/// Inverse of [`flatten`]: the states of `scope` at flat index `index`.
pub fn unflatten(mut index: usize, scope: &[Variable]) -> Result<Vec<usize>> {
    let size = scope_size(scope)?;
    if index >= size {
        return domain(format!("flat index {index} out of range 0..{size}"));
    }
    let mut states = vec![0usize; scope.len()];
    for (i, v) in scope.iter().enumerate().rev() {
        states[i] = index % v.card;
        index /= v.card;
    }
    Ok(states)
}

/// Sorted, de-duplicated union of two canonical scopes.
pub fn union_scope(a: &[Variable], b: &[Variable]) -> Result<Vec<Variable>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.id == y.id => {
                if x.card != y.card {
                    return domain(format!(
                        "variable {} has cardinality {} and {}",
                        x.id, x.card, y.card
                    ));
                }
                out.push(*x);
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.id < y.id => {
                out.push(*x);
                i += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                i += 1;
            }
            (_, Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(out)
}

/// Union of many scopes.
pub fn union_all<'a>(scopes: impl IntoIterator<Item = &'a [Variable]>) -> Result<Vec<Variable>> {
    scopes.into_iter().try_fold(Vec::new(), |acc, s| union_scope(&acc, s))
}

/// Looks up variables by id in `scope`, preserving the requested order after sorting ids.
pub fn select(scope: &[Variable], ids: &[VarId]) -> Result<Vec<Variable>> {
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids.iter()
        .map(|id| {
            scope.iter().copied().find(|v| v.id == *id).ok_or_else(|| {
                crate::Error::Domain(format!("variable {id} is not in scope"))
            })
        })
        .collect()
}

/// Per-variable stride of `sub` expressed over the variables of `scope` (0 when absent).
pub(crate) fn embedded_strides(scope: &[Variable], sub: &[Variable]) -> Vec<usize> {
    let sub_strides = strides(sub);
    scope
        .iter()
        .map(|v| sub.iter().position(|w| w.id == v.id).map_or(0, |p| sub_strides[p]))
        .collect()
}

/// For each cell of `scope` (row-major), the flat index of its restriction to `sub`.
///
/// `sub` may contain variables outside `scope`; those are pinned at state 0.
pub fn project_indices(scope: &[Variable], sub: &[Variable]) -> Vec<usize> {
    let st = embedded_strides(scope, sub);
    let size: usize = scope.iter().map(|v| v.card).product();
    let mut out = Vec::with_capacity(size);
    let mut states = vec![0usize; scope.len()];
    let mut idx = 0usize;
    for _ in 0..size {
        out.push(idx);
        for k in (0..scope.len()).rev() {
            states[k] += 1;
            idx += st[k];
            if states[k] < scope[k].card {
                break;
            }
            idx -= st[k] * scope[k].card;
            states[k] = 0;
        }
    }
    out
}

/// Calls `f(joint_index, sub_indices)` for every cell of `scope` in row-major
/// order, where `sub_indices[s]` is the flat index of the cell restricted to `subs[s]`.
pub(crate) fn for_each_joint<F>(scope: &[Variable], subs: &[&[Variable]], mut f: F)
where
    F: FnMut(usize, &[usize]),
{
    let st: Vec<Vec<usize>> = subs.iter().map(|s| embedded_strides(scope, s)).collect();
    let size: usize = scope.iter().map(|v| v.card).product();
    let mut idx = vec![0usize; subs.len()];
    let mut states = vec![0usize; scope.len()];
    for joint in 0..size {
        f(joint, &idx);
        for k in (0..scope.len()).rev() {
            states[k] += 1;
            for (s, i) in idx.iter_mut().enumerate() {
                *i += st[s][k];
            }
            if states[k] < scope[k].card {
                break;
            }
            for (s, i) in idx.iter_mut().enumerate() {
                *i -= st[s][k] * scope[k].card;
            }
            states[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vars(cards: &[usize]) -> Vec<Variable> {
        cards.iter().enumerate().map(|(i, &c)| Variable::new(i, c)).collect()
    }

    #[test]
    fn flatten_examples() {
        let scope = vars(&[2, 3]);
        let at = |a, b| Assignment::new(scope.clone(), vec![a, b]).unwrap();
        assert_eq!(flatten(&at(0, 0), &scope).unwrap(), 0);
        assert_eq!(flatten(&at(1, 0), &scope).unwrap(), 3);
        assert_eq!(flatten(&at(1, 2), &scope).unwrap(), 5);
    }

    #[test]
    fn flatten_rejects_out_of_range() {
        let scope = vars(&[2, 3]);
        assert!(Assignment::new(scope.clone(), vec![2, 0]).is_err());
        // Assignment built against a looser cardinality still fails against the scope.
        let loose = Assignment::new(vec![Variable::new(0, 5), Variable::new(1, 3)], vec![4, 0]).unwrap();
        assert!(flatten(&loose, &scope).is_err());
        assert!(unflatten(6, &scope).is_err());
    }

    #[test]
    fn flatten_order_independent_of_assignment_order() {
        let scope = vars(&[2, 3]);
        let a = Assignment::new(vec![scope[1], scope[0]], vec![2, 1]).unwrap();
        assert_eq!(flatten(&a, &scope).unwrap(), 5);
    }

    #[test]
    fn union_detects_card_mismatch() {
        let a = vec![Variable::new(0, 2)];
        let b = vec![Variable::new(0, 3)];
        assert!(union_scope(&a, &b).is_err());
        let c = vec![Variable::new(1, 3), Variable::new(4, 2)];
        let u = union_scope(&[Variable::new(0, 2), Variable::new(4, 2)], &c).unwrap();
        assert_eq!(u.iter().map(|v| v.id).collect::<Vec<_>>(), vec![0, 1, 4]);
    }

    #[test]
    fn projection_matches_unflatten() {
        let scope = vars(&[2, 3, 2]);
        let sub = vec![scope[0], scope[2]];
        let proj = project_indices(&scope, &sub);
        for (j, &p) in proj.iter().enumerate() {
            let s = unflatten(j, &scope).unwrap();
            assert_eq!(p, s[0] * 2 + s[2]);
        }
    }

    proptest! {
        #[test]
        fn flatten_roundtrip(cards in prop::collection::vec(1usize..=6, 0..=5)) {
            let scope = vars(&cards);
            for idx in 0..scope_size(&scope).unwrap() {
                let states = unflatten(idx, &scope).unwrap();
                let a = Assignment::new(scope.clone(), states).unwrap();
                prop_assert_eq!(flatten(&a, &scope).unwrap(), idx);
            }
        }
    }
}
