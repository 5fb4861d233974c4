use std::sync::Arc;

use super::{
    for_each_joint, project_indices, scope_size, select, union_scope,
    Assignment, VarId, Variable,
};
use crate::error::{domain, Result};
use crate::Semiring;

/// A dense table over a canonical (id-sorted) scope.
///
/// The value buffer is reference counted: clones and [`Factor::with_scope`]
/// share storage, so a homogeneous prior attached to thousands of edges
/// occupies memory once.
#[derive(Debug, Clone)]
pub struct Factor {
    vars: Vec<Variable>,
    values: Arc<[f64]>,
}

impl PartialEq for Factor {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.values[..] == other.values[..]
    }
}

impl Factor {
    /// Builds a factor whose `vars` are already in ascending id order.
    pub fn new(vars: Vec<Variable>, values: impl Into<Arc<[f64]>>) -> Result<Self> {
        let values = values.into();
        check_scope(&vars)?;
        if vars.windows(2).any(|w| w[0].id >= w[1].id) {
            return domain("factor scope must be sorted by strictly ascending variable id");
        }
        let size = scope_size(&vars)?;
        if values.len() != size {
            return domain(format!(
                "factor over {} variables needs {size} values, got {}",
                vars.len(),
                values.len()
            ));
        }
        Ok(Self { vars, values })
    }

    /// Builds a factor from a table laid out over `vars` in the given order,
    /// permuting it into canonical order.
    pub fn from_scope_order(vars: Vec<Variable>, values: Vec<f64>) -> Result<Self> {
        check_scope(&vars)?;
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.id == v.id) {
                return domain(format!("variable {} repeated in factor scope", v.id));
            }
        }
        let size = scope_size(&vars)?;
        if values.len() != size {
            return domain(format!("factor needs {size} values, got {}", values.len()));
        }
        let mut sorted = vars.clone();
        sorted.sort_by_key(|v| v.id);
        if sorted == vars {
            return Self::new(vars, values);
        }
        // index into the given layout for every canonical cell
        let src = project_indices(&sorted, &vars);
        let permuted: Vec<f64> = src.iter().map(|&i| values[i]).collect();
        Self::new(sorted, permuted)
    }

    pub fn constant(vars: Vec<Variable>, value: f64) -> Result<Self> {
        let size = scope_size(&vars)?;
        Self::new(vars, vec![value; size])
    }

    pub fn scalar(value: f64) -> Self {
        Self { vars: Vec::new(), values: Arc::from(vec![value]) }
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var_ids(&self) -> Vec<VarId> {
        self.vars.iter().map(|v| v.id).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shared_values(&self) -> &Arc<[f64]> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn contains(&self, id: VarId) -> bool {
        self.vars.iter().any(|v| v.id == id)
    }

    pub fn position(&self, id: VarId) -> Option<usize> {
        self.vars.iter().position(|v| v.id == id)
    }

    /// Same table, relabelled onto a new scope with identical cardinalities.
    pub fn with_scope(&self, vars: Vec<Variable>) -> Result<Self> {
        if vars.len() != self.vars.len() || vars.iter().zip(&self.vars).any(|(a, b)| a.card != b.card)
        {
            return domain("relabelled scope must keep the cardinalities");
        }
        Self::new(vars, Arc::clone(&self.values))
    }

    /// Value at the given states (one per scope variable, scope order).
    pub fn at(&self, states: &[usize]) -> f64 {
        let mut idx = 0usize;
        for (v, &s) in self.vars.iter().zip(states) {
            idx = idx * v.card + s;
        }
        self.values[idx]
    }

    /// Value at the restriction of `assignment` to this scope.
    pub fn value_of(&self, assignment: &Assignment) -> Result<f64> {
        let mut idx = 0usize;
        for v in &self.vars {
            let s = assignment.state_of(v.id).ok_or_else(|| {
                crate::Error::Domain(format!("assignment does not cover variable {}", v.id))
            })?;
            if s >= v.card {
                return domain(format!("state {s} out of range for variable {}", v.id));
            }
            idx = idx * v.card + s;
        }
        Ok(self.values[idx])
    }

    /// Fixes the variables of `partial`, returning a factor over the rest.
    pub fn restrict(&self, partial: &Assignment) -> Result<Self> {
        let mut base = 0usize;
        let strides = super::strides(&self.vars);
        for (v, &s) in partial.vars().iter().zip(partial.states()) {
            let p = self.position(v.id).ok_or_else(|| {
                crate::Error::Domain(format!("variable {} is not in the factor scope", v.id))
            })?;
            if s >= self.vars[p].card {
                return domain(format!("state {s} out of range for variable {}", v.id));
            }
            base += s * strides[p];
        }
        let free: Vec<Variable> =
            self.vars.iter().copied().filter(|v| partial.state_of(v.id).is_none()).collect();
        let offsets = project_indices(&free, &self.vars);
        let values: Vec<f64> = offsets.iter().map(|&o| self.values[base + o]).collect();
        Self::new(free, values)
    }

    /// Pointwise semiring product over the union scope.
    pub fn combine(&self, other: &Factor, semiring: Semiring) -> Result<Self> {
        let scope = union_scope(&self.vars, &other.vars)?;
        let mut out = Vec::with_capacity(scope_size(&scope)?);
        for_each_joint(&scope, &[&self.vars, &other.vars], |_, idx| {
            out.push(semiring.combine(self.values[idx[0]], other.values[idx[1]]));
        });
        Self::new(scope, out)
    }

    /// Broadcasts this factor onto a superset scope.
    pub fn expand(&self, scope: &[Variable]) -> Result<Self> {
        let target = union_scope(scope, &self.vars)?;
        if target.len() != scope.len() {
            return domain("expansion scope must contain the factor scope");
        }
        let map = project_indices(&target, &self.vars);
        Self::new(target, map.iter().map(|&i| self.values[i]).collect::<Vec<_>>())
    }

    /// Maximizes out every variable not in `keep`.
    pub fn max_marginal(&self, keep: &[VarId], semiring: Semiring) -> Result<Self> {
        let kept = select(&self.vars, keep)?;
        let size = scope_size(&kept)?;
        let mut out = vec![semiring.zero(); size];
        let map = project_indices(&self.vars, &kept);
        for (cell, &m) in map.iter().enumerate() {
            let v = self.values[cell];
            if semiring.is_better(v, out[m]) {
                out[m] = v;
            }
        }
        Self::new(kept, out)
    }

    /// Applies `f` to every value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.vars.clone(), self.values.iter().map(|&v| f(v)).collect::<Vec<_>>())
    }
}

fn check_scope(vars: &[Variable]) -> Result<()> {
    if let Some(v) = vars.iter().find(|v| v.card == 0) {
        return domain(format!("variable {} has cardinality 0", v.id));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{flatten, unflatten};
    use proptest::prelude::*;

    fn v(id: usize, card: usize) -> Variable {
        Variable::new(id, card)
    }

    #[test]
    fn restrict_row_slice() {
        let f = Factor::new(vec![v(0, 2), v(1, 2)], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let a = Assignment::new(vec![v(0, 2)], vec![1]).unwrap();
        let r = f.restrict(&a).unwrap();
        assert_eq!(r.vars(), &[v(1, 2)]);
        assert_eq!(r.values(), &[3.0, 4.0]);
        assert_eq!(f.restrict(&Assignment::empty()).unwrap(), f);
    }

    #[test]
    fn restrict_middle_variable() {
        // oracle: enumerate the 8 cells and keep those with j = 1
        let scope = vec![v(0, 2), v(1, 2), v(2, 2)];
        let vals: Vec<f64> = (0..8).map(|x| x as f64).collect();
        let expected: Vec<f64> = (0..8)
            .filter(|&i| unflatten(i, &scope).unwrap()[1] == 1)
            .map(|i| vals[i])
            .collect();
        assert_eq!(expected, vec![2.0, 3.0, 6.0, 7.0]);
        let f = Factor::new(scope, vals).unwrap();
        let r = f.restrict(&Assignment::new(vec![v(1, 2)], vec![1]).unwrap()).unwrap();
        assert_eq!(r.values(), &expected[..]);
    }

    #[test]
    fn restrict_unknown_variable() {
        let f = Factor::new(vec![v(0, 2)], vec![1.0, 2.0]).unwrap();
        assert!(f.restrict(&Assignment::new(vec![v(3, 2)], vec![0]).unwrap()).is_err());
    }

    #[test]
    fn combine_outer_product() {
        let f = Factor::new(vec![v(0, 2)], vec![1.0, 2.0]).unwrap();
        let g = Factor::new(vec![v(1, 2)], vec![3.0, 4.0]).unwrap();
        let h = f.combine(&g, Semiring::MaxProduct).unwrap();
        assert_eq!(h.values(), &[3.0, 4.0, 6.0, 8.0]);
        let ones = Factor::constant(f.vars().to_vec(), 1.0).unwrap();
        assert_eq!(f.combine(&ones, Semiring::MaxProduct).unwrap(), f);
    }

    #[test]
    fn combine_shared_variable() {
        let f = Factor::new(vec![v(0, 2), v(1, 2)], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = Factor::new(vec![v(1, 2)], vec![10.0, 100.0]).unwrap();
        // cellwise oracle
        let mut expected = vec![];
        for i in 0..2 {
            for j in 0..2 {
                expected.push(f.at(&[i, j]) * g.at(&[j]));
            }
        }
        assert_eq!(expected, vec![10.0, 200.0, 30.0, 400.0]);
        assert_eq!(f.combine(&g, Semiring::MaxProduct).unwrap().values(), &expected[..]);
    }

    #[test]
    fn combine_card_mismatch() {
        let f = Factor::new(vec![v(0, 2)], vec![1.0, 2.0]).unwrap();
        let g = Factor::new(vec![v(0, 3)], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(f.combine(&g, Semiring::MaxSum).is_err());
    }

    #[test]
    fn from_scope_order_transposes() {
        // table laid out over (x1, x0)
        let f = Factor::from_scope_order(vec![v(1, 2), v(0, 3)], vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(f.var_ids(), vec![0, 1]);
        assert_eq!(f.at(&[2, 1]), 6.0);
        assert_eq!(f.at(&[0, 1]), 4.0);
    }

    #[test]
    fn wrong_size_or_order_rejected() {
        assert!(Factor::new(vec![v(0, 2)], vec![1.0]).is_err());
        assert!(Factor::new(vec![v(1, 2), v(0, 2)], vec![0.0; 4]).is_err());
        assert!(Factor::new(vec![v(0, 0)], Vec::<f64>::new()).is_err());
    }

    fn arb_factor(ids: Vec<usize>) -> impl Strategy<Value = Factor> {
        let n = 1usize << ids.len();
        prop::collection::vec(-20i32..20, n).prop_map(move |vals| {
            Factor::new(ids.iter().map(|&i| v(i, 2)).collect(), vals.into_iter().map(f64::from).collect::<Vec<_>>())
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn combine_commutative_associative(
            f in arb_factor(vec![0, 1]),
            g in arb_factor(vec![1, 2]),
            h in arb_factor(vec![0, 2, 3]),
        ) {
            let s = Semiring::MaxSum;
            prop_assert_eq!(f.combine(&g, s).unwrap(), g.combine(&f, s).unwrap());
            let left = f.combine(&g, s).unwrap().combine(&h, s).unwrap();
            let right = f.combine(&g.combine(&h, s).unwrap(), s).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn restrict_commutes_with_combine(
            f in arb_factor(vec![0, 1]),
            g in arb_factor(vec![1, 2]),
            s0 in 0usize..2,
        ) {
            // variable 0 is not shared, so restricting before or after combining agrees
            let a = Assignment::new(vec![v(0, 2)], vec![s0]).unwrap();
            let s = Semiring::MaxSum;
            let after = f.combine(&g, s).unwrap().restrict(&a).unwrap();
            let before = f.restrict(&a).unwrap().combine(&g, s).unwrap();
            prop_assert_eq!(after, before);
        }

        #[test]
        fn value_of_matches_flatten(f in arb_factor(vec![2, 5, 7]), idx in 0usize..8) {
            let states = unflatten(idx, f.vars()).unwrap();
            let a = Assignment::new(f.vars().to_vec(), states).unwrap();
            prop_assert_eq!(flatten(&a, f.vars()).unwrap(), idx);
            prop_assert_eq!(f.value_of(&a).unwrap(), f.values()[idx]);
        }
    }
}
