use crate::argmax::{sort_order_into, PermRef};
use crate::error::{domain, Result};
use crate::tensor::{project_indices, scope_size, select, Factor, VarId, Variable};
use crate::{Execution, Semiring};

/// A row-major table whose rows are each sorted best-first.
#[derive(Debug, Clone)]
pub struct SortedRows {
    values: Vec<f64>,
    row_len: usize,
    order: Vec<u32>,
    inverse: Vec<u32>,
}

impl SortedRows {
    /// Sorts every `row_len`-sized row of `values`.
    pub fn from_table(values: Vec<f64>, row_len: usize, semiring: Semiring, exec: Execution) -> Result<Self> {
        if row_len == 0 || values.is_empty() || values.len() % row_len != 0 {
            return domain(format!(
                "table of {} values cannot be split into rows of {row_len}",
                values.len()
            ));
        }
        if row_len > u32::MAX as usize {
            return domain("rows too long to index with 32 bits");
        }
        let mut order = vec![0u32; values.len()];
        exec.for_each_chunk(&mut order, row_len, || (), |_, r, out| {
            let row = &values[r * row_len..(r + 1) * row_len];
            sort_order_into(row, semiring, out);
        });
        let mut inverse = vec![0u32; values.len()];
        for (ord, inv) in order.chunks(row_len).zip(inverse.chunks_mut(row_len)) {
            for (rank, &i) in ord.iter().enumerate() {
                inv[i as usize] = rank as u32;
            }
        }
        Ok(Self { values, row_len, order, inverse })
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.row_len
    }

    pub fn row_len(&self) -> usize {
        self.row_len
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.row_len..(r + 1) * self.row_len]
    }

    #[inline]
    pub fn perm(&self, r: usize) -> PermRef<'_> {
        let span = r * self.row_len..(r + 1) * self.row_len;
        PermRef { order: &self.order[span.clone()], inverse: &self.inverse[span] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A factor with its free-variable slices sorted once per conditioning assignment.
///
/// Rows are indexed by the conditioning variables in ascending id order; within a
/// row the free variables are flattened row-major, also in ascending id order.
#[derive(Debug, Clone)]
pub struct SortedFactorView {
    base: Factor,
    conditioning: Vec<Variable>,
    free: Vec<Variable>,
    rows: SortedRows,
}

/// Sorts the slices of `f` over its non-conditioning variables.
pub fn sort_rows(f: &Factor, conditioning: &[VarId], semiring: Semiring) -> Result<SortedFactorView> {
    sort_rows_with(f, conditioning, semiring, Execution::default())
}

pub fn sort_rows_with(
    f: &Factor,
    conditioning: &[VarId],
    semiring: Semiring,
    exec: Execution,
) -> Result<SortedFactorView> {
    let cond = select(f.vars(), conditioning)?;
    let free: Vec<Variable> =
        f.vars().iter().copied().filter(|v| !cond.iter().any(|c| c.id == v.id)).collect();
    if free.is_empty() {
        return domain("conditioning covers the whole scope; nothing to sort");
    }
    let layout: Vec<Variable> = cond.iter().chain(&free).copied().collect();
    let values: Vec<f64> = if layout.as_slice() == f.vars() {
        f.values().to_vec()
    } else {
        project_indices(&layout, f.vars()).into_iter().map(|i| f.values()[i]).collect()
    };
    let rows = SortedRows::from_table(values, scope_size(&free)?, semiring, exec)?;
    Ok(SortedFactorView { base: f.clone(), conditioning: cond, free, rows })
}

impl SortedFactorView {
    pub fn base(&self) -> &Factor {
        &self.base
    }

    pub fn conditioning(&self) -> &[Variable] {
        &self.conditioning
    }

    pub fn free(&self) -> &[Variable] {
        &self.free
    }

    pub fn sorted(&self) -> &SortedRows {
        &self.rows
    }

    pub fn rows(&self) -> usize {
        self.rows.rows()
    }

    /// Row index of the given conditioning states (ascending id order).
    pub fn row_index(&self, states: &[usize]) -> Result<usize> {
        if states.len() != self.conditioning.len() {
            return domain("wrong number of conditioning states");
        }
        let mut r = 0;
        for (v, &s) in self.conditioning.iter().zip(states) {
            if s >= v.card {
                return domain(format!("state {s} out of range for variable {}", v.id));
            }
            r = r * v.card + s;
        }
        Ok(r)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        self.rows.row(r)
    }

    pub fn perm(&self, r: usize) -> PermRef<'_> {
        self.rows.perm(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argmax::sort_desc;

    fn v(id: usize, card: usize) -> Variable {
        Variable::new(id, card)
    }

    #[test]
    fn two_by_two_rows() {
        let f = Factor::new(vec![v(0, 2), v(1, 2)], vec![1., 3., 2., 1.]).unwrap();
        let view = sort_rows(&f, &[0], Semiring::MaxSum).unwrap();
        assert_eq!(view.perm(0).order, &[1, 0]);
        assert_eq!(view.perm(1).order, &[0, 1]);
        // conditioning on the later variable sorts columns
        let view = sort_rows(&f, &[1], Semiring::MaxSum).unwrap();
        assert_eq!(view.row(0), &[1., 2.]);
        assert_eq!(view.perm(0).order, &[1, 0]);
        assert_eq!(view.row(1), &[3., 1.]);
    }

    #[test]
    fn empty_conditioning_is_plain_sort() {
        let f = Factor::new(vec![v(4, 3)], vec![0.2, 0.9, 0.5]).unwrap();
        let view = sort_rows(&f, &[], Semiring::MaxProduct).unwrap();
        assert_eq!(view.rows(), 1);
        assert_eq!(view.perm(0).order, sort_desc(&[0.2, 0.9, 0.5][..], Semiring::MaxProduct).unwrap().order());
    }

    #[test]
    fn multidimensional_rows() {
        let vals: Vec<f64> = vec![5., 1., 7., 3., 0., 2., 9., 4.];
        let f = Factor::new(vec![v(0, 2), v(1, 2), v(2, 2)], vals.clone()).unwrap();
        let view = sort_rows(&f, &[0], Semiring::MaxSum).unwrap();
        assert_eq!(view.rows(), 2);
        for r in 0..2 {
            // flatten then sort oracle
            let slice = &vals[r * 4..(r + 1) * 4];
            assert_eq!(view.row(r), slice);
            assert_eq!(view.perm(r).order, sort_desc(slice, Semiring::MaxSum).unwrap().order());
        }
    }

    #[test]
    fn full_conditioning_rejected() {
        let f = Factor::new(vec![v(0, 2)], vec![1., 2.]).unwrap();
        assert!(sort_rows(&f, &[0], Semiring::MaxSum).is_err());
        assert!(sort_rows(&f, &[3], Semiring::MaxSum).is_err());
    }
}
