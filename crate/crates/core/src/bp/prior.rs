use std::sync::Arc;
use std::time::Instant;

use crate::argmax::{sort_order_into, ListAccess, PermRef};
use crate::error::{domain, Result};
use crate::tensor::{project_indices, Factor, Variable};
use crate::{Execution, Semiring};

/// Row `q` of a factor conditioned on one of its variables: the slice over the
/// remaining variables (ascending id, row-major), read in place.
#[derive(Debug, Clone, Copy)]
pub struct FactorRow<'a> {
    data: &'a [f64],
    base: usize,
    offsets: &'a [usize],
}

impl ListAccess for FactorRow<'_> {
    #[inline]
    fn len(&self) -> usize {
        self.offsets.len()
    }
    #[inline]
    fn get(&self, i: usize) -> f64 {
        self.data[self.base + self.offsets[i]]
    }
}

/// How to read the rows of a factor conditioned on scope position `pos`.
#[derive(Debug, Clone)]
pub(crate) struct RowLayout {
    stride: usize,
    offsets: Vec<usize>,
}

impl RowLayout {
    pub(crate) fn new(vars: &[Variable], pos: usize) -> Self {
        let stride = vars[pos + 1..].iter().map(|v| v.card).product();
        let free: Vec<Variable> = vars.iter().enumerate().filter(|&(p, _)| p != pos).map(|(_, v)| *v).collect();
        Self { stride, offsets: project_indices(&free, vars) }
    }

    #[inline]
    pub(crate) fn row<'a>(&'a self, data: &'a [f64], q: usize) -> FactorRow<'a> {
        FactorRow { data, base: q * self.stride, offsets: &self.offsets }
    }

    pub(crate) fn row_len(&self) -> usize {
        self.offsets.len()
    }
}

#[derive(Debug, Clone)]
struct DirectionSort {
    layout: RowLayout,
    rows: usize,
    order: Vec<u32>,
    inverse: Vec<u32>,
}

/// Row permutations of a data-independent table, computed once and shared by
/// every factor whose table has the same order statistics.
#[derive(Debug, Clone)]
pub struct PresortedPrior {
    vars: Vec<Variable>,
    values: Arc<[f64]>,
    directions: Vec<Option<DirectionSort>>,
    sorts: usize,
    built_at: Instant,
}

/// Sorts the rows of `f` conditioned on each listed scope position.
pub fn presort_shared_prior(f: &Factor, directions: &[usize], semiring: Semiring) -> Result<PresortedPrior> {
    presort_shared_prior_with(f, directions, semiring, Execution::default())
}

pub fn presort_shared_prior_with(
    f: &Factor,
    directions: &[usize],
    semiring: Semiring,
    exec: Execution,
) -> Result<PresortedPrior> {
    if f.arity() < 2 {
        return domain("only factors over at least two variables have rows to sort");
    }
    let mut slots: Vec<Option<DirectionSort>> = vec![None; f.arity()];
    let mut sorts = 0;
    for &pos in directions {
        if pos >= f.arity() {
            return domain(format!("direction {pos} outside a scope of {}", f.arity()));
        }
        if slots[pos].is_some() {
            continue;
        }
        let layout = RowLayout::new(f.vars(), pos);
        let (rows, len) = (f.vars()[pos].card, layout.row_len());
        let mut order = vec![0u32; rows * len];
        exec.for_each_chunk(&mut order, len, || (), |_, q, out| {
            sort_order_into(&layout.row(f.values(), q), semiring, out);
        });
        let mut inverse = vec![0u32; rows * len];
        for (o, inv) in order.chunks(len).zip(inverse.chunks_mut(len)) {
            for (r, &i) in o.iter().enumerate() {
                inv[i as usize] = r as u32;
            }
        }
        slots[pos] = Some(DirectionSort { layout, rows, order, inverse });
        sorts += 1;
    }
    Ok(PresortedPrior {
        vars: f.vars().to_vec(),
        values: Arc::clone(f.shared_values()),
        directions: slots,
        sorts,
        built_at: Instant::now(),
    })
}

impl PresortedPrior {
    /// Number of directions sorted when this prior was built.
    pub fn sorts(&self) -> usize {
        self.sorts
    }

    pub fn built_at(&self) -> Instant {
        self.built_at
    }

    pub fn has_direction(&self, pos: usize) -> bool {
        self.directions.get(pos).is_some_and(|d| d.is_some())
    }

    fn dir(&self, pos: usize) -> Result<&DirectionSort> {
        self.directions
            .get(pos)
            .and_then(|d| d.as_ref())
            .ok_or_else(|| crate::Error::Protocol(format!("prior was not sorted for direction {pos}")))
    }

    /// Permutation sorting row `q` in direction `pos`.
    pub fn perm(&self, pos: usize, q: usize) -> Result<PermRef<'_>> {
        let d = self.dir(pos)?;
        if q >= d.rows {
            return domain(format!("row {q} out of range"));
        }
        let len = d.layout.row_len();
        let span = q * len..(q + 1) * len;
        Ok(PermRef { order: &d.order[span.clone()], inverse: &d.inverse[span] })
    }

    pub(crate) fn layout(&self, pos: usize) -> Result<&RowLayout> {
        Ok(&self.dir(pos)?.layout)
    }

    /// Checks that this prior's permutations also sort `member`'s rows.
    ///
    /// Members sharing the sorted table's buffer pass without a scan.
    pub fn validate_member(&self, member: &Factor, semiring: Semiring) -> Result<()> {
        let shape = |vs: &[Variable]| vs.iter().map(|v| v.card).collect::<Vec<_>>();
        if shape(member.vars()) != shape(&self.vars) {
            return domain("class member has a different shape");
        }
        if Arc::ptr_eq(member.shared_values(), &self.values) {
            return Ok(());
        }
        for (pos, d) in self.directions.iter().enumerate() {
            let Some(d) = d else { continue };
            let len = d.layout.row_len();
            for q in 0..d.rows {
                let row = d.layout.row(member.values(), q);
                let order = &d.order[q * len..(q + 1) * len];
                for w in order.windows(2) {
                    if semiring.cmp_best_first(row.get(w[0] as usize), row.get(w[1] as usize)).is_gt() {
                        return domain(format!(
                            "class member's row {q} (direction {pos}) is not ordered like the shared prior"
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(values: Vec<f64>) -> Factor {
        Factor::new(vec![Variable::new(0, 3), Variable::new(1, 3)], values).unwrap()
    }

    #[test]
    fn rows_and_columns() {
        let f = pair(vec![1., 5., 3., 9., 2., 4., 0., 8., 7.]);
        let p = presort_shared_prior(&f, &[0, 1], Semiring::MaxProduct).unwrap();
        assert_eq!(p.sorts(), 2);
        assert_eq!(p.perm(0, 0).unwrap().order, &[1, 2, 0]);
        assert_eq!(p.perm(0, 2).unwrap().order, &[1, 2, 0]);
        // column 0 is [1, 9, 0]
        assert_eq!(p.perm(1, 0).unwrap().order, &[1, 0, 2]);
        let row = p.layout(1).unwrap().row(f.values(), 2);
        assert_eq!((row.get(0), row.get(1), row.get(2)), (3., 4., 7.));
    }

    #[test]
    fn scaling_keeps_permutations() {
        let vals = vec![1., 5., 3., 9., 2., 4., 0., 8., 7.];
        let f = pair(vals.clone());
        let g = pair(vals.iter().map(|v| v * 2.0).collect());
        let p = presort_shared_prior(&f, &[0, 1], Semiring::MaxProduct).unwrap();
        let q = presort_shared_prior(&g, &[0, 1], Semiring::MaxProduct).unwrap();
        for pos in 0..2 {
            for r in 0..3 {
                assert_eq!(p.perm(pos, r).unwrap().order, q.perm(pos, r).unwrap().order);
            }
        }
        p.validate_member(&g, Semiring::MaxProduct).unwrap();
        let other = pair(vals.iter().rev().copied().collect());
        assert!(p.validate_member(&other, Semiring::MaxProduct).is_err());
    }

    #[test]
    fn missing_direction_is_protocol_error() {
        let f = pair(vec![0.; 9]);
        let p = presort_shared_prior(&f, &[0], Semiring::MaxSum).unwrap();
        assert!(matches!(p.perm(1, 0), Err(crate::Error::Protocol(_))));
        assert!(presort_shared_prior(&f, &[2], Semiring::MaxSum).is_err());
    }
}
