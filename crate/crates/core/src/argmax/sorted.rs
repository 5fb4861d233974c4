use std::cmp::Ordering;

use super::ListAccess;
use crate::error::{domain, Result};
use crate::Semiring;

/// Best-first order of a list together with its inverse.
///
/// Ties are ordered by ascending index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedPermutation {
    order: Vec<u32>,
    inverse: Vec<u32>,
}

/// Borrowed order/inverse pair, e.g. one row of a sorted table.
#[derive(Debug, Clone, Copy)]
pub struct PermRef<'a> {
    pub order: &'a [u32],
    pub inverse: &'a [u32],
}

#[inline]
fn key_cmp<L: ListAccess + ?Sized>(values: &L, semiring: Semiring, a: u32, b: u32) -> Ordering {
    semiring
        .cmp_best_first(values.get(a as usize), values.get(b as usize))
        .then(a.cmp(&b))
}

/// Writes the best-first order of `values` into `order` (which must have the same length).
pub fn sort_order_into<L: ListAccess + ?Sized>(values: &L, semiring: Semiring, order: &mut [u32]) {
    debug_assert_eq!(order.len(), values.len());
    for (r, o) in order.iter_mut().enumerate() {
        *o = r as u32;
    }
    order.sort_unstable_by(|&a, &b| key_cmp(values, semiring, a, b));
}

/// Sorts `values` best-first under `semiring` ("descending" for the max semirings).
pub fn sort_desc<L: ListAccess + ?Sized>(values: &L, semiring: Semiring) -> Result<SortedPermutation> {
    SortedPermutation::sort(values, semiring)
}

pub(crate) fn invert_into(order: &[u32], inverse: &mut [u32]) {
    for (r, &i) in order.iter().enumerate() {
        inverse[i as usize] = r as u32;
    }
}

impl SortedPermutation {
    pub fn sort<L: ListAccess + ?Sized>(values: &L, semiring: Semiring) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return domain("cannot sort an empty list");
        }
        if n > u32::MAX as usize {
            return domain("list too long to index with 32 bits");
        }
        let mut order = vec![0u32; n];
        sort_order_into(values, semiring, &mut order);
        let mut inverse = vec![0u32; n];
        invert_into(&order, &mut inverse);
        Ok(Self { order, inverse })
    }

    /// Builds from an explicit order, checking it is a permutation.
    pub fn from_order(order: Vec<u32>) -> Result<Self> {
        let n = order.len();
        let mut inverse = vec![u32::MAX; n];
        for (r, &i) in order.iter().enumerate() {
            let slot = inverse.get_mut(i as usize).ok_or_else(|| {
                crate::Error::Domain(format!("index {i} out of range for permutation of {n}"))
            })?;
            if *slot != u32::MAX {
                return domain(format!("index {i} repeated in permutation"));
            }
            *slot = r as u32;
        }
        Ok(Self { order, inverse })
    }

    /// Re-sorts after `values` changed, starting from the current order.
    ///
    /// Insertion sort, so nearly unchanged orderings cost close to linear time.
    /// Returns the number of element moves. The result is identical to a fresh
    /// [`SortedPermutation::sort`].
    pub fn resort<L: ListAccess + ?Sized>(&mut self, values: &L, semiring: Semiring) -> Result<usize> {
        if values.len() != self.order.len() {
            return domain("re-sorted list changed length");
        }
        let moves = insertion_sort(&mut self.order, values, semiring);
        invert_into(&self.order, &mut self.inverse);
        Ok(moves)
    }

    /// Like [`SortedPermutation::resort`], but falls back to a full sort once
    /// the insertion pass exceeds `max_moves`. Returns whether the insertion
    /// pass sufficed.
    pub fn resort_within<L: ListAccess + ?Sized>(
        &mut self,
        values: &L,
        semiring: Semiring,
        max_moves: usize,
    ) -> Result<bool> {
        if values.len() != self.order.len() {
            return domain("re-sorted list changed length");
        }
        let cheap = insertion_sort_capped(&mut self.order, values, semiring, max_moves).is_some();
        if !cheap {
            sort_order_into(values, semiring, &mut self.order);
        }
        invert_into(&self.order, &mut self.inverse);
        Ok(cheap)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn inverse(&self) -> &[u32] {
        &self.inverse
    }

    pub fn as_ref(&self) -> PermRef<'_> {
        PermRef { order: &self.order, inverse: &self.inverse }
    }
}

fn insertion_sort<L: ListAccess + ?Sized>(order: &mut [u32], values: &L, semiring: Semiring) -> usize {
    insertion_sort_capped(order, values, semiring, usize::MAX).expect("uncapped")
}

/// Insertion sort that gives up (leaving `order` a valid but unsorted
/// permutation) after `cap` moves.
fn insertion_sort_capped<L: ListAccess + ?Sized>(
    order: &mut [u32],
    values: &L,
    semiring: Semiring,
    cap: usize,
) -> Option<usize> {
    let mut moves = 0usize;
    for i in 1..order.len() {
        let x = order[i];
        let mut j = i;
        while j > 0 && key_cmp(values, semiring, order[j - 1], x) == Ordering::Greater {
            order[j] = order[j - 1];
            j -= 1;
            moves += 1;
        }
        order[j] = x;
        if moves > cap {
            return None;
        }
    }
    Some(moves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn order(v: &[f64], s: Semiring) -> Vec<u32> {
        sort_desc(v, s).unwrap().order().to_vec()
    }

    #[test]
    fn examples() {
        assert_eq!(order(&[0.2, 0.9, 0.5], Semiring::MaxProduct), vec![1, 2, 0]);
        assert_eq!(order(&[7., 7., 7.], Semiring::MaxSum), vec![0, 1, 2]);
        assert_eq!(order(&[5., 4., 1.], Semiring::MaxSum), vec![0, 1, 2]);
        assert_eq!(order(&[5., 4., 1.], Semiring::MinSum), vec![2, 1, 0]);
        assert!(sort_desc(&[][..], Semiring::MaxSum).is_err());
    }

    #[test]
    fn from_order_rejects_repeats() {
        assert!(SortedPermutation::from_order(vec![0, 0]).is_err());
        assert!(SortedPermutation::from_order(vec![0, 2]).is_err());
        assert_eq!(SortedPermutation::from_order(vec![1, 0]).unwrap().inverse(), &[1, 0]);
    }

    proptest! {
        #[test]
        fn invariants(v in prop::collection::vec(0i32..10, 1..60)) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            let p = sort_desc(&v[..], Semiring::MaxSum).unwrap();
            for (r, &i) in p.order().iter().enumerate() {
                prop_assert_eq!(p.inverse()[i as usize] as usize, r);
            }
            for w in p.order().windows(2) {
                let (a, b) = (v[w[0] as usize], v[w[1] as usize]);
                prop_assert!(a > b || (a == b && w[0] < w[1]));
            }
        }

        #[test]
        fn resort_matches_fresh_sort(
            v in prop::collection::vec(-50.0f64..50.0, 1..80),
            noise in prop::collection::vec(-1.0f64..1.0, 80),
        ) {
            let mut p = sort_desc(&v[..], Semiring::MaxSum).unwrap();
            let w: Vec<f64> = v.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let mut q = p.clone();
            p.resort(&w[..], Semiring::MaxSum).unwrap();
            prop_assert_eq!(&p, &sort_desc(&w[..], Semiring::MaxSum).unwrap());
            q.resort_within(&w[..], Semiring::MaxSum, 5).unwrap();
            prop_assert_eq!(q, p);
        }
    }
}
