//! Argmax of elementwise products over lists whose sorting permutations are known.
//!
//! The searches walk the lists from their best entries downwards and stop as
//! soon as some index has been seen within the top `start + 1` positions of
//! every list: no unseen index can then beat it. For random order statistics
//! this happens after `O(√N)` steps for two lists and `O(N^((K-1)/K))` for `K`.

mod analysis;
mod klist;
mod pair;
mod sorted;

pub use analysis::{expected_steps, expected_steps_enumerate, prob_exceed, step_bound};
pub use klist::{fast_argmax_k, fast_argmax_k_trusted, ReadScratch};
pub use pair::{fast_argmax_pair, fast_argmax_pair_trusted};
pub use sorted::{sort_desc, sort_order_into, PermRef, SortedPermutation};

use crate::error::{domain, Result};
use crate::Semiring;

/// When the search loop may terminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SearchMode {
    /// Stop once an index has been seen in the leading square of both lists.
    /// `steps` is then exactly the quantity analysed by [`expected_steps`].
    Analysis,
    /// Also checks the second list's end marker. Terminates at the same step
    /// as [`SearchMode::Analysis`]; kept so the two can be compared.
    Symmetric,
    /// Additionally stops when the product of the next values in sorted order
    /// cannot beat the incumbent. Same answer, never more steps.
    #[default]
    EarlyStop,
}

impl std::str::FromStr for SearchMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analysis" => Ok(SearchMode::Analysis),
            "symmetric" => Ok(SearchMode::Symmetric),
            "early-stop" => Ok(SearchMode::EarlyStop),
            other => domain(format!("unknown search mode '{other}'")),
        }
    }
}

impl std::fmt::Display for SearchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchMode::Analysis => "analysis",
            SearchMode::Symmetric => "symmetric",
            SearchMode::EarlyStop => "early-stop",
        })
    }
}

/// Result of one search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgmaxOutcome {
    /// Index attaining the best combined value.
    pub best: usize,
    /// The combined value at `best`.
    pub value: f64,
    /// Distinct indices whose values were combined.
    pub probes: usize,
    /// Sorted positions visited (the final `start` counter, 1-based).
    pub steps: usize,
}

/// Random access to a list of values, so matrix columns and table slices can
/// be searched without copying.
pub trait ListAccess {
    fn len(&self) -> usize;
    fn get(&self, i: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ListAccess for [f64] {
    #[inline]
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }
    #[inline]
    fn get(&self, i: usize) -> f64 {
        self[i]
    }
}

impl ListAccess for &[f64] {
    #[inline]
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }
    #[inline]
    fn get(&self, i: usize) -> f64 {
        self[i]
    }
}

impl ListAccess for Vec<f64> {
    #[inline]
    fn len(&self) -> usize {
        Vec::len(self)
    }
    #[inline]
    fn get(&self, i: usize) -> f64 {
        self[i]
    }
}

/// `len` values of `data` starting at `offset`, `stride` apart.
#[derive(Debug, Clone, Copy)]
pub struct Strided<'a> {
    data: &'a [f64],
    offset: usize,
    stride: usize,
    len: usize,
}

impl<'a> Strided<'a> {
    pub fn new(data: &'a [f64], offset: usize, stride: usize, len: usize) -> Result<Self> {
        if len > 0 && offset + (len - 1) * stride >= data.len() {
            return domain("strided view runs past the end of its buffer");
        }
        Ok(Self { data, offset, stride, len })
    }
}

impl ListAccess for Strided<'_> {
    #[inline]
    fn len(&self) -> usize {
        self.len
    }
    #[inline]
    fn get(&self, i: usize) -> f64 {
        self.data[self.offset + i * self.stride]
    }
}

/// Plain scan, for reference and for lists too short to be worth sorting.
pub fn argmax_naive<A: ListAccess + ?Sized, B: ListAccess + ?Sized>(
    a: &A,
    b: &B,
    semiring: Semiring,
) -> Result<ArgmaxOutcome> {
    if a.len() != b.len() {
        return domain(format!("list lengths differ: {} vs {}", a.len(), b.len()));
    }
    if a.is_empty() {
        return domain("cannot take the argmax of empty lists");
    }
    let mut best = 0;
    let mut value = semiring.combine(a.get(0), b.get(0));
    for i in 1..a.len() {
        let v = semiring.combine(a.get(i), b.get(i));
        if semiring.is_better(v, value) {
            best = i;
            value = v;
        }
    }
    Ok(ArgmaxOutcome { best, value, probes: a.len(), steps: a.len() })
}

/// Replace the incumbent when strictly better, or equal with a smaller index.
#[inline]
pub(crate) fn improves(semiring: Semiring, v: f64, i: usize, value: f64, best: usize) -> bool {
    semiring.is_better(v, value) || (v == value && i < best)
}

pub(crate) fn check_sorted<L: ListAccess + ?Sized>(
    list: &L,
    perm: PermRef<'_>,
    semiring: Semiring,
) -> Result<()> {
    let n = list.len();
    if perm.order.len() != n || perm.inverse.len() != n {
        return domain(format!("permutation of length {} for a list of length {n}", perm.order.len()));
    }
    for (r, &i) in perm.order.iter().enumerate() {
        let i = i as usize;
        if i >= n || perm.inverse[i] as usize != r {
            return domain("permutation and inverse are inconsistent");
        }
    }
    for w in perm.order.windows(2) {
        let (x, y) = (list.get(w[0] as usize), list.get(w[1] as usize));
        if semiring.cmp_best_first(x, y) == std::cmp::Ordering::Greater {
            return domain("permutation does not sort the list best-first");
        }
    }
    Ok(())
}
