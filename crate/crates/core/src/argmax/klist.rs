use super::{check_sorted, improves, ArgmaxOutcome, ListAccess, PermRef, SearchMode};
use crate::error::{domain, Result};
use crate::Semiring;

/// Reusable "already read" marks for [`fast_argmax_k`].
///
/// Each call takes a fresh epoch, so the marks never need clearing.
#[derive(Debug, Clone)]
pub struct ReadScratch {
    marks: Vec<u64>,
    epoch: u64,
}

impl ReadScratch {
    pub fn new(n: usize) -> Self {
        Self { marks: vec![0; n], epoch: 0 }
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    /// Grows the mark array to hold at least `n` slots.
    pub fn reserve(&mut self, n: usize) {
        if self.marks.len() < n {
            self.marks.resize(n, 0);
        }
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    fn next_epoch(&mut self) -> u64 {
        self.epoch += 1;
        self.epoch
    }
}

/// Finds `argmax_i v_1[i] ⊗ … ⊗ v_K[i]` given best-first permutations of every list.
///
/// Each index is combined at most once per call, so at most `N` indices are probed.
pub fn fast_argmax_k<L: ListAccess>(
    lists: &[L],
    perms: &[PermRef<'_>],
    scratch: &mut ReadScratch,
    mode: SearchMode,
    semiring: Semiring,
) -> Result<ArgmaxOutcome> {
    if lists.len() < 2 {
        return domain("need at least two lists");
    }
    if perms.len() != lists.len() {
        return domain(format!("{} lists but {} permutations", lists.len(), perms.len()));
    }
    let n = lists[0].len();
    if n == 0 {
        return domain("cannot take the argmax of empty lists");
    }
    if let Some(l) = lists.iter().find(|l| l.len() != n) {
        return domain(format!("list lengths differ: {n} vs {}", l.len()));
    }
    if scratch.len() < n {
        return domain(format!("read scratch holds {} slots, lists have {n}", scratch.len()));
    }
    for (l, p) in lists.iter().zip(perms) {
        check_sorted(l, *p, semiring)?;
    }
    Ok(fast_argmax_k_trusted(lists, perms, scratch, mode, semiring))
}

#[inline]
fn combined<L: ListAccess>(lists: &[L], i: usize, semiring: Semiring) -> f64 {
    let mut v = lists[0].get(i);
    for l in &lists[1..] {
        v = semiring.combine(v, l.get(i));
    }
    v
}

/// [`fast_argmax_k`] without input validation.
pub fn fast_argmax_k_trusted<L: ListAccess>(
    lists: &[L],
    perms: &[PermRef<'_>],
    scratch: &mut ReadScratch,
    mode: SearchMode,
    semiring: Semiring,
) -> ArgmaxOutcome {
    let n = lists[0].len();
    let t = scratch.next_epoch();
    let marks = &mut scratch.marks;

    let mut best = usize::MAX;
    let mut max = semiring.zero();
    let mut probes = 0usize;
    // smallest cube width (minus one) known to contain a read index
    let mut end = n;

    let mut visit = |pos: usize, best: &mut usize, max: &mut f64, end: &mut usize| {
        for p in perms {
            let i = p.order[pos] as usize;
            if marks[i] == t {
                continue;
            }
            marks[i] = t;
            probes += 1;
            let v = combined(lists, i, semiring);
            if *best == usize::MAX || improves(semiring, v, i, *max, *best) {
                *best = i;
                *max = v;
            }
            let corner = perms.iter().map(|q| q.inverse[i] as usize).max().unwrap_or(0);
            *end = (*end).min(corner);
        }
    };

    visit(0, &mut best, &mut max, &mut end);
    let mut start = 0usize;
    loop {
        let mut go = start < end;
        if go && mode == SearchMode::EarlyStop && start + 1 < n {
            let mut bound = lists[0].get(perms[0].order[start + 1] as usize);
            for (l, p) in lists.iter().zip(perms).skip(1) {
                bound = semiring.combine(bound, l.get(p.order[start + 1] as usize));
            }
            go = !semiring.is_better(max, bound);
        }
        if !go {
            break;
        }
        start += 1;
        visit(start, &mut best, &mut max, &mut end);
    }
    ArgmaxOutcome { best, value: max, probes, steps: start + 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argmax::{fast_argmax_pair, sort_desc, SortedPermutation};
    use proptest::prelude::*;

    fn run(lists: &[Vec<f64>], mode: SearchMode, s: Semiring) -> ArgmaxOutcome {
        let ps: Vec<SortedPermutation> = lists.iter().map(|l| sort_desc(&l[..], s).unwrap()).collect();
        let refs: Vec<PermRef> = ps.iter().map(|p| p.as_ref()).collect();
        let mut scratch = ReadScratch::new(lists[0].len());
        fast_argmax_k(lists, &refs, &mut scratch, mode, s).unwrap()
    }

    fn brute(lists: &[Vec<f64>], s: Semiring) -> (usize, f64) {
        let n = lists[0].len();
        let vals: Vec<f64> = (0..n)
            .map(|i| lists[1..].iter().fold(lists[0][i], |acc, l| s.combine(acc, l[i])))
            .collect();
        let b = s.argbest(&vals).unwrap();
        (b, vals[b])
    }

    #[test]
    fn two_lists_agree_with_pair() {
        let (a, b) = (vec![3., 1., 2.], vec![6., 2., 4.]);
        let o = run(&[a.clone(), b.clone()], SearchMode::Analysis, Semiring::MaxProduct);
        let pa = sort_desc(&a[..], Semiring::MaxProduct).unwrap();
        let pb = sort_desc(&b[..], Semiring::MaxProduct).unwrap();
        let p = fast_argmax_pair(&a[..], &b[..], pa.as_ref(), pb.as_ref(), SearchMode::Analysis, Semiring::MaxProduct)
            .unwrap();
        assert_eq!(o.value, 18.0);
        assert_eq!((o.value, o.steps), (p.value, p.steps));
    }

    #[test]
    fn three_lists_tie_low() {
        let lists = [vec![2., 1.], vec![1., 2.], vec![1., 1.]];
        let o = run(&lists, SearchMode::Analysis, Semiring::MaxProduct);
        assert_eq!((o.best, o.value), (0, 2.0));
    }

    #[test]
    fn anti_sorted_never_worse() {
        let n = 6;
        let up: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let down: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        let o = run(&[up.clone(), down, up], SearchMode::Analysis, Semiring::MaxProduct);
        assert!(o.probes <= n);
    }

    #[test]
    fn scratch_checks() {
        let lists = [vec![1.0, 2.0], vec![2.0, 1.0]];
        let ps: Vec<SortedPermutation> = lists.iter().map(|l| sort_desc(&l[..], Semiring::MaxSum).unwrap()).collect();
        let refs: Vec<PermRef> = ps.iter().map(|p| p.as_ref()).collect();
        let mut small = ReadScratch::new(1);
        assert!(fast_argmax_k(&lists, &refs, &mut small, SearchMode::Analysis, Semiring::MaxSum).is_err());
        let mut scratch = ReadScratch::new(2);
        for e in 1..=3 {
            fast_argmax_k(&lists, &refs, &mut scratch, SearchMode::Analysis, Semiring::MaxSum).unwrap();
            assert_eq!(scratch.epoch(), e);
        }
        assert!(fast_argmax_k(&lists[..1], &refs[..1], &mut scratch, SearchMode::Analysis, Semiring::MaxSum).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute(
            k in 2usize..5,
            n in 1usize..60,
            seed in prop::collection::vec(0u8..10, 240),
            s in prop::sample::select(vec![Semiring::MaxProduct, Semiring::MaxSum, Semiring::MinSum]),
        ) {
            let lists: Vec<Vec<f64>> = (0..k)
                .map(|j| (0..n).map(|i| f64::from(seed[(j * n + i) % seed.len()]) + (i % 3) as f64).collect())
                .collect();
            let (_, value) = brute(&lists, s);
            let a = run(&lists, SearchMode::Analysis, s);
            let e = run(&lists, SearchMode::EarlyStop, s);
            prop_assert_eq!(a.value, value);
            prop_assert_eq!(e.value, value);
            prop_assert!(e.steps <= a.steps);
            prop_assert!(a.probes <= n.min(k * a.steps));
        }
    }
}
