use super::{check_sorted, improves, ArgmaxOutcome, ListAccess, PermRef, SearchMode};
use crate::error::{domain, Result};
use crate::Semiring;

/// Finds `argmax_i a[i] ⊗ b[i]` given permutations sorting `a` and `b` best-first.
///
/// Validates the inputs in `O(N)`; use [`fast_argmax_pair_trusted`] inside
/// loops where the permutations are known to be correct.
pub fn fast_argmax_pair<A: ListAccess + ?Sized, B: ListAccess + ?Sized>(
    a: &A,
    b: &B,
    pa: PermRef<'_>,
    pb: PermRef<'_>,
    mode: SearchMode,
    semiring: Semiring,
) -> Result<ArgmaxOutcome> {
    if a.len() != b.len() {
        return domain(format!("list lengths differ: {} vs {}", a.len(), b.len()));
    }
    if a.is_empty() {
        return domain("cannot take the argmax of empty lists");
    }
    check_sorted(a, pa, semiring)?;
    check_sorted(b, pb, semiring)?;
    Ok(fast_argmax_pair_trusted(a, b, pa, pb, mode, semiring))
}

/// [`fast_argmax_pair`] without input validation. Lists must be non-empty,
/// of equal length, and sorted by their permutations.
#[inline]
pub fn fast_argmax_pair_trusted<A: ListAccess + ?Sized, B: ListAccess + ?Sized>(
    a: &A,
    b: &B,
    pa: PermRef<'_>,
    pb: PermRef<'_>,
    mode: SearchMode,
    semiring: Semiring,
) -> ArgmaxOutcome {
    let n = a.len();
    let (oa, ia) = (pa.order, pa.inverse);
    let (ob, ib) = (pb.order, pb.inverse);

    let first_a = oa[0] as usize;
    let first_b = ob[0] as usize;
    let mut best = first_a;
    let mut max = semiring.combine(a.get(first_a), b.get(first_a));
    let mut probes = 1;
    if first_b != first_a {
        probes += 1;
        let v = semiring.combine(a.get(first_b), b.get(first_b));
        if improves(semiring, v, first_b, max, best) {
            best = first_b;
            max = v;
        }
    }
    let mut end_a = ia[first_b] as usize;
    let mut end_b = ib[first_a] as usize;

    let mut start = 0usize;
    loop {
        let go = match mode {
            SearchMode::Analysis => start < end_a,
            SearchMode::Symmetric => start < end_a && start < end_b,
            SearchMode::EarlyStop => {
                start < end_a
                    && start < end_b
                    && start + 1 < n
                    && !semiring.is_better(
                        max,
                        semiring.combine(
                            a.get(oa[start + 1] as usize),
                            b.get(ob[start + 1] as usize),
                        ),
                    )
            }
        };
        if !go {
            break;
        }
        start += 1;

        let i = oa[start] as usize;
        if (ib[i] as usize) >= start {
            probes += 1;
        }
        let v = semiring.combine(a.get(i), b.get(i));
        if improves(semiring, v, i, max, best) {
            best = i;
            max = v;
        }
        end_b = end_b.min(ib[i] as usize);

        let j = ob[start] as usize;
        if (ia[j] as usize) > start {
            probes += 1;
        }
        let v = semiring.combine(a.get(j), b.get(j));
        if improves(semiring, v, j, max, best) {
            best = j;
            max = v;
        }
        end_a = end_a.min(ia[j] as usize);
    }
    ArgmaxOutcome { best, value: max, probes, steps: start + 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argmax::{argmax_naive, sort_desc};
    use proptest::prelude::*;

    fn run(a: &[f64], b: &[f64], mode: SearchMode, s: Semiring) -> ArgmaxOutcome {
        let pa = sort_desc(a, s).unwrap();
        let pb = sort_desc(b, s).unwrap();
        fast_argmax_pair(a, b, pa.as_ref(), pb.as_ref(), mode, s).unwrap()
    }

    const MODES: [SearchMode; 3] = [SearchMode::Analysis, SearchMode::Symmetric, SearchMode::EarlyStop];

    #[test]
    fn aligned_lists_stop_immediately() {
        let o = run(&[3., 1., 2.], &[6., 2., 4.], SearchMode::Analysis, Semiring::MaxProduct);
        assert_eq!((o.best, o.value, o.steps, o.probes), (0, 18.0, 1, 1));
    }

    #[test]
    fn reversed_lists_tie_low() {
        for mode in MODES {
            let o = run(&[1., 2., 3., 4.], &[4., 3., 2., 1.], mode, Semiring::MaxProduct);
            assert_eq!((o.best, o.value), (1, 6.0), "{mode}");
        }
    }

    #[test]
    fn scan_example() {
        let (a, b) = ([0.9, 0.1, 0.5], [0.2, 0.8, 0.6]);
        let oracle = argmax_naive(&a[..], &b[..], Semiring::MaxProduct).unwrap();
        assert_eq!(oracle.best, 2);
        assert_eq!(oracle.value, 0.5 * 0.6);
        for mode in MODES {
            let o = run(&a, &b, mode, Semiring::MaxProduct);
            assert_eq!((o.best, o.value), (2, 0.5 * 0.6));
        }
    }

    #[test]
    fn reversal_costs_half_plus_one() {
        for n in [1usize, 2, 3, 4, 7, 10, 64] {
            let a: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let b: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
            let o = run(&a, &b, SearchMode::Analysis, Semiring::MaxSum);
            assert_eq!(o.steps, n / 2 + 1, "n={n}");
        }
    }

    #[test]
    fn invalid_inputs() {
        let s = Semiring::MaxSum;
        let a = [1.0, 2.0];
        let pa = sort_desc(&a[..], s).unwrap();
        let b = [1.0, 2.0, 3.0];
        let pb = sort_desc(&b[..], s).unwrap();
        assert!(fast_argmax_pair(&a[..], &b[..], pa.as_ref(), pb.as_ref(), SearchMode::Analysis, s).is_err());
        let wrong = crate::argmax::SortedPermutation::from_order(vec![0, 1]).unwrap();
        assert!(fast_argmax_pair(&a[..], &a[..], wrong.as_ref(), pa.as_ref(), SearchMode::Analysis, s).is_err());
    }

    proptest! {
        #[test]
        fn matches_scan(
            pairs in prop::collection::vec((0u8..20, 0u8..20), 1..100),
            s in prop::sample::select(vec![Semiring::MaxProduct, Semiring::MaxSum, Semiring::MinSum]),
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let b: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
            let oracle = argmax_naive(&a[..], &b[..], s).unwrap();
            let mut steps = Vec::new();
            for mode in MODES {
                let o = run(&a, &b, mode, s);
                prop_assert_eq!(o.value, oracle.value);
                prop_assert_eq!(s.combine(a[o.best], b[o.best]), o.value);
                prop_assert!(o.probes <= a.len() && o.probes <= 2 * o.steps);
                steps.push(o.steps);
            }
            prop_assert_eq!(steps[0], steps[1]);
            prop_assert!(steps[2] <= steps[0]);
        }

        #[test]
        fn scale_invariant_best(
            a in prop::collection::vec(0.0f64..1.0, 1..100),
            b in prop::collection::vec(0.0f64..1.0, 100),
            c in 0.01f64..100.0,
        ) {
            let b = &b[..a.len()];
            let scaled: Vec<f64> = a.iter().map(|x| x * c).collect();
            let s = Semiring::MaxProduct;
            let o1 = run(&a, b, SearchMode::Analysis, s);
            let o2 = run(&scaled, b, SearchMode::Analysis, s);
            prop_assert_eq!(o1.steps, o2.steps);
            prop_assert_eq!(o1.best, o2.best);
        }
    }
}
