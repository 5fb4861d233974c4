use itertools::Itertools;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};

/// Cap on `(N!)^(K-1)` for [`expected_steps_enumerate`].
pub const ENUMERATION_CAP: f64 = 1e7;

/// Below this many factors `prob_exceed` multiplies ratios directly.
const PRODUCT_TERMS: usize = 4096;

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Probability that a uniformly random permutation of `n` has no entry in
/// the leading `m × m` square: `(n-m)!² / ((n-2m)! n!) = Π_{t<m} (n-m-t)/(n-t)`, and 0 for `m > n/2`.
pub fn prob_exceed(n: usize, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if 2 * m > n {
        return 0.0;
    }
    if m <= PRODUCT_TERMS {
        return (0..m).map(|t| (n - m - t) as f64 / (n - t) as f64).product();
    }
    (2.0 * ln_factorial(n - m) - ln_factorial(n - 2 * m) - ln_factorial(n)).exp()
}

/// Expected number of analysis-mode steps of the pair search on random
/// order statistics: `Σ_{m=0}^{⌊n/2⌋} prob_exceed(n, m)`.
pub fn expected_steps(n: usize) -> Result<f64> {
    if n == 0 {
        return domain("expected_steps needs n ≥ 1");
    }
    if let Some(e) = expected_steps_exact(n) {
        return Ok(e);
    }
    let mut total = 0.0;
    for m in 0..=n / 2 {
        let p = prob_exceed(n, m);
        total += p;
        if p < 1e-18 * total {
            break;
        }
    }
    Ok(total)
}

/// `Σ_m (n-m)!² / (n-2m)!` over `n!` in integer arithmetic, rounded once.
/// `None` when `n!` is not exactly representable as an `f64`.
fn expected_steps_exact(n: usize) -> Option<f64> {
    let limit = 1u128 << f64::MANTISSA_DIGITS;
    let denom = (1..=n as u128).try_fold(1u128, |acc, t| acc.checked_mul(t).filter(|&v| v <= limit))?;
    let fact = |k: usize| (1..=k as u128).product::<u128>();
    let mut num = 0u128;
    for m in 0..=n / 2 {
        let falling: u128 = ((n - 2 * m + 1)..=(n - m)).map(|t| t as u128).product();
        num = num.checked_add(fact(n - m).checked_mul(falling)?)?;
    }
    Some(num as f64 / denom as f64)
}

/// Mean over all `(n!)^(k-1)` permutation tuples of the smallest hypercube
/// width enclosing some point `(i, σ_1(i), …, σ_{k-1}(i))`.
pub fn expected_steps_enumerate(n: usize, k: usize) -> Result<f64> {
    if n == 0 || k < 2 {
        return domain("expected_steps_enumerate needs n ≥ 1 and k ≥ 2");
    }
    let perms = ln_factorial(n) * (k - 1) as f64;
    if perms > ENUMERATION_CAP.ln() + 1e-9 {
        return Err(crate::Error::Resource(format!(
            "enumerating ({n}!)^{} permutation tuples exceeds the cap",
            k - 1
        )));
    }
    let all: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let mut total = 0u64;
    let mut count = 0u64;
    for tuple in (0..k - 1).map(|_| all.iter()).multi_cartesian_product() {
        let width = (0..n)
            .map(|i| tuple.iter().map(|s| s[i]).fold(i, usize::max))
            .min()
            .unwrap_or(0)
            + 1;
        total += width as u64;
        count += 1;
    }
    Ok(total as f64 / count as f64)
}

/// `n^((k-1)/k)`, the growth bound on the expected steps with `k` lists.
pub fn step_bound(n: usize, k: usize) -> f64 {
    (n as f64).powf((k as f64 - 1.0) / k as f64)
}
