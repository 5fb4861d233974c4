use super::{for_each_joint, scope_size, select, union_all, Assignment, Factor, VarId};
use crate::error::{domain, Result};
use crate::Semiring;

/// Joint-table size above which the brute-force routines refuse to enumerate.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

fn joint_scope(factors: &[Factor], cap: usize) -> Result<Vec<super::Variable>> {
    let scope = union_all(factors.iter().map(|f| f.vars()))?;
    let size = scope_size(&scope)?;
    if size > cap {
        return Err(crate::Error::Resource(format!(
            "joint table of {size} cells exceeds the enumeration cap {cap}"
        )));
    }
    Ok(scope)
}

/// Max-marginal of the product of `factors` onto `target`, by full enumeration.
///
/// Factors are combined left to right, so results are bit-for-bit reproducible.
pub fn max_marginal_brute(factors: &[Factor], target: &[VarId], semiring: Semiring) -> Result<Factor> {
    let scope = joint_scope(factors, DEFAULT_ENUMERATION_CAP)?;
    let kept = select(&scope, target)?;
    let mut subs: Vec<&[super::Variable]> = factors.iter().map(|f| f.vars()).collect();
    subs.push(&kept);
    let mut out = vec![semiring.zero(); scope_size(&kept)?];
    let n = factors.len();
    for_each_joint(&scope, &subs, |_, idx| {
        let mut v = semiring.one();
        for (f, &i) in factors.iter().zip(&idx[..n]) {
            v = semiring.combine(v, f.values()[i]);
        }
        let slot = &mut out[idx[n]];
        if semiring.is_better(v, *slot) {
            *slot = v;
        }
    });
    Factor::new(kept, out)
}

/// The best joint assignment of all variables touched by `factors` and its value.
///
/// Ties go to the smallest row-major index of the joint table.
pub fn map_assignment_brute(
    factors: &[Factor],
    semiring: Semiring,
    cap: usize,
) -> Result<(Assignment, f64)> {
    if factors.is_empty() {
        return domain("no factors to maximize");
    }
    let scope = joint_scope(factors, cap)?;
    let subs: Vec<&[super::Variable]> = factors.iter().map(|f| f.vars()).collect();
    let mut best = (0usize, semiring.zero());
    let mut first = true;
    for_each_joint(&scope, &subs, |joint, idx| {
        let mut v = semiring.one();
        for (f, &i) in factors.iter().zip(idx) {
            v = semiring.combine(v, f.values()[i]);
        }
        if first || semiring.is_better(v, best.1) {
            best = (joint, v);
            first = false;
        }
    });
    let states = super::unflatten(best.0, &scope)?;
    Ok((Assignment::new(scope, states)?, best.1))
}
