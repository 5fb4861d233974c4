use super::grouping::{split_groups, CostEstimate, Grouping};
use super::view::{sort_rows_with, SortedFactorView};
use crate::argmax::{fast_argmax_k_trusted, fast_argmax_pair_trusted, PermRef, ReadScratch, SearchMode};
use crate::error::{domain, Result};
use crate::tensor::{max_marginal_brute, project_indices, scope_size, select, union_all, Factor, VarId, Variable};
use crate::{Execution, Semiring};

/// Below this many states per variable the automatic entry point uses brute force.
pub const BRUTE_FORCE_BELOW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupedConfig {
    /// Marginalize inside groups with a nested grouping when that lowers the exponent.
    pub recurse: bool,
    pub max_depth: usize,
    pub mode: SearchMode,
    pub execution: Execution,
}

impl Default for GroupedConfig {
    fn default() -> Self {
        Self { recurse: true, max_depth: 8, mode: SearchMode::EarlyStop, execution: Execution::Parallel }
    }
}

/// Max-marginal of `∏ factors` onto `target`, computed group by group.
pub fn max_marginal_grouped(
    factors: &[Factor],
    target: &[VarId],
    grouping: &Grouping,
    semiring: Semiring,
    recurse: bool,
) -> Result<Factor> {
    let config = GroupedConfig { recurse, ..GroupedConfig::default() };
    max_marginal_grouped_with(factors, target, grouping, semiring, config)
}

pub fn max_marginal_grouped_with(
    factors: &[Factor],
    target: &[VarId],
    grouping: &Grouping,
    semiring: Semiring,
    config: GroupedConfig,
) -> Result<Factor> {
    let check = Grouping::new(factors, target, grouping.groups().to_vec())?;
    if check != *grouping {
        return domain("grouping was built for different factors or target");
    }
    for f in factors {
        semiring.validate(f.values())?;
    }
    grouped(factors, grouping, semiring, config, 0)
}

/// Picks brute force or the cheapest grouping, whichever has the lower estimated cost.
pub fn max_marginal_auto(factors: &[Factor], target: &[VarId], semiring: Semiring, config: GroupedConfig) -> Result<Factor> {
    if factors.is_empty() {
        return domain("no factors to marginalize");
    }
    let small = factors.iter().flat_map(|f| f.vars()).all(|v| v.card < BRUTE_FORCE_BELOW);
    if !small {
        if let Some(g) = best_grouping(factors, target)? {
            return max_marginal_grouped_with(factors, target, &g, semiring, config);
        }
    }
    max_marginal_brute(factors, target, semiring)
}

/// Cheapest proper grouping over all group counts, if it beats brute force.
fn best_grouping(factors: &[Factor], target: &[VarId]) -> Result<Option<Grouping>> {
    let nvars = union_all(factors.iter().map(|f| f.vars()))?.len();
    let brute = CostEstimate::brute(nvars);
    let mut best: Option<Grouping> = None;
    for k in 2..factors.len() {
        match split_groups(factors, target, k) {
            Ok(g) => {
                if best.as_ref().is_none_or(|b| g.cost().compare(b.cost()).is_lt()) {
                    best = Some(g);
                }
            }
            Err(crate::Error::NoFeasibleGrouping { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best.filter(|g| g.cost().exponent() < brute.exponent() - 1e-9))
}

/// Max-marginal of one group's factors onto `keep`, recursing when worthwhile.
fn marginalize_group(
    factors: &[Factor],
    keep: &[Variable],
    semiring: Semiring,
    config: GroupedConfig,
    depth: usize,
) -> Result<Factor> {
    let ids: Vec<VarId> = keep.iter().map(|v| v.id).collect();
    if config.recurse && depth < config.max_depth && factors.len() >= 2 && !keep.is_empty() {
        let mut sub: Vec<Factor> = factors.to_vec();
        sub.push(Factor::constant(keep.to_vec(), semiring.one())?);
        if let Some(g) = best_grouping(&sub, &ids)? {
            return grouped(&sub, &g, semiring, config, depth + 1);
        }
    }
    max_marginal_brute(factors, &ids, semiring)
}

fn grouped(factors: &[Factor], grouping: &Grouping, semiring: Semiring, config: GroupedConfig, depth: usize) -> Result<Factor> {
    let scope = union_all(factors.iter().map(|f| f.vars()))?;
    let vars_of = |ids: &[VarId]| select(&scope, ids);
    let k = grouping.k();

    let mut psi = Vec::with_capacity(k + 1);
    for (g, members) in grouping.groups().iter().enumerate() {
        let fs: Vec<Factor> = members.iter().map(|&i| factors[i].clone()).collect();
        psi.push(marginalize_group(&fs, &vars_of(grouping.interface(g))?, semiring, config, depth)?);
    }

    let x_iface = vars_of(grouping.interface(0))?;
    let w = vars_of(grouping.search_vars())?;
    let x_vars = grouping.group_vars(0);
    // conditioning variables of each list: what the group shares with X
    let cond: Vec<Vec<Variable>> = (1..=k)
        .map(|g| {
            let ids: Vec<VarId> =
                grouping.group_vars(g).iter().copied().filter(|id| x_vars.contains(id)).collect();
            vars_of(&ids)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<usize>> = cond.iter().map(|c| project_indices(&x_iface, c)).collect();
    let cells = scope_size(&x_iface)?;
    let mut out = vec![0.0; cells];

    if w.is_empty() {
        for (n, o) in out.iter_mut().enumerate() {
            let mut v = psi[0].values()[n];
            for g in 1..=k {
                v = semiring.combine(v, psi[g].values()[rows[g - 1][n]]);
            }
            *o = v;
        }
    } else {
        let views: Vec<SortedFactorView> = (1..=k)
            .map(|g| {
                let list_scope = union_all([cond[g - 1].as_slice(), w.as_slice()])?;
                let full = psi[g].expand(&list_scope)?;
                let ids: Vec<VarId> = cond[g - 1].iter().map(|v| v.id).collect();
                sort_rows_with(&full, &ids, semiring, config.execution)
            })
            .collect::<Result<_>>()?;
        let len = scope_size(&w)?;
        let chunk = x_iface.last().map_or(1, |v| v.card);
        let mode = config.mode;
        config.execution.for_each_chunk(&mut out, chunk, || ReadScratch::new(len), |scratch, c, part| {
            for (off, o) in part.iter_mut().enumerate() {
                let n = c * chunk + off;
                let best = if k == 2 {
                    let (ra, rb) = (rows[0][n], rows[1][n]);
                    let (a, b) = (&views[0], &views[1]);
                    fast_argmax_pair_trusted(a.row(ra), b.row(rb), a.perm(ra), b.perm(rb), mode, semiring).value
                } else {
                    let lists: Vec<&[f64]> = views.iter().zip(&rows).map(|(v, r)| v.row(r[n])).collect();
                    let perms: Vec<PermRef> = views.iter().zip(&rows).map(|(v, r)| v.perm(r[n])).collect();
                    fast_argmax_k_trusted(&lists, &perms, scratch, mode, semiring).value
                };
                *o = semiring.combine(psi[0].values()[n], best);
            }
        });
    }

    let m_x = Factor::new(x_iface, out)?;
    m_x.max_marginal(grouping.target(), semiring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clique::split_groups;

    fn v(id: usize, card: usize) -> Variable {
        Variable::new(id, card)
    }

    fn table(vars: Vec<Variable>, seed: u64) -> Factor {
        let n: usize = vars.iter().map(|v| v.card).product();
        let vals: Vec<f64> = (0..n as u64).map(|x| ((x * 7919 + seed * 104729) % 23) as f64).collect();
        Factor::new(vars, vals).unwrap()
    }

    #[test]
    fn worked_example() {
        let fs = [
            Factor::new(vec![v(0, 2), v(1, 2)], vec![1., 2., 3., 4.]).unwrap(),
            Factor::new(vec![v(0, 2), v(2, 2)], vec![1., 1., 2., 1.]).unwrap(),
            Factor::new(vec![v(1, 2), v(2, 2)], vec![2., 1., 1., 3.]).unwrap(),
        ];
        let g = split_groups(&fs, &[0, 1], 2).unwrap();
        let m = max_marginal_grouped(&fs, &[0, 1], &g, Semiring::MaxProduct, true).unwrap();
        assert_eq!(m.values(), &[2., 6., 12., 12.]);
    }

    #[test]
    fn shared_terms() {
        let fs = [
            table(vec![v(0, 2), v(1, 2)], 1),
            table(vec![v(0, 2), v(2, 2), v(3, 2)], 2),
            table(vec![v(1, 2), v(2, 2), v(3, 2)], 3),
        ];
        let g = split_groups(&fs, &[0, 1], 2).unwrap();
        assert_eq!(g.search_vars(), &[2, 3]);
        let m = max_marginal_grouped(&fs, &[0, 1], &g, Semiring::MaxSum, false).unwrap();
        assert_eq!(m, max_marginal_brute(&fs, &[0, 1], Semiring::MaxSum).unwrap());
    }

    #[test]
    fn ring_of_four() {
        let fs = [
            table(vec![v(0, 2), v(1, 2)], 1),
            table(vec![v(1, 2), v(2, 2)], 2),
            table(vec![v(2, 2), v(3, 2)], 3),
            table(vec![v(0, 2), v(3, 2)], 4),
        ];
        let g = split_groups(&fs, &[0, 1], 2).unwrap();
        for recurse in [false, true] {
            let m = max_marginal_grouped(&fs, &[0, 1], &g, Semiring::MaxSum, recurse).unwrap();
            assert_eq!(m, max_marginal_brute(&fs, &[0, 1], Semiring::MaxSum).unwrap());
        }
    }

    #[test]
    fn four_lists() {
        let fs = [
            table(vec![v(0, 3), v(1, 3), v(2, 3)], 1),
            table(vec![v(0, 3), v(1, 3), v(3, 3)], 2),
            table(vec![v(0, 3), v(2, 3), v(3, 3)], 3),
            table(vec![v(1, 3), v(2, 3), v(3, 3)], 4),
        ];
        let g = split_groups(&fs, &[0, 1, 2], 3).unwrap();
        let m = max_marginal_grouped(&fs, &[0, 1, 2], &g, Semiring::MinSum, true).unwrap();
        assert_eq!(m, max_marginal_brute(&fs, &[0, 1, 2], Semiring::MinSum).unwrap());
    }

    #[test]
    fn recursion_inside_a_group() {
        // a 5-cycle plus a chord: the big group can itself be split
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 4), (0, 5), (4, 5), (2, 5)];
        let fs: Vec<Factor> = edges
            .iter()
            .enumerate()
            .map(|(s, &(a, b))| table(vec![v(a, 3), v(b, 3)], s as u64))
            .collect();
        let oracle = max_marginal_brute(&fs, &[0, 1], Semiring::MaxSum).unwrap();
        let g = split_groups(&fs, &[0, 1], 2).unwrap();
        for recurse in [false, true] {
            let m = max_marginal_grouped(&fs, &[0, 1], &g, Semiring::MaxSum, recurse).unwrap();
            assert_eq!(m, oracle);
        }
        let auto = max_marginal_auto(&fs, &[0, 1], Semiring::MaxSum, GroupedConfig::default()).unwrap();
        assert_eq!(auto, oracle);
    }

    #[test]
    fn mismatched_grouping_rejected() {
        let fs = [
            table(vec![v(0, 2), v(1, 2)], 1),
            table(vec![v(0, 2), v(2, 2)], 2),
            table(vec![v(1, 2), v(2, 2)], 3),
        ];
        let g = split_groups(&fs, &[0, 1], 2).unwrap();
        assert!(max_marginal_grouped(&fs, &[0], &g, Semiring::MaxSum, false).is_err());
    }
}
