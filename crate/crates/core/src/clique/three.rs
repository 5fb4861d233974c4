use super::view::SortedRows;
use crate::argmax::{fast_argmax_pair_trusted, SearchMode};
use crate::error::{domain, Result};
use crate::tensor::{Factor, Variable};
use crate::{Execution, Semiring};

/// Output of the sorted 3-clique kernel, laid out row-major over `(i, j)`.
#[derive(Debug, Clone)]
pub struct ThreeCliqueTable {
    pub values: Vec<f64>,
    /// Maximizing state of the eliminated variable for every `(i, j)`.
    pub argbest: Vec<u32>,
    /// Distinct entries probed, summed over all `(i, j)`.
    pub probes: u64,
}

/// `m(a, b) = Φij(a, b) ⊗ max_k Φik(a, k) ⊗ Φjk(b, k)` from pre-sorted rows.
///
/// `phi_ij` is row-major over `(i, j)`; row `a` of `ik` and row `b` of `jk`
/// must both be lists over `k`.
pub fn three_clique_sorted(
    phi_ij: &[f64],
    ik: &SortedRows,
    jk: &SortedRows,
    mode: SearchMode,
    semiring: Semiring,
    exec: Execution,
) -> Result<ThreeCliqueTable> {
    let (ni, nj) = (ik.rows(), jk.rows());
    if phi_ij.len() != ni * nj {
        return domain(format!("Φij has {} cells, expected {ni}×{nj}", phi_ij.len()));
    }
    if ik.row_len() != jk.row_len() {
        return domain("the two sorted tables disagree on the eliminated cardinality");
    }
    let mut cells = vec![(0.0f64, 0u32, 0u32); ni * nj];
    exec.for_each_chunk(&mut cells, nj, || (), |_, a, row| {
        let (la, pa) = (ik.row(a), ik.perm(a));
        for (b, cell) in row.iter_mut().enumerate() {
            let o = fast_argmax_pair_trusted(la, jk.row(b), pa, jk.perm(b), mode, semiring);
            *cell = (semiring.combine(phi_ij[a * nj + b], o.value), o.best as u32, o.probes as u32);
        }
    });
    let probes = cells.iter().map(|c| u64::from(c.2)).sum();
    Ok(ThreeCliqueTable {
        values: cells.iter().map(|c| c.0).collect(),
        argbest: cells.iter().map(|c| c.1).collect(),
        probes,
    })
}

/// Max-marginal over the scope of `phi_ij` of `Φij ⊗ Φik ⊗ Φjk`, eliminating `k`.
pub fn max_marginal_3clique(phi_ij: &Factor, phi_ik: &Factor, phi_jk: &Factor, semiring: Semiring) -> Result<Factor> {
    max_marginal_3clique_with(phi_ij, phi_ik, phi_jk, semiring, SearchMode::default(), Execution::default())
}

pub fn max_marginal_3clique_with(
    phi_ij: &Factor,
    phi_ik: &Factor,
    phi_jk: &Factor,
    semiring: Semiring,
    mode: SearchMode,
    exec: Execution,
) -> Result<Factor> {
    let (i, j, k) = identify(phi_ij, phi_ik, phi_jk)?;
    let ij = reorder(phi_ij, &[i, j]);
    let ik = SortedRows::from_table(reorder(phi_ik, &[i, k]), k.card, semiring, exec)?;
    let jk = SortedRows::from_table(reorder(phi_jk, &[j, k]), k.card, semiring, exec)?;
    let table = three_clique_sorted(&ij, &ik, &jk, mode, semiring, exec)?;
    Factor::from_scope_order(vec![i, j], table.values)
}

fn identify(phi_ij: &Factor, phi_ik: &Factor, phi_jk: &Factor) -> Result<(Variable, Variable, Variable)> {
    if phi_ij.arity() != 2 || phi_ik.arity() != 2 || phi_jk.arity() != 2 {
        return domain("3-clique marginalization needs three pairwise factors");
    }
    let shared: Vec<Variable> =
        phi_ik.vars().iter().copied().filter(|v| phi_ij.contains(v.id)).collect();
    let [i] = shared[..] else {
        return domain("Φik must share exactly one variable with Φij");
    };
    let k = *phi_ik.vars().iter().find(|v| v.id != i.id).expect("pairwise");
    let j = *phi_ij.vars().iter().find(|v| v.id != i.id).expect("pairwise");
    let pos = |f: &Factor, x: Variable| f.vars().iter().find(|v| v.id == x.id).copied();
    match (pos(phi_jk, j), pos(phi_jk, k), pos(phi_ij, i)) {
        (Some(jj), Some(kk), Some(ii)) if jj == j && kk == k && ii == i => Ok((i, j, k)),
        (Some(_), Some(_), _) => domain("shared variables disagree on cardinality"),
        _ => domain("Φjk must be over the two variables not shared by Φij and Φik"),
    }
}

/// Values of a factor laid out row-major over `order` (a permutation of its scope).
pub(crate) fn reorder(f: &Factor, order: &[Variable]) -> Vec<f64> {
    if order == f.vars() {
        return f.values().to_vec();
    }
    crate::tensor::project_indices(order, f.vars()).into_iter().map(|x| f.values()[x]).collect()
}
