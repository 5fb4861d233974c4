use super::view::SortedRows;
use crate::argmax::{fast_argmax_pair_trusted, SearchMode};
use crate::error::{domain, Result};
use crate::{Execution, Semiring};

/// `C[i][j] = best_k A[i][k] ⊗ B[k][j]` for row-major `n × n` matrices.
///
/// Rows of `A` and columns of `B` are sorted once; each cell is then one pair search.
pub fn funny_matmul(a: &[f64], b: &[f64], n: usize, semiring: Semiring) -> Result<Vec<f64>> {
    funny_matmul_with(a, b, n, semiring, SearchMode::default(), Execution::default()).map(|(c, _)| c)
}

/// As [`funny_matmul`], also returning the total number of probed entries.
pub fn funny_matmul_with(
    a: &[f64],
    b: &[f64],
    n: usize,
    semiring: Semiring,
    mode: SearchMode,
    exec: Execution,
) -> Result<(Vec<f64>, u64)> {
    if n == 0 || a.len() != n * n || b.len() != n * n {
        return domain(format!(
            "funny_matmul needs two {n}×{n} matrices, got {} and {} values",
            a.len(),
            b.len()
        ));
    }
    semiring.validate(a)?;
    semiring.validate(b)?;
    let mut bt = vec![0.0; n * n];
    for k in 0..n {
        for j in 0..n {
            bt[j * n + k] = b[k * n + j];
        }
    }
    let rows = SortedRows::from_table(a.to_vec(), n, semiring, exec)?;
    let cols = SortedRows::from_table(bt, n, semiring, exec)?;
    let mut cells = vec![(0.0, 0u32); n * n];
    exec.for_each_chunk(&mut cells, n, || (), |_, i, row| {
        for (j, c) in row.iter_mut().enumerate() {
            let o = fast_argmax_pair_trusted(rows.row(i), cols.row(j), rows.perm(i), cols.perm(j), mode, semiring);
            *c = (o.value, o.probes as u32);
        }
    });
    let probes = cells.iter().map(|c| u64::from(c.1)).sum();
    Ok((cells.into_iter().map(|c| c.0).collect(), probes))
}
