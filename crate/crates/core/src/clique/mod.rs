//! Max-marginals of cliques whose potential factorizes into smaller terms.

mod grouped;
mod grouping;
mod matmul;
mod three;
mod view;

pub use grouped::{max_marginal_auto, max_marginal_grouped, max_marginal_grouped_with, GroupedConfig, BRUTE_FORCE_BELOW};
pub use grouping::{split_groups, CostEstimate, CostTerm, Grouping, MAX_EXHAUSTIVE_FACTORS};
pub use matmul::{funny_matmul, funny_matmul_with};
pub use three::{max_marginal_3clique, max_marginal_3clique_with, three_clique_sorted, ThreeCliqueTable};
pub use view::{sort_rows, sort_rows_with, SortedFactorView, SortedRows};
