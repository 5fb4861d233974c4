use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::tensor::{union_all, Factor, VarId, Variable};

/// Factor counts up to this size are grouped by exhaustive search.
pub const MAX_EXHAUSTIVE_FACTORS: usize = 12;

const HEURISTIC_TUPLES: usize = 4096;

/// One row of the running-time table: `coeff · N^exponent · (log N)^log_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTerm {
    pub label: String,
    pub coeff: f64,
    pub exponent: f64,
    pub log_power: u32,
}

impl CostTerm {
    fn new(label: impl Into<String>, coeff: f64, exponent: f64, log_power: u32) -> Self {
        Self { label: label.into(), coeff, exponent, log_power }
    }

    pub fn evaluate(&self, n: f64) -> f64 {
        self.coeff * n.powf(self.exponent) * n.ln().max(1.0).powi(self.log_power as i32)
    }
}

/// Symbolic cost of a marginalization strategy, with `N` states per variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CostEstimate {
    pub terms: Vec<CostTerm>,
}

const EPS: f64 = 1e-9;

impl CostEstimate {
    /// Cost of enumerating a joint table over `vars` variables.
    pub fn brute(vars: usize) -> Self {
        Self { terms: vec![CostTerm::new("brute force", 1.0, vars as f64, 0)] }
    }

    pub fn total(&self, n: f64) -> f64 {
        self.terms.iter().map(|t| t.evaluate(n)).sum()
    }

    /// Largest exponent of `N` over all terms.
    pub fn exponent(&self) -> f64 {
        self.terms.iter().map(|t| t.exponent).fold(0.0, f64::max)
    }

    /// `(exponent, log power, summed coefficient)` of the asymptotically dominant terms.
    pub fn dominant(&self) -> (f64, u32, f64) {
        let e = self.exponent();
        let top: Vec<&CostTerm> = self.terms.iter().filter(|t| t.exponent > e - EPS).collect();
        let l = top.iter().map(|t| t.log_power).max().unwrap_or(0);
        let c = top.iter().filter(|t| t.log_power == l).map(|t| t.coeff).sum();
        (e, l, c)
    }

    /// Orders by dominant exponent, then log power, then constant.
    pub fn compare(&self, other: &CostEstimate) -> Ordering {
        let (e1, l1, c1) = self.dominant();
        let (e2, l2, c2) = other.dominant();
        if (e1 - e2).abs() > EPS {
            return e1.total_cmp(&e2);
        }
        l1.cmp(&l2).then(c1.total_cmp(&c2))
    }
}

/// A partition of a clique's factors into `X` (first, containing the target)
/// and `K ≥ 2` further groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    groups: Vec<Vec<usize>>,
    target: Vec<VarId>,
    group_vars: Vec<Vec<VarId>>,
    interfaces: Vec<Vec<VarId>>,
    search: Vec<VarId>,
    clique_vars: usize,
    cost: CostEstimate,
}

/// Variable sets as bit masks over the sorted clique scope.
#[derive(Debug, Clone)]
struct Universe {
    vars: Vec<Variable>,
    factor_masks: Vec<u64>,
    all: u64,
}

impl Universe {
    fn new(factors: &[Factor]) -> Result<Self> {
        let vars = union_all(factors.iter().map(|f| f.vars()))?;
        if vars.len() > 64 {
            return domain("cliques over more than 64 variables are not supported");
        }
        let factor_masks = factors.iter().map(|f| mask_of(&vars, &f.var_ids())).collect();
        let all = if vars.len() == 64 { u64::MAX } else { (1u64 << vars.len()) - 1 };
        Ok(Self { vars, factor_masks, all })
    }

    fn mask(&self, ids: &[VarId]) -> Result<u64> {
        let mut m = 0;
        for id in ids {
            let p = self.vars.iter().position(|v| v.id == *id).ok_or_else(|| {
                Error::Domain(format!("target variable {id} is not in any factor"))
            })?;
            m |= 1 << p;
        }
        Ok(m)
    }

    fn ids(&self, mask: u64) -> Vec<VarId> {
        self.vars.iter().enumerate().filter(|(p, _)| mask >> p & 1 == 1).map(|(_, v)| v.id).collect()
    }
}

fn mask_of(vars: &[Variable], ids: &[VarId]) -> u64 {
    ids.iter()
        .filter_map(|id| vars.iter().position(|v| v.id == *id))
        .fold(0, |m, p| m | 1 << p)
}

/// Derived interface sets of a grouping, as masks. `groups[0]` is X.
struct Shape {
    vars: Vec<u64>,
    interfaces: Vec<u64>,
    search: u64,
}

fn shape(group_masks: &[u64], target: u64) -> Shape {
    let x = group_masks[0];
    let others = &group_masks[1..];
    let mut once = 0u64;
    let mut twice = 0u64;
    for &g in others {
        twice |= once & g;
        once |= g;
    }
    let mut interfaces = Vec::with_capacity(group_masks.len());
    interfaces.push((once & x) | target);
    for (i, &g) in others.iter().enumerate() {
        let rest = others.iter().enumerate().filter(|&(j, _)| j != i).fold(x, |m, (_, &h)| m | h);
        interfaces.push(rest & g);
    }
    Shape { vars: group_masks.to_vec(), interfaces, search: twice & !x }
}

fn cost_of(s: &Shape) -> CostEstimate {
    let k = s.vars.len() - 1;
    let w = s.search.count_ones() as f64;
    let x_iface = s.interfaces[0].count_ones() as f64;
    let mut terms = vec![CostTerm::new("marginalize X", 1.0, s.vars[0].count_ones() as f64, 0)];
    for g in 1..=k {
        terms.push(CostTerm::new(format!("marginalize group {g}"), 1.0, s.vars[g].count_ones() as f64, 0));
    }
    if s.search != 0 {
        for g in 1..=k {
            let list = (s.vars[g] & s.vars[0]) | s.search;
            terms.push(CostTerm::new(format!("sort group {g}"), w, list.count_ones() as f64, 1));
        }
        terms.push(CostTerm::new("search", k as f64, x_iface + w * (k as f64 - 1.0) / k as f64, 0));
    } else {
        terms.push(CostTerm::new("combine", k as f64, x_iface, 0));
    }
    terms.push(CostTerm::new("marginalize onto target", 1.0, x_iface, 0));
    CostEstimate { terms }
}

fn proper(masks: &[u64], target: u64, all: u64) -> bool {
    masks.iter().all(|&m| m != 0 && m != all) && target & !masks[0] == 0
}

impl Grouping {
    /// Validates a partition of `factors` (by index, `groups[0]` being X) and
    /// derives its interface sets and cost.
    pub fn new(factors: &[Factor], target: &[VarId], groups: Vec<Vec<usize>>) -> Result<Self> {
        if groups.len() < 3 {
            return domain(format!("a grouping needs at least 3 groups, got {}", groups.len()));
        }
        let mut seen = vec![false; factors.len()];
        for &f in groups.iter().flatten() {
            match seen.get_mut(f) {
                None => return domain(format!("factor index {f} out of range")),
                Some(true) => return domain(format!("factor {f} assigned to two groups")),
                Some(s) => *s = true,
            }
        }
        if let Some(f) = seen.iter().position(|s| !s) {
            return domain(format!("factor {f} is not in any group"));
        }
        if groups.iter().any(|g| g.is_empty()) {
            return domain("groups must be non-empty");
        }
        let u = Universe::new(factors)?;
        let t = u.mask(target)?;
        let masks: Vec<u64> =
            groups.iter().map(|g| g.iter().fold(0, |m, &f| m | u.factor_masks[f])).collect();
        if t & !masks[0] != 0 {
            return domain("the target must lie within the variables of X");
        }
        Ok(Self::from_masks(&u, t, groups, &masks))
    }

    fn from_masks(u: &Universe, t: u64, groups: Vec<Vec<usize>>, masks: &[u64]) -> Self {
        let s = shape(masks, t);
        Self {
            groups,
            target: u.ids(t),
            group_vars: s.vars.iter().map(|&m| u.ids(m)).collect(),
            interfaces: s.interfaces.iter().map(|&m| u.ids(m)).collect(),
            search: u.ids(s.search),
            clique_vars: u.vars.len(),
            cost: cost_of(&s),
        }
    }

    /// Number of groups besides X, i.e. the number of searched lists.
    pub fn k(&self) -> usize {
        self.groups.len() - 1
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn target(&self) -> &[VarId] {
        &self.target
    }

    /// Variables touched by group `g`.
    pub fn group_vars(&self, g: usize) -> &[VarId] {
        &self.group_vars[g]
    }

    /// `X'` for `g = 0`, otherwise the variables group `g` shares with any other group.
    pub fn interface(&self, g: usize) -> &[VarId] {
        &self.interfaces[g]
    }

    /// Variables outside X shared by at least two other groups; the searched lists range over these.
    pub fn search_vars(&self) -> &[VarId] {
        &self.search
    }

    pub fn cost(&self) -> &CostEstimate {
        &self.cost
    }

    /// Every group misses at least one clique variable.
    pub fn is_proper(&self) -> bool {
        self.group_vars.iter().all(|g| g.len() < self.clique_vars)
    }
}

/// Finds the cheapest proper grouping of `factors` into `k + 1` groups with
/// the target inside X.
pub fn split_groups(factors: &[Factor], target: &[VarId], k: usize) -> Result<Grouping> {
    if k < 2 {
        return domain("need at least two groups besides X");
    }
    let u = Universe::new(factors)?;
    let t = u.mask(target)?;
    match search(&u, t, k + 1) {
        Some((groups, masks)) => Ok(Grouping::from_masks(&u, t, groups, &masks)),
        None => Err(Error::NoFeasibleGrouping {
            requested: k + 1,
            smallest_feasible: (3..=factors.len()).find(|&g| g != k + 1 && search(&u, t, g).is_some()),
        }),
    }
}

type Found = (Vec<Vec<usize>>, Vec<u64>);

fn search(u: &Universe, t: u64, groups: usize) -> Option<Found> {
    let n = u.factor_masks.len();
    if groups > n {
        return None;
    }
    if n <= MAX_EXHAUSTIVE_FACTORS {
        exhaustive(u, t, groups)
    } else {
        heuristic(u, t, groups)
    }
}

fn masks_of(u: &Universe, labels: &[usize], groups: usize) -> Vec<u64> {
    let mut m = vec![0u64; groups];
    for (f, &l) in labels.iter().enumerate() {
        m[l] |= u.factor_masks[f];
    }
    m
}

fn to_groups(labels: &[usize], order: &[usize]) -> Vec<Vec<usize>> {
    order
        .iter()
        .map(|&b| labels.iter().enumerate().filter(|&(_, &l)| l == b).map(|(f, _)| f).collect())
        .collect()
}

fn consider(best: &mut Option<(CostEstimate, Found)>, u: &Universe, t: u64, labels: &[usize], masks: &[u64]) {
    let groups = masks.len();
    for x in 0..groups {
        let mut order = vec![x];
        order.extend((0..groups).filter(|&b| b != x));
        let ordered: Vec<u64> = order.iter().map(|&b| masks[b]).collect();
        if !proper(&ordered, t, u.all) {
            continue;
        }
        let c = cost_of(&shape(&ordered, t));
        if best.as_ref().is_none_or(|(bc, _)| c.compare(bc) == Ordering::Less) {
            *best = Some((c, (to_groups(labels, &order), ordered)));
        }
    }
}

/// Restricted-growth enumeration of all set partitions into exactly `groups` blocks.
fn exhaustive(u: &Universe, t: u64, groups: usize) -> Option<Found> {
    let n = u.factor_masks.len();
    let mut best = None;
    let mut labels = vec![0usize; n];
    fn rec(
        i: usize,
        used: usize,
        labels: &mut Vec<usize>,
        groups: usize,
        u: &Universe,
        t: u64,
        best: &mut Option<(CostEstimate, Found)>,
    ) {
        let n = labels.len();
        if n - i < groups - used {
            return;
        }
        if i == n {
            let masks = masks_of(u, labels, groups);
            consider(best, u, t, labels, &masks);
            return;
        }
        for l in 0..=used.min(groups - 1) {
            labels[i] = l;
            rec(i + 1, used.max(l + 1), labels, groups, u, t, best);
        }
    }
    if n == 0 {
        return None;
    }
    rec(1, 1, &mut labels, groups, u, t, &mut best);
    best.map(|(_, f)| f)
}

/// For large factor sets: pick one excluded variable per group, assign each
/// factor greedily to a group that avoids its excluded variable, then
/// hill-climb by moving single factors.
fn heuristic(u: &Universe, t: u64, groups: usize) -> Option<Found> {
    let nv = u.vars.len();
    if nv < groups {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ groups as u64);
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let candidates: Vec<usize> = (0..nv).collect();
    for _ in 0..HEURISTIC_TUPLES {
        let mut c = candidates.clone();
        c.shuffle(&mut rng);
        c.truncate(groups);
        if t >> c[0] & 1 == 0 && !tuples.contains(&c) {
            tuples.push(c);
        }
    }
    let mut best: Option<(CostEstimate, Vec<usize>)> = None;
    for excl in tuples {
        let Some(mut labels) = greedy(u, &excl) else { continue };
        climb(u, t, groups, &mut labels);
        let masks = masks_of(u, &labels, groups);
        if !proper(&masks, t, u.all) {
            continue;
        }
        let c = cost_of(&shape(&masks, t));
        if best.as_ref().is_none_or(|(bc, _)| c.compare(bc) == Ordering::Less) {
            best = Some((c, labels));
        }
    }
    let (_, labels) = best?;
    let masks = masks_of(u, &labels, groups);
    Some((to_groups(&labels, &(0..groups).collect::<Vec<_>>()), masks))
}

fn greedy(u: &Universe, excl: &[usize]) -> Option<Vec<usize>> {
    let groups = excl.len();
    let mut masks = vec![0u64; groups];
    let mut labels = Vec::with_capacity(u.factor_masks.len());
    for &fm in &u.factor_masks {
        let g = (0..groups)
            .filter(|&g| fm >> excl[g] & 1 == 0)
            .min_by_key(|&g| ((masks[g] | fm).count_ones(), g))?;
        masks[g] |= fm;
        labels.push(g);
    }
    Some(labels)
}

fn climb(u: &Universe, t: u64, groups: usize, labels: &mut [usize]) {
    let score = |labels: &[usize]| {
        let masks = masks_of(u, labels, groups);
        let counts = (0..groups).map(|g| labels.iter().filter(|&&l| l == g).count());
        if !proper(&masks, t, u.all) || counts.into_iter().any(|c| c == 0) {
            None
        } else {
            Some(cost_of(&shape(&masks, t)))
        }
    };
    let mut current = score(labels);
    loop {
        let mut improved = false;
        for f in 0..labels.len() {
            let old = labels[f];
            for g in 0..groups {
                if g == old {
                    continue;
                }
                labels[f] = g;
                let s = score(labels);
                let better = match (&s, &current) {
                    (Some(a), Some(b)) => a.compare(b) == Ordering::Less,
                    (Some(_), None) => true,
                    _ => false,
                };
                if better {
                    current = s;
                    improved = true;
                    break;
                }
                labels[f] = old;
            }
        }
        if !improved {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(ids: &[usize]) -> Factor {
        let vars: Vec<Variable> = ids.iter().map(|&i| Variable::new(i, 2)).collect();
        Factor::constant(vars, 0.0).unwrap()
    }

    #[test]
    fn three_clique_canonical() {
        let fs = [f(&[0, 1]), f(&[0, 2]), f(&[1, 2])];
        let g = split_groups(&fs, &[0, 1], 2).unwrap();
        assert_eq!(g.groups()[0], vec![0]);
        let mut rest: Vec<Vec<usize>> = g.groups()[1..].to_vec();
        rest.sort();
        assert_eq!(rest, vec![vec![1], vec![2]]);
        assert_eq!(g.search_vars(), &[2]);
        assert_eq!(g.interface(0), &[0, 1]);
        let (e, l, _) = g.cost().dominant();
        assert!((e - 2.5).abs() < 1e-12 && l == 0);
        let sort = g.cost().terms.iter().find(|t| t.label.starts_with("sort")).unwrap();
        assert_eq!((sort.exponent, sort.log_power), (2.0, 1));
        let marg = g.cost().terms.iter().find(|t| t.label == "marginalize X").unwrap();
        assert_eq!(marg.exponent, 2.0);
    }

    #[test]
    fn four_triplets_need_four_groups() {
        let fs = [f(&[0, 1, 2]), f(&[0, 1, 3]), f(&[0, 2, 3]), f(&[1, 2, 3])];
        let g = split_groups(&fs, &[0, 1, 2], 3).unwrap();
        assert!(g.groups().iter().all(|g| g.len() == 1));
        assert_eq!(g.groups()[0], vec![0]);
        assert_eq!(
            split_groups(&fs, &[0, 1, 2], 2).unwrap_err(),
            Error::NoFeasibleGrouping { requested: 3, smallest_feasible: Some(4) }
        );
    }

    #[test]
    fn identical_scopes_infeasible() {
        let fs = [f(&[0, 1]), f(&[0, 1]), f(&[0, 1])];
        assert_eq!(
            split_groups(&fs, &[0], 2).unwrap_err(),
            Error::NoFeasibleGrouping { requested: 3, smallest_feasible: None }
        );
    }

    #[test]
    fn new_validates_partition() {
        let fs = [f(&[0, 1]), f(&[0, 2]), f(&[1, 2])];
        assert!(Grouping::new(&fs, &[0, 1], vec![vec![0], vec![1]]).is_err());
        assert!(Grouping::new(&fs, &[0, 1], vec![vec![0], vec![1], vec![1, 2]]).is_err());
        assert!(Grouping::new(&fs, &[0, 1], vec![vec![0], vec![1], vec![]]).is_err());
        assert!(Grouping::new(&fs, &[0, 1], vec![vec![1], vec![0], vec![2]]).is_err());
        assert!(Grouping::new(&fs, &[0, 1], vec![vec![0], vec![1], vec![2]]).is_ok());
    }

    #[test]
    fn complete_graphs_beat_brute_force() {
        for m in 3..=8usize {
            let mut fs = vec![];
            for a in 0..m {
                for b in a + 1..m {
                    fs.push(f(&[a, b]));
                }
            }
            let g = split_groups(&fs, &[0, 1], 2).unwrap();
            assert!(g.is_proper());
            assert!(g.cost().exponent() <= m as f64, "m={m}: {:?}", g.cost());
        }
    }
}
