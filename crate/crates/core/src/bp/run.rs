use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::FactorGraph;
use super::message::{incoming_table, message_core, Edge, Message, MessageCost, MessageMode, Node};
use super::prior::{presort_shared_prior_with, PresortedPrior, RowLayout};
use crate::argmax::{SearchMode, SortedPermutation};
use crate::error::{domain, Result};
use crate::tensor::{unflatten, Assignment, Factor, VarId};
use crate::{Execution, Semiring};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// Leaves-to-root then root-to-leaves over a BFS spanning forest; exact on trees.
    SequentialForwardBackward,
    /// Every edge once per iteration, in a freshly shuffled order.
    RandomSequential(u64),
    /// Every edge from the previous iteration's messages.
    Synchronous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    /// Maximum number of iterations.
    pub budget: usize,
    /// Stop once no message entry changes by more than this.
    pub tolerance: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { kind: ScheduleKind::SequentialForwardBackward, budget: 5, tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConfig {
    pub schedule: Schedule,
    pub mode: MessageMode,
    pub search: SearchMode,
    pub execution: Execution,
    /// Re-sort incoming tables by insertion sort from the previous order.
    pub adaptive_resort: bool,
    /// Keep every pre-normalization message table in update order.
    pub record_raw: bool,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            schedule: Schedule::default(),
            mode: MessageMode::Fast,
            search: SearchMode::EarlyStop,
            execution: Execution::default(),
            adaptive_resort: true,
            record_raw: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub iteration: usize,
    /// Largest absolute change of any normalized message entry.
    pub residual: f64,
    /// Factor cells combined.
    pub cells: u64,
    /// Cells a naive scan would have combined.
    pub naive_cells: u64,
    pub incoming_sorts: usize,
    pub incoming_resorts: usize,
    pub sort_time: Duration,
    pub search_time: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BpStats {
    /// Presorted priors built (one per homogeneity class or unshared factor).
    pub priors_built: usize,
    /// Row-sorting passes over factor tables (one per prior and direction).
    pub prior_sorts: usize,
    pub prior_sort_time: Duration,
}

#[derive(Debug, Clone)]
pub struct BpResult {
    /// Normalized max-marginal belief of every variable.
    pub beliefs: Vec<Factor>,
    pub edges: Vec<Edge>,
    /// Normalized factor-to-variable messages, parallel to `edges`.
    pub messages: Vec<Message>,
    pub trace: Vec<IterationTrace>,
    pub stats: BpStats,
    pub converged: bool,
    /// `(iteration, edge, table)` for every update before normalization, when requested.
    pub raw_history: Vec<(usize, usize, Vec<f64>)>,
}

impl BpResult {
    pub fn message(&self, factor: usize, var: VarId) -> Option<&[f64]> {
        self.edges
            .iter()
            .position(|e| e.factor == factor && e.var == var)
            .map(|i| self.messages[i].values.as_slice())
    }
}

struct Engine<'g> {
    graph: &'g FactorGraph,
    config: BpConfig,
    semiring: Semiring,
    edges: Vec<Edge>,
    layouts: Vec<RowLayout>,
    unary: Vec<Vec<f64>>,
    into_var: Vec<Vec<usize>>,
    priors: Vec<Option<Arc<PresortedPrior>>>,
}

struct EdgeUpdate {
    values: Vec<f64>,
    cost: MessageCost,
    perm: Option<SortedPermutation>,
    sorted: bool,
    resorted: bool,
    sort_time: Duration,
    search_time: Duration,
}

impl<'g> Engine<'g> {
    fn new(graph: &'g FactorGraph, config: BpConfig) -> Self {
        let semiring = graph.semiring();
        let mut edges = Vec::new();
        let mut unary: Vec<Vec<f64>> = graph.vars().iter().map(|v| vec![semiring.one(); v.card]).collect();
        for (fi, gf) in graph.factors().iter().enumerate() {
            let f = &gf.factor;
            match f.arity() {
                0 => {}
                1 => {
                    let u = &mut unary[f.vars()[0].id];
                    for (a, &b) in u.iter_mut().zip(f.values()) {
                        *a = semiring.combine(*a, b);
                    }
                }
                _ => {
                    for (pos, v) in f.vars().iter().enumerate() {
                        edges.push(Edge { factor: fi, pos, var: v.id });
                    }
                }
            }
        }
        let mut into_var = vec![Vec::new(); graph.num_vars()];
        for (e, edge) in edges.iter().enumerate() {
            into_var[edge.var].push(e);
        }
        let layouts = edges
            .iter()
            .map(|e| RowLayout::new(graph.factor(e.factor).factor.vars(), e.pos))
            .collect();
        Self { graph, config, semiring, edges, layouts, unary, into_var, priors: vec![None; graph.factors().len()] }
    }

    /// Sorts every data-independent class once, and every other factor once.
    fn build_priors(&mut self, stats: &mut BpStats) -> Result<()> {
        let start = Instant::now();
        let mut by_class: HashMap<usize, Arc<PresortedPrior>> = HashMap::new();
        for (fi, gf) in self.graph.factors().iter().enumerate() {
            let f = &gf.factor;
            if f.arity() < 2 {
                continue;
            }
            let dirs: Vec<usize> = (0..f.arity()).collect();
            let prior = match gf.class {
                Some(c) => match by_class.get(&c) {
                    Some(p) => {
                        p.validate_member(f, self.semiring)?;
                        Arc::clone(p)
                    }
                    None => {
                        let p = Arc::new(presort_shared_prior_with(f, &dirs, self.semiring, self.config.execution)?);
                        stats.priors_built += 1;
                        stats.prior_sorts += p.sorts();
                        by_class.insert(c, Arc::clone(&p));
                        p
                    }
                },
                None => {
                    let p = presort_shared_prior_with(f, &dirs, self.semiring, self.config.execution)?;
                    stats.priors_built += 1;
                    stats.prior_sorts += p.sorts();
                    Arc::new(p)
                }
            };
            self.priors[fi] = Some(prior);
        }
        stats.prior_sort_time += start.elapsed();
        Ok(())
    }

    fn var_to_factor(&self, v: VarId, factor: usize, msgs: &[Vec<f64>]) -> Vec<f64> {
        let mut out = self.unary[v].clone();
        for &e in &self.into_var[v] {
            if self.edges[e].factor != factor {
                for (a, &b) in out.iter_mut().zip(&msgs[e]) {
                    *a = self.semiring.combine(*a, b);
                }
            }
        }
        out
    }

    fn update(&self, e: usize, msgs: &[Vec<f64>], perm: Option<SortedPermutation>) -> Result<EdgeUpdate> {
        let edge = self.edges[e];
        let f = &self.graph.factor(edge.factor).factor;
        let inputs: Vec<Vec<f64>> = f
            .vars()
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != edge.pos)
            .map(|(_, v)| self.var_to_factor(v.id, edge.factor, msgs))
            .collect();
        let refs: Vec<&[f64]> = inputs.iter().map(|v| v.as_slice()).collect();
        let inc = incoming_table(&refs, self.semiring);
        let rows = f.vars()[edge.pos].card;

        let mut up = EdgeUpdate {
            values: Vec::new(),
            cost: MessageCost::default(),
            perm: None,
            sorted: false,
            resorted: false,
            sort_time: Duration::ZERO,
            search_time: Duration::ZERO,
        };
        if self.config.mode == MessageMode::Naive {
            let t = Instant::now();
            let (values, cost) =
                message_core(f.values(), &self.layouts[e], rows, &inc, MessageMode::Naive, None, self.config.search, self.semiring);
            up.search_time = t.elapsed();
            up.values = values;
            up.cost = cost;
            return Ok(up);
        }

        let prior = self.priors[edge.factor].as_ref().expect("priors built before fast updates");
        let t = Instant::now();
        let perm = match perm {
            Some(mut p) if self.config.adaptive_resort && p.len() == inc.len() => {
                let cap = 4 * inc.len() * (usize::BITS - inc.len().leading_zeros()) as usize;
                if p.resort_within(&inc[..], self.semiring, cap)? {
                    up.resorted = true;
                } else {
                    up.sorted = true;
                }
                p
            }
            _ => {
                up.sorted = true;
                SortedPermutation::sort(&inc[..], self.semiring)?
            }
        };
        up.sort_time = t.elapsed();
        let t = Instant::now();
        let (values, cost) = message_core(
            f.values(),
            prior.layout(edge.pos)?,
            rows,
            &inc,
            MessageMode::Fast,
            Some((prior, edge.pos, perm.as_ref())),
            self.config.search,
            self.semiring,
        );
        up.search_time = t.elapsed();
        up.values = values;
        up.cost = cost;
        up.perm = Some(perm);
        Ok(up)
    }

    /// `(roots, [(factor, parent var)])` of a BFS spanning forest, in discovery order.
    fn tree_order(&self) -> (Vec<VarId>, Vec<(usize, VarId)>) {
        tree_order(self.graph)
    }

    fn sequential_order(&self, rng: &mut Option<ChaCha8Rng>) -> Vec<usize> {
        match self.config.schedule.kind {
            ScheduleKind::SequentialForwardBackward => {
                let (_, order) = self.tree_order();
                let base = edge_bases(self.graph);
                let mut seq = Vec::with_capacity(self.edges.len());
                for &(f, p) in order.iter().rev() {
                    let pos = self.graph.factor(f).factor.position(p).expect("parent in scope");
                    seq.push(base[f] + pos);
                }
                for &(f, p) in &order {
                    for (pos, v) in self.graph.factor(f).factor.vars().iter().enumerate() {
                        if v.id != p {
                            seq.push(base[f] + pos);
                        }
                    }
                }
                seq
            }
            ScheduleKind::RandomSequential(_) => {
                let mut seq: Vec<usize> = (0..self.edges.len()).collect();
                seq.shuffle(rng.as_mut().expect("seeded"));
                seq
            }
            ScheduleKind::Synchronous => (0..self.edges.len()).collect(),
        }
    }
}

fn edge_bases(graph: &FactorGraph) -> Vec<usize> {
    let mut base = Vec::with_capacity(graph.factors().len());
    let mut next = 0;
    for gf in graph.factors() {
        base.push(next);
        if gf.factor.arity() >= 2 {
            next += gf.factor.arity();
        }
    }
    base
}

fn tree_order(graph: &FactorGraph) -> (Vec<VarId>, Vec<(usize, VarId)>) {
    let mut seen_var = vec![false; graph.num_vars()];
    let mut seen_factor = vec![false; graph.factors().len()];
    let mut roots = Vec::new();
    let mut order = Vec::new();
    for r in 0..graph.num_vars() {
        if seen_var[r] {
            continue;
        }
        seen_var[r] = true;
        roots.push(r);
        let mut queue = std::collections::VecDeque::from([r]);
        while let Some(v) = queue.pop_front() {
            for &f in graph.neighbors(v) {
                let factor = &graph.factor(f).factor;
                if seen_factor[f] || factor.arity() < 2 {
                    continue;
                }
                seen_factor[f] = true;
                order.push((f, v));
                for u in factor.vars() {
                    if !seen_var[u.id] {
                        seen_var[u.id] = true;
                        queue.push_back(u.id);
                    }
                }
            }
        }
    }
    (roots, order)
}

fn residual(old: &[f64], new: &[f64]) -> f64 {
    old.iter()
        .zip(new)
        .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
        .fold(0.0, |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) })
}

/// Runs max-product message passing and returns beliefs, messages and a per-iteration trace.
pub fn run_bp(graph: &FactorGraph, config: BpConfig) -> Result<BpResult> {
    if config.schedule.budget == 0 {
        return domain("iteration budget must be at least 1");
    }
    let semiring = graph.semiring();
    let mut engine = Engine::new(graph, config);
    let mut stats = BpStats::default();
    if config.mode == MessageMode::Fast {
        engine.build_priors(&mut stats)?;
    }
    let n_edges = engine.edges.len();
    let mut msgs: Vec<Vec<f64>> =
        engine.edges.iter().map(|e| vec![semiring.one(); graph.var(e.var).card]).collect();
    let mut stamps = vec![0usize; n_edges];
    let mut perms: Vec<Option<SortedPermutation>> = vec![None; n_edges];
    let mut rng = match config.schedule.kind {
        ScheduleKind::RandomSequential(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let mut raw_history = Vec::new();

    for it in 1..=config.schedule.budget {
        let before = msgs.clone();
        let mut tr = IterationTrace { iteration: it, ..IterationTrace::default() };
        let record = |up: &EdgeUpdate, tr: &mut IterationTrace| {
            tr.cells += up.cost.cells;
            tr.naive_cells += up.cost.naive_cells;
            tr.incoming_sorts += usize::from(up.sorted);
            tr.incoming_resorts += usize::from(up.resorted);
            tr.sort_time += up.sort_time;
            tr.search_time += up.search_time;
        };
        if config.schedule.kind == ScheduleKind::Synchronous {
            let engine_ref = &engine;
            let snapshot = &before;
            let perms_ref = &perms;
            let ups: Vec<Result<EdgeUpdate>> = config
                .execution
                .map(n_edges, |e| engine_ref.update(e, snapshot, perms_ref[e].clone()));
            for (e, up) in ups.into_iter().enumerate() {
                let mut up = up?;
                record(&up, &mut tr);
                if config.record_raw {
                    raw_history.push((it, e, up.values.clone()));
                }
                semiring.normalize(&mut up.values);
                msgs[e] = std::mem::take(&mut up.values);
                perms[e] = up.perm.take();
                stamps[e] = it;
            }
        } else {
            for e in engine.sequential_order(&mut rng) {
                let mut up = engine.update(e, &msgs, perms[e].take())?;
                record(&up, &mut tr);
                if config.record_raw {
                    raw_history.push((it, e, up.values.clone()));
                }
                semiring.normalize(&mut up.values);
                msgs[e] = std::mem::take(&mut up.values);
                perms[e] = up.perm.take();
                stamps[e] = it;
            }
        }
        tr.residual = before.iter().zip(&msgs).map(|(a, b)| residual(a, b)).fold(0.0, f64::max);
        let done = tr.residual < config.schedule.tolerance;
        trace.push(tr);
        if done {
            converged = true;
            break;
        }
    }

    let mut beliefs = Vec::with_capacity(graph.num_vars());
    for v in graph.vars() {
        let mut b = engine.var_to_factor(v.id, usize::MAX, &msgs);
        semiring.normalize(&mut b);
        beliefs.push(Factor::new(vec![*v], b)?);
    }
    let messages = engine
        .edges
        .iter()
        .zip(msgs)
        .zip(stamps)
        .map(|((e, values), stamp)| Message { from: Node::Factor(e.factor), to: Node::Var(e.var), values, stamp })
        .collect();
    Ok(BpResult { beliefs, edges: engine.edges, messages, trace, stats, converged, raw_history })
}

/// Extracts a MAP assignment: consistent backtracking on forests, per-variable
/// argmax of the beliefs otherwise. Ties go to the smallest state.
pub fn decode_map(result: &BpResult, graph: &FactorGraph) -> Result<Assignment> {
    if result.beliefs.is_empty() || result.beliefs.len() != graph.num_vars() {
        return domain("decoding needs one belief per variable");
    }
    let semiring = graph.semiring();
    let argbest = |vals: &[f64]| semiring.argbest(vals).expect("non-empty");
    let mut states: Vec<Option<usize>> = vec![None; graph.num_vars()];
    if graph.is_forest() {
        let msgs: Vec<Vec<f64>> = result.messages.iter().map(|m| m.values.clone()).collect();
        let engine = Engine::new(graph, BpConfig::default());
        let (roots, order) = tree_order(graph);
        for r in roots {
            states[r] = Some(argbest(result.beliefs[r].values()));
        }
        for (f, p) in order {
            let factor = &graph.factor(f).factor;
            let parent = Assignment::new(vec![graph.var(p)], vec![states[p].expect("parent decoded first")])?;
            let mut table = factor.restrict(&parent)?;
            for v in table.vars().to_vec() {
                let inc = Factor::new(vec![v], engine.var_to_factor(v.id, f, &msgs))?;
                table = table.combine(&inc, semiring)?;
            }
            let cell = argbest(table.values());
            for (v, s) in table.vars().iter().zip(unflatten(cell, table.vars())?) {
                states[v.id] = Some(s);
            }
        }
    }
    let states: Vec<usize> = states
        .iter()
        .zip(&result.beliefs)
        .map(|(s, b)| s.unwrap_or_else(|| argbest(b.values())))
        .collect();
    Assignment::new(graph.vars().to_vec(), states)
}
