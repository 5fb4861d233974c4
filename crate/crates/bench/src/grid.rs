//! Grid models: synthetic optical flow, random potentials, and a smooth
//! quadratic model on which the sorted search degrades.

use std::time::Instant;

use maxprod_core::argmax::SearchMode;
use maxprod_core::bp::{build_topology, decode_map, run_bp, BpConfig, FactorGraph, MessageMode, Pairwise, Schedule, Topology};
use maxprod_core::{Execution, Semiring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csvout::Record;
use crate::error::{config, Result};

/// Unary score of a flow vector that leaves the second image.
pub const OUT_OF_BOUNDS: f64 = -256.0;

/// Two gray-level images and a square grid of candidate flow vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTask {
    pub width: usize,
    pub height: usize,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    /// States per pixel; a perfect square.
    pub n: usize,
    /// Weight of the flow-difference penalty between neighbours.
    pub smoothness: f64,
}

impl FlowTask {
    pub fn new(width: usize, height: usize, first: Vec<f64>, second: Vec<f64>, n: usize, smoothness: f64) -> Result<Self> {
        let side = n.isqrt();
        if n == 0 || side * side != n {
            return config(format!("flow needs a perfect-square state count, got {n}"));
        }
        if width < 2 || height < 2 || first.len() != width * height || second.len() != width * height {
            return config("flow images must both be width × height with both sides at least 2");
        }
        Ok(Self { width, height, first, second, n, smoothness })
    }

    /// Seeded random texture, and the same texture moved by `shift`.
    pub fn synthetic(width: usize, height: usize, n: usize, shift: (i64, i64), seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first: Vec<f64> = (0..width * height).map(|_| rng.random_range(0..256) as f64).collect();
        let mut second: Vec<f64> = (0..width * height).map(|_| rng.random_range(0..256) as f64).collect();
        for y in 0..height as i64 {
            for x in 0..width as i64 {
                let (tx, ty) = (x + shift.0, y + shift.1);
                if (0..width as i64).contains(&tx) && (0..height as i64).contains(&ty) {
                    second[ty as usize * width + tx as usize] = first[y as usize * width + x as usize];
                }
            }
        }
        Self::new(width, height, first, second, n, 1.0)
    }

    /// Flow vector of a state, each component in `[-√N/2, √N/2)`.
    pub fn flow(&self, state: usize) -> (i64, i64) {
        let side = self.n.isqrt() as i64;
        let s = state as i64;
        (s % side - side / 2, s / side - side / 2)
    }

    /// The state encoding the zero vector.
    pub fn zero_state(&self) -> usize {
        let side = self.n.isqrt();
        (side / 2) * side + side / 2
    }

    pub fn graph(&self) -> Result<FactorGraph> {
        let pairwise: Vec<f64> = (0..self.n * self.n)
            .map(|ab| {
                let (a, b) = (self.flow(ab / self.n), self.flow(ab % self.n));
                let d = (((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as f64).sqrt();
                -self.smoothness * d
            })
            .collect();
        let unary = |p: usize| {
            let (x, y) = ((p % self.width) as i64, (p / self.width) as i64);
            Some(
                (0..self.n)
                    .map(|s| {
                        let (dx, dy) = self.flow(s);
                        let (tx, ty) = (x + dx, y + dy);
                        if (0..self.width as i64).contains(&tx) && (0..self.height as i64).contains(&ty) {
                            -(self.first[p] - self.second[ty as usize * self.width + tx as usize]).abs()
                        } else {
                            OUT_OF_BOUNDS
                        }
                    })
                    .collect(),
            )
        };
        Ok(build_topology(Topology::Grid(self.height, self.width), self.n, Semiring::MaxSum, unary, Pairwise::Shared(pairwise))?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridTask {
    Flow(FlowTask),
    /// Uniform random unary tables and one shared random pairwise table.
    Random { side: usize, n: usize, seed: u64 },
    /// Quadratic unary around a random target per pixel, quadratic smoothness between neighbours.
    Smooth { side: usize, n: usize, seed: u64 },
}

impl GridTask {
    pub fn name(&self) -> &'static str {
        match self {
            GridTask::Flow(_) => "flow",
            GridTask::Random { .. } => "random",
            GridTask::Smooth { .. } => "smooth",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            GridTask::Flow(f) => f.n,
            GridTask::Random { n, .. } | GridTask::Smooth { n, .. } => *n,
        }
    }

    pub fn graph(&self) -> Result<FactorGraph> {
        match self {
            GridTask::Flow(f) => f.graph(),
            &GridTask::Random { side, n, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let unary: Vec<Vec<f64>> = (0..side * side).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
                let pairwise: Vec<f64> = (0..n * n).map(|_| rng.random()).collect();
                Ok(build_topology(
                    Topology::Grid(side, side),
                    n,
                    Semiring::MaxSum,
                    |v| Some(unary[v].clone()),
                    Pairwise::Shared(pairwise),
                )?)
            }
            &GridTask::Smooth { side, n, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let scale = 1.0 / (n * n) as f64;
                let unary: Vec<Vec<f64>> = (0..side * side)
                    .map(|_| {
                        let target = rng.random_range(0..n) as f64;
                        (0..n).map(|s| -scale * (s as f64 - target).powi(2)).collect()
                    })
                    .collect();
                let pairwise: Vec<f64> =
                    (0..n * n).map(|ab| -scale * ((ab / n) as f64 - (ab % n) as f64).powi(2)).collect();
                Ok(build_topology(
                    Topology::Grid(side, side),
                    n,
                    Semiring::MaxSum,
                    |v| Some(unary[v].clone()),
                    Pairwise::Shared(pairwise),
                )?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub states: Vec<usize>,
    /// Factor cells combined over all iterations.
    pub probes: u64,
    pub naive: u64,
    /// Median wall-clock seconds over the repetitions.
    pub seconds: f64,
    pub iterations: usize,
}

impl GridRun {
    /// Average entries probed per maximization.
    pub fn mean_probes(&self, n: usize) -> f64 {
        if self.naive == 0 {
            return 0.0;
        }
        self.probes as f64 * n as f64 / self.naive as f64
    }
}

pub fn run_grid(
    task: &GridTask,
    schedule: Schedule,
    mode: MessageMode,
    search: SearchMode,
    execution: Execution,
    repetitions: usize,
) -> Result<GridRun> {
    let g = task.graph()?;
    let cfg = BpConfig { schedule, mode, search, execution, ..BpConfig::default() };
    let mut times = Vec::with_capacity(repetitions.max(1));
    let mut last = None;
    for _ in 0..repetitions.max(1) {
        let start = Instant::now();
        let r = run_bp(&g, cfg)?;
        let states = decode_map(&r, &g)?.states().to_vec();
        times.push(start.elapsed().as_secs_f64());
        last = Some((r, states));
    }
    let (r, states) = last.expect("at least one repetition");
    times.sort_by(f64::total_cmp);
    Ok(GridRun {
        states,
        probes: r.trace.iter().map(|t| t.cells).sum(),
        naive: r.trace.iter().map(|t| t.naive_cells).sum(),
        seconds: times[times.len() / 2],
        iterations: r.trace.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub task: &'static str,
    pub n: usize,
    pub mode: MessageMode,
    pub iterations: usize,
    pub probes: u64,
    pub naive: u64,
    pub mean_probes: f64,
    pub seconds: f64,
    /// Whether the decoded states equal those of the other mode.
    pub agree: bool,
}

impl Record for GridRow {
    const HEADER: &'static [&'static str] =
        &["task", "n", "mode", "iterations", "probes", "naive", "mean_probes", "seconds", "agree"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.task.to_string(),
            self.n.to_string(),
            format!("{:?}", self.mode).to_lowercase(),
            self.iterations.to_string(),
            self.probes.to_string(),
            self.naive.to_string(),
            self.mean_probes.to_string(),
            self.seconds.to_string(),
            self.agree.to_string(),
        ]
    }
}

/// Runs a task in naive and fast mode and reports both.
pub fn compare_grid(task: &GridTask, schedule: Schedule, search: SearchMode, repetitions: usize) -> Result<Vec<GridRow>> {
    let naive = run_grid(task, schedule, MessageMode::Naive, search, Execution::default(), repetitions)?;
    let fast = run_grid(task, schedule, MessageMode::Fast, search, Execution::default(), repetitions)?;
    let agree = naive.states == fast.states;
    let n = task.n();
    Ok([(MessageMode::Naive, naive), (MessageMode::Fast, fast)]
        .into_iter()
        .map(|(mode, r)| GridRow {
            task: task.name(),
            n,
            mode,
            iterations: r.iterations,
            probes: r.probes,
            naive: r.naive,
            mean_probes: r.mean_probes(n),
            seconds: r.seconds,
            agree,
        })
        .collect())
}
