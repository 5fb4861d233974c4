use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use maxprod_bench::config::{BenchConfig, Sizes};
use maxprod_bench::csvout::emit;
use maxprod_bench::denoise::{heldout_accuracy, load_corpus, run_denoise, BigramPrior, TextModel};
use maxprod_bench::fit::{fit_exponent, mean_by_size, read_columns};
use maxprod_bench::grid::{compare_grid, FlowTask, GridTask};
use maxprod_bench::{chain, lists, matmul, model};
use maxprod_core::argmax::SearchMode;
use maxprod_core::bp::{MessageMode, Schedule, ScheduleKind};
use maxprod_core::{Execution, Semiring};
use rand::SeedableRng;

#[derive(Debug, Parser)]
#[command(name = "maxprod", version, about = "Sorted-list max-product inference experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Sizes: `64`, `64,128`, or a doubling range `64..8192`
    #[arg(long, global = true)]
    n: Option<Sizes>,
    /// Number of lists
    #[arg(long, global = true, default_value_t = 2)]
    k: usize,
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Search mode; defaults to analysis for list benchmarks and early-stop elsewhere
    #[arg(long, global = true)]
    mode: Option<SearchMode>,
    /// Correlation between the two lists
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    corr: f64,
    /// CSV output path (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Model file
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true, default_value = "max-sum")]
    semiring: Semiring,
    /// Run data-parallel loops on one thread
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TaskArg {
    Random,
    Flow,
    Smooth,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScheduleArg {
    ForwardBackward,
    Random,
    Synchronous,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steps and probes on i.i.d. uniform lists
    BenchArgmax,
    /// Steps on two correlated Gaussian lists
    BenchCorrelated,
    /// Funny matrix products, fast against naive
    Matmul,
    /// Max-marginal of a model file, grouped against brute force
    Marginal {
        /// Target variable ids, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        vars: Vec<usize>,
    },
    /// Correct a noisy text, or measure held-out accuracy when no text is given
    Denoise {
        #[arg(long)]
        text: Option<String>,
        /// Training corpus (bundled sample when omitted)
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value = "chain")]
        text_model: TextModel,
        /// Fraction of the corpus used for training in held-out evaluation
        #[arg(long, default_value_t = 0.75)]
        train: f64,
    },
    /// Message passing on a grid, naive against fast
    Grid {
        #[arg(long, value_enum, default_value_t = TaskArg::Random)]
        task: TaskArg,
        #[arg(long, default_value_t = 20)]
        side: usize,
        #[arg(long, value_enum, default_value_t = ScheduleArg::Random)]
        schedule: ScheduleArg,
        #[arg(long, default_value_t = 5)]
        budget: usize,
        /// Timing repetitions (median reported)
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Exact inference cost on random chains
    Chain {
        #[arg(long, default_value_t = 10)]
        q: usize,
    },
    /// Log-log slope of a CSV column against another
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "n")]
        x: String,
        #[arg(long, default_value = "steps")]
        y: String,
        /// Fit every row instead of per-size means
        #[arg(long)]
        raw: bool,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let c = &cli.common;
    let out = c.out.as_deref();
    let exec = if c.sequential { Execution::Sequential } else { Execution::Parallel };
    let sizes = |default: &[usize]| c.n.clone().map_or_else(|| default.to_vec(), |s| s.0);
    let search = |default: SearchMode| c.mode.unwrap_or(default);

    match &cli.command {
        Command::BenchArgmax | Command::BenchCorrelated => {
            let cfg = BenchConfig {
                experiment: format!("{:?}", cli.command),
                sizes: sizes(&[64]),
                k: c.k,
                trials: c.trials,
                seed: c.seed,
                corr: c.corr,
                mode: search(SearchMode::Analysis),
                out: c.out.clone(),
            };
            if matches!(cli.command, Command::BenchArgmax) {
                emit(out, &lists::bench_argmax_with(&cfg, exec)?)?;
            } else {
                emit(out, &lists::bench_correlated_with(&cfg, exec)?)?;
            }
        }
        Command::Matmul => {
            let rows = matmul::bench_matmul(&sizes(&[64, 128, 256]), c.seed, c.semiring, search(SearchMode::EarlyStop), exec)?;
            emit(out, &rows)?;
        }
        Command::Marginal { vars } => {
            let path = c.model.as_deref().context("marginal needs --model")?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let graph = model::parse_model_in(&text, c.semiring)?;
            emit(out, &matmul::model_marginal(&graph, vars, search(SearchMode::EarlyStop))?)?;
        }
        Command::Denoise { text, corpus, eps, text_model, train } => {
            let corpus = load_corpus(corpus.as_deref())?;
            match text {
                Some(t) => denoise_text(&corpus, t, *eps, *text_model, out)?,
                None => {
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(c.seed);
                    emit(out, &[heldout_accuracy(&corpus, *train, *eps, *text_model, &mut rng)?])?;
                }
            }
        }
        Command::Grid { task, side, schedule, budget, reps } => {
            let kind = match schedule {
                ScheduleArg::ForwardBackward => ScheduleKind::SequentialForwardBackward,
                ScheduleArg::Random => ScheduleKind::RandomSequential(c.seed),
                ScheduleArg::Synchronous => ScheduleKind::Synchronous,
            };
            let schedule = Schedule { kind, budget: *budget, ..Schedule::default() };
            let mut rows = Vec::new();
            for n in sizes(&[16, 64]) {
                let task = match task {
                    TaskArg::Random => GridTask::Random { side: *side, n, seed: c.seed },
                    TaskArg::Smooth => GridTask::Smooth { side: *side, n, seed: c.seed },
                    TaskArg::Flow => GridTask::Flow(FlowTask::synthetic(*side, *side, n, (1, 0), c.seed)?),
                };
                rows.extend(compare_grid(&task, schedule, search(SearchMode::EarlyStop), *reps)?);
            }
            emit(out, &rows)?;
        }
        Command::Chain { q } => {
            let rows = chain::chain_scaling(
                &sizes(&[64, 128, 256, 512]),
                *q,
                c.trials,
                c.seed,
                &[MessageMode::Naive, MessageMode::Fast],
                search(SearchMode::EarlyStop),
                exec,
            )?;
            emit(out, &rows)?;
        }
        Command::Fit { input, x, y, raw } => {
            let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
            let mut pts = read_columns(&text, x, y)?;
            if !raw {
                if pts.iter().any(|p| p.0.fract() != 0.0 || p.0 < 0.0) {
                    bail!("column {x} must hold non-negative integers to average per size");
                }
                pts = mean_by_size(pts.into_iter().map(|(n, v)| (n as usize, v)));
            }
            emit(out, &[fit_exponent(&pts)?])?;
        }
    }
    Ok(())
}

fn denoise_text(corpus: &str, text: &str, eps: f64, model: TextModel, out: Option<&Path>) -> anyhow::Result<()> {
    let prior = BigramPrior::train(corpus, None)?;
    let result = run_denoise(&prior, text, eps, model)?;
    for w in &result.stats.warnings {
        eprintln!("warning: {w}");
    }
    let row = DenoisedRow { input: text.to_string(), output: result.text, score: result.score };
    emit(out, &[row])?;
    Ok(())
}

struct DenoisedRow {
    input: String,
    output: String,
    score: f64,
}

impl maxprod_bench::csvout::Record for DenoisedRow {
    const HEADER: &'static [&'static str] = &["input", "output", "score"];

    fn fields(&self) -> Vec<String> {
        vec![self.input.clone(), self.output.clone(), self.score.to_string()]
    }
}
