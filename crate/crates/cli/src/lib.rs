//! Command-line front end: generation, stream replay, verification and
//! benchmarking.

pub mod bench;
pub mod metrics;
pub mod replay;

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dhsparse::format::{parse_dhg, write_dhg, write_dhu, StreamItem};
use dhsparse::generate::{EdgeSampler, StreamGen, WeightDist};
use dhsparse::rng::derive_labeled;
use dhsparse::verify::{check_all_cuts, check_random_vectors, ApproxReport, MAX_CUT_VERTICES};
use dhsparse::{spectral_sparsify, Hypergraph, Scheduler, SparsifyConfig};

use crate::metrics::VerificationSummary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const SEED_HELP: &str = "Root seed. Sub-seeds are derived by labeled hashing: \
`gen` edges, `stream` updates, `sparsify` sampling coins, `verify` probe vectors";

#[derive(Debug, Parser)]
#[command(name = "dhsparse", version, about = "Spectral sparsifiers of directed hypergraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random hypergraph in .dhg format.
    Gen(GenArgs),
    /// Write a random update stream in .dhu format.
    Stream(StreamArgs),
    /// Replay an update stream through the dynamic sparsifier.
    Run(RunArgs),
    /// Sparsify a hypergraph and check the approximation guarantee.
    Verify(VerifyArgs),
    /// Time random update workloads over a grid of sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Target accuracy, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0, help = SEED_HELP)]
    pub seed: u64,
    /// Coreset size constant.
    #[arg(long = "c-lambda", default_value_t = 1.0)]
    pub c_lambda: f64,
    /// Recursion threshold constant (at least 3).
    #[arg(long, default_value_t = 3.0)]
    pub c: f64,
    /// Fixed per-pair coreset size, replacing the formula.
    #[arg(long = "lambda-override")]
    pub lambda_override: Option<usize>,
    /// Fixed recursion threshold m★, replacing the formula.
    #[arg(long = "mstar-override")]
    pub mstar_override: Option<usize>,
}

impl ConfigArgs {
    pub fn sparsify_config(&self) -> SparsifyConfig {
        SparsifyConfig {
            eps: self.eps,
            c_lambda: self.c_lambda,
            c: self.c,
            lambda_override: self.lambda_override,
            mstar_override: self.mstar_override,
            seed: derive_labeled(self.seed, "sparsify"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchedulerArg {
    Seq,
    Par,
}

impl From<SchedulerArg> for Scheduler {
    fn from(s: SchedulerArg) -> Self {
        match s {
            SchedulerArg::Seq => Scheduler::Sequential,
            SchedulerArg::Par => Scheduler::Parallel,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Maximum |T ∪ H| per edge.
    #[arg(long)]
    pub r: usize,
    /// uniform | pareto:<shape> | const:<weight>
    #[arg(long, default_value = "uniform")]
    pub weights: WeightDist,
    #[arg(long, default_value_t = 0, help = SEED_HELP)]
    pub seed: u64,
    /// Permit r = 1, which only yields self-loops.
    #[arg(long)]
    pub allow_self: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct StreamArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    /// Number of updates.
    #[arg(long)]
    pub updates: usize,
    /// Edges of the graph the stream starts from (ids 0..initial-m).
    #[arg(long = "initial-m", default_value_t = 0)]
    pub initial_m: usize,
    /// Never exceed this many live edges.
    #[arg(long = "max-live")]
    pub max_live: usize,
    /// Probability that an update is an insertion.
    #[arg(long = "p-add", default_value_t = 0.5)]
    pub p_add: f64,
    /// Group updates into `batch` blocks of this size.
    #[arg(long = "batch-size", default_value_t = 1)]
    pub batch_size: usize,
    #[arg(long, default_value = "uniform")]
    pub weights: WeightDist,
    #[arg(long, default_value_t = 0, help = SEED_HELP)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Cuts,
    Random,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Initial hypergraph (.dhg). Its edges get ids 0..m.
    #[arg(long, conflicts_with = "empty")]
    pub graph: Option<PathBuf>,
    /// Start from an empty hypergraph on `--n` vertices.
    #[arg(long, requires = "n")]
    pub empty: bool,
    #[arg(long)]
    pub n: Option<usize>,
    /// Update stream (.dhu).
    #[arg(long)]
    pub stream: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Capacity; defaults to the initial size plus the stream's insertions.
    #[arg(long = "max-m")]
    pub max_m: Option<usize>,
    #[arg(long, value_enum, default_value = "seq")]
    pub scheduler: SchedulerArg,
    /// Group consecutive single updates into batches of this size.
    #[arg(long = "batch-size", default_value_t = 1)]
    pub batch_size: usize,
    /// Record metrics for every update step.
    #[arg(long = "per-update")]
    pub per_update: bool,
    /// Check the final sparsifier against the live hypergraph.
    #[arg(long = "verify-mode", value_enum)]
    pub verify_mode: Option<VerifyMode>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Write metrics here instead of stdout.
    #[arg(long = "out-json")]
    pub out_json: Option<PathBuf>,
    /// Write the final sparsifier as .dhg (edges renumbered in id order).
    #[arg(long = "dump-sparsifier")]
    pub dump_sparsifier: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Hypergraph to sparsify (.dhg).
    pub graph: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: VerifyMode,
    /// Random probe vectors.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Scale every sparsifier weight by 1/4 before checking.
    #[arg(long = "test-corrupt")]
    pub test_corrupt: bool,
    #[arg(long = "out-json")]
    pub out_json: Option<PathBuf>,
    #[arg(long = "dump-sparsifier")]
    pub dump_sparsifier: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "32")]
    pub n: Vec<usize>,
    /// Live edge counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8192")]
    pub m: Vec<usize>,
    /// Ranks, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub r: Vec<usize>,
    /// Timed updates per run; defaults to 2m.
    #[arg(long)]
    pub updates: Option<usize>,
    /// Runs averaged per cell.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum, default_value = "seq")]
    pub scheduler: SchedulerArg,
    #[arg(long = "batch-size", default_value_t = 1)]
    pub batch_size: usize,
    /// Emit JSON rows instead of CSV.
    #[arg(long)]
    pub json: bool,
    #[arg(long = "out-json")]
    pub out_json: Option<PathBuf>,
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn read_graph(path: &Path) -> anyhow::Result<Hypergraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dhg(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_gen(a: &GenArgs) -> anyhow::Result<()> {
    let mut s = EdgeSampler::new(a.n, a.r, a.weights, derive_labeled(a.seed, "gen"), a.allow_self)?;
    let h = Hypergraph::new(a.n, (0..a.m).map(|_| s.next_spec()))?;
    emit(a.out.as_deref(), &write_dhg(&h))
}

fn cmd_stream(a: &StreamArgs) -> anyhow::Result<()> {
    if a.batch_size == 0 {
        bail!("batch size must be at least 1");
    }
    if !(0.0..=1.0).contains(&a.p_add) {
        bail!("p-add must lie in [0, 1]");
    }
    let mut g = StreamGen::new(
        a.n,
        a.r,
        a.weights,
        a.max_live,
        a.p_add,
        derive_labeled(a.seed, "stream"),
    )?;
    g.assume_added(a.initial_m);
    let mut items = Vec::new();
    let mut left = a.updates;
    while left > 0 {
        if a.batch_size == 1 {
            items.push(StreamItem::Single(g.next_update()));
            left -= 1;
        } else {
            let b = g.next_batch(a.batch_size.min(left));
            if b.is_empty() {
                break;
            }
            left -= b.len();
            items.push(StreamItem::Batch(b));
        }
    }
    emit(a.out.as_deref(), &write_dhu(&items))
}

/// Runs the requested oracles on `h` against `ht`.
pub fn verify_pair(
    h: &Hypergraph,
    ht: &Hypergraph,
    eps: f64,
    mode: VerifyMode,
    trials: usize,
    seed: u64,
) -> anyhow::Result<(ApproxReport, VerificationSummary)> {
    let probe_seed = derive_labeled(seed, "verify");
    let cuts = || check_all_cuts(h, ht, eps);
    let random = || check_random_vectors(h, ht, eps, trials, probe_seed);
    let (report, name) = match mode {
        VerifyMode::Cuts => (cuts()?, "cuts"),
        VerifyMode::Random => (random()?, "random"),
        VerifyMode::Both => (cuts()?.merge(&random()?), "both"),
    };
    let summary = VerificationSummary {
        mode: name.into(),
        eps,
        trials: report.trials,
        violations: report.violations,
        worst_ratio_low: report.worst_ratio_low,
        worst_ratio_high: report.worst_ratio_high,
        max_rel_error: report.max_rel_error,
    };
    Ok((report, summary))
}

fn cmd_verify(a: &VerifyArgs) -> anyhow::Result<i32> {
    let h = read_graph(&a.graph)?;
    if a.mode != VerifyMode::Random && h.n() > MAX_CUT_VERTICES {
        bail!("cut enumeration needs n <= {MAX_CUT_VERTICES}, got n = {}", h.n());
    }
    let cfg = a.config.sparsify_config();
    let bundle = spectral_sparsify(&h, &cfg)?;
    let mut ht = bundle.sparsifier;
    if a.test_corrupt {
        ht = ht.scaled(0.25)?;
    }
    if let Some(p) = &a.dump_sparsifier {
        emit(Some(p), &write_dhg(&ht))?;
    }
    let (report, summary) = verify_pair(&h, &ht, a.config.eps, a.mode, a.trials, a.config.seed)?;
    println!(
        "n={} m={} sparsifier={} i_last={} k={} mstar={}",
        h.n(),
        h.m(),
        ht.m(),
        bundle.i_last,
        bundle.k,
        bundle.mstar
    );
    println!(
        "mode={} eps={} trials={} violations={} worst_ratio_low={} worst_ratio_high={} max_rel_error={:e}",
        summary.mode,
        summary.eps,
        summary.trials,
        summary.violations,
        summary.worst_ratio_low,
        summary.worst_ratio_high,
        summary.max_rel_error
    );
    for w in &report.witnesses {
        println!("witness {w:?}");
    }
    if let Some(p) = &a.out_json {
        emit(Some(p), &serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn cmd_bench(a: &BenchArgs) -> anyhow::Result<()> {
    let mut rows = Vec::new();
    for &n in &a.n {
        for &r in &a.r {
            for &m in &a.m {
                let cell = bench::Cell {
                    n,
                    m,
                    r,
                    updates: a.updates.unwrap_or(2 * m),
                    batch_size: a.batch_size,
                    scheduler: a.scheduler.into(),
                };
                rows.push(bench::run_cell(&cell, &a.config.sparsify_config(), a.runs, a.config.seed)?);
            }
        }
    }
    let text = if a.json {
        serde_json::to_string_pretty(&rows)? + "\n"
    } else {
        let mut t = String::from(metrics::BenchRow::CSV_HEADER);
        t.push('\n');
        for row in &rows {
            t.push_str(&row.csv());
            t.push('\n');
        }
        t
    };
    emit(a.out_json.as_deref(), &text)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a).map(|_| EXIT_OK),
        Command::Stream(a) => cmd_stream(a).map(|_| EXIT_OK),
        Command::Run(a) => replay::cmd_run(a).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
