//! Timed random workloads for the `bench` command.

use dhsparse::generate::{random_hypergraph, StreamGen, WeightDist};
use dhsparse::rng::derive;
use dhsparse::{DynamicSparsifier, EdgeSpec, Scheduler, SparsifyConfig, Update};

use crate::metrics::BenchRow;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub updates: usize,
    pub batch_size: usize,
    pub scheduler: Scheduler,
}

/// Outcome of one timed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSample {
    pub amortized_us: f64,
    pub live_m: usize,
    pub sparsifier_size: usize,
    pub i_last: usize,
    pub recourse_total: u64,
    pub rebuilds_total: u64,
}

/// Loads `m` random edges (untimed), then times `updates` mixed updates
/// that keep the live count at most `m`.
pub fn run_once(cell: &Cell, cfg: &SparsifyConfig, seed: u64) -> anyhow::Result<RunSample> {
    if cell.batch_size == 0 {
        anyhow::bail!("batch size must be at least 1");
    }
    let cfg = cfg.clone().with_seed(derive(cfg.seed, seed));
    let h = random_hypergraph(cell.n, cell.m, cell.r, WeightDist::Uniform, derive(seed, 1))?;
    let mut ds = DynamicSparsifier::new(cell.n, cell.m.max(1), cfg)?;
    let specs: Vec<EdgeSpec> = h
        .edges()
        .map(|e| EdgeSpec {
            tail: e.tail().to_vec(),
            head: e.head().to_vec(),
            weight: e.weight(),
        })
        .collect();
    ds.add_batch(specs)?;
    let mut gen = StreamGen::new(cell.n, cell.r, WeightDist::Uniform, cell.m, 0.5, derive(seed, 2))?;
    gen.assume_added(cell.m);
    let base = ds.stats().clone();
    let mut done = 0;
    while done < cell.updates {
        if cell.batch_size == 1 {
            match gen.next_update() {
                Update::Add(s) => {
                    ds.add(s)?;
                }
                Update::Del(id) => {
                    ds.delete(id)?;
                }
            }
            done += 1;
        } else {
            let b = gen.next_batch(cell.batch_size.min(cell.updates - done));
            if b.is_empty() {
                break;
            }
            done += b.len();
            ds.apply_batch(b, cell.scheduler)?;
        }
    }
    let stats = ds.stats();
    let updates = stats.updates - base.updates;
    let elapsed = (stats.elapsed - base.elapsed).as_secs_f64() * 1e6;
    Ok(RunSample {
        amortized_us: if updates == 0 { 0.0 } else { elapsed / updates as f64 },
        live_m: ds.len(),
        sparsifier_size: ds.output_sparsifier().m(),
        i_last: ds.i_last(),
        recourse_total: stats.recourse - base.recourse,
        rebuilds_total: stats.rebuilds.iter().sum::<u64>() - base.rebuilds.iter().sum::<u64>(),
    })
}

/// Averages the amortized time of `runs` runs with seeds derived from
/// `seed`. Size columns come from the last run.
pub fn run_cell(cell: &Cell, cfg: &SparsifyConfig, runs: usize, seed: u64) -> anyhow::Result<BenchRow> {
    let runs = runs.max(1);
    let mut total = 0.0;
    let mut last = None;
    for run in 0..runs {
        let s = run_once(cell, cfg, derive(seed, run as u64))?;
        total += s.amortized_us;
        last = Some(s);
    }
    let last = last.expect("at least one run");
    Ok(BenchRow {
        n: cell.n,
        m: cell.m,
        r: cell.r,
        updates: cell.updates,
        runs,
        scheduler: cell.scheduler.to_string(),
        batch_size: cell.batch_size,
        amortized_us: total / runs as f64,
        live_m: last.live_m,
        sparsifier_size: last.sparsifier_size,
        i_last: last.i_last,
        recourse_total: last.recourse_total,
        rebuilds_total: last.rebuilds_total,
    })
}
