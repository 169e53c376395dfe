//! Stream replay for the `run` command.

use std::collections::HashSet;
use std::fs;

use anyhow::{bail, Context};
use dhsparse::format::{parse_dhu, write_dhg, StreamEntry, StreamItem, Update};
use dhsparse::{DynamicSparsifier, EdgeId, Hypergraph, Scheduler, SparsifyConfig, UpdateMetrics};

use crate::metrics::{ConfigEcho, RunMetrics, UpdateRecord};
use crate::{emit, read_graph, verify_pair, RunArgs};

#[derive(Debug, Clone)]
pub struct ReplayOptions {
    pub cfg: SparsifyConfig,
    /// Root seed echoed in the metrics.
    pub seed: u64,
    pub max_m: Option<usize>,
    pub scheduler: Scheduler,
    pub batch_size: usize,
    pub per_update: bool,
}

/// Initial size plus every insertion in the stream.
pub fn default_capacity(initial: &Hypergraph, stream: &[StreamEntry]) -> usize {
    let adds = stream
        .iter()
        .map(|e| match &e.item {
            StreamItem::Single(Update::Add(_)) => 1,
            StreamItem::Single(Update::Del(_)) => 0,
            StreamItem::Batch(us) => us.iter().filter(|u| matches!(u, Update::Add(_))).count(),
        })
        .sum::<usize>();
    (initial.m() + adds).max(1)
}

struct Replayer {
    ds: DynamicSparsifier,
    scheduler: Scheduler,
    records: Option<Vec<UpdateRecord>>,
    steps: u64,
}

impl Replayer {
    fn record(&mut self, m: &UpdateMetrics) {
        self.steps += 1;
        if let Some(rows) = &mut self.records {
            rows.push(UpdateRecord {
                index: self.steps - 1,
                kind: format!("{:?}", m.kind).to_lowercase(),
                count: m.updates,
                live_m: self.ds.len(),
                sparsifier_size: self.ds.output_sparsifier().m(),
                level_rebuilt: m.level_rebuilt,
                moved: m.moved,
                recourse: m.recourse,
                us: m.elapsed.as_secs_f64() * 1e6,
            });
        }
    }

    fn single(&mut self, u: Update) -> dhsparse::Result<()> {
        let m = match u {
            Update::Add(spec) => self.ds.add(spec)?.1,
            Update::Del(id) => self.ds.delete(id)?.1,
        };
        self.record(&m);
        Ok(())
    }

    fn batch(&mut self, us: Vec<Update>) -> dhsparse::Result<()> {
        if us.is_empty() {
            return Ok(());
        }
        let (_, m) = self.ds.apply_batch(us, self.scheduler)?;
        self.record(&m);
        Ok(())
    }
}

/// Replays `stream` on top of `initial` (loaded as one insertion batch,
/// not counted as updates).
pub fn replay(
    initial: &Hypergraph,
    stream: &[StreamEntry],
    opts: &ReplayOptions,
) -> anyhow::Result<(DynamicSparsifier, RunMetrics)> {
    if opts.batch_size == 0 {
        bail!("batch size must be at least 1");
    }
    let max_m = opts.max_m.unwrap_or_else(|| default_capacity(initial, stream));
    let mut ds = DynamicSparsifier::new(initial.n(), max_m, opts.cfg.clone())?;
    if !initial.is_empty() {
        let specs = initial
            .edges()
            .map(|e| dhsparse::EdgeSpec {
                tail: e.tail().to_vec(),
                head: e.head().to_vec(),
                weight: e.weight(),
            })
            .collect();
        ds.add_batch(specs).context("loading the initial hypergraph")?;
    }
    let baseline = ds.stats().clone();
    let mut rp = Replayer {
        ds,
        scheduler: opts.scheduler,
        records: opts.per_update.then(Vec::new),
        steps: 0,
    };

    // consecutive single updates grouped under --batch-size
    let mut pending: Vec<Update> = Vec::new();
    let mut pending_line = 0;
    let mut pending_new: HashSet<EdgeId> = HashSet::new();
    for entry in stream {
        let line = entry.line;
        match &entry.item {
            StreamItem::Single(u) if opts.batch_size > 1 => {
                let conflict = match u {
                    Update::Del(id) => pending_new.contains(id),
                    Update::Add(_) => false,
                };
                if conflict || pending.len() == opts.batch_size {
                    rp.batch(std::mem::take(&mut pending))
                        .with_context(|| format!("batch starting at line {pending_line}"))?;
                    pending_new.clear();
                }
                if pending.is_empty() {
                    pending_line = line;
                }
                if let Update::Add(_) = u {
                    let adds = pending.iter().filter(|p| matches!(p, Update::Add(_))).count();
                    pending_new.insert(EdgeId(rp.ds.next_id().0 + adds as u64));
                }
                pending.push(u.clone());
            }
            StreamItem::Single(u) => {
                rp.single(u.clone()).with_context(|| format!("line {line}"))?;
            }
            StreamItem::Batch(us) => {
                rp.batch(std::mem::take(&mut pending))
                    .with_context(|| format!("batch starting at line {pending_line}"))?;
                pending_new.clear();
                rp.batch(us.clone())
                    .with_context(|| format!("batch at line {line}"))?;
            }
        }
    }
    rp.batch(pending)
        .with_context(|| format!("batch starting at line {pending_line}"))?;

    let ds = rp.ds;
    let stats = ds.stats();
    let updates = stats.updates - baseline.updates;
    let elapsed = stats.elapsed - baseline.elapsed;
    let elapsed_us = elapsed.as_secs_f64() * 1e6;
    let rebuilds = stats
        .rebuilds
        .iter()
        .zip(&baseline.rebuilds)
        .map(|(a, b)| a - b)
        .collect();
    let live_m = ds.len();
    let metrics = RunMetrics {
        config: ConfigEcho {
            n: ds.n(),
            eps: opts.cfg.eps,
            seed: opts.seed,
            c_lambda: opts.cfg.c_lambda,
            c: opts.cfg.c,
            lambda_override: opts.cfg.lambda_override,
            mstar_override: opts.cfg.mstar_override,
            max_m,
            scheduler: opts.scheduler.to_string(),
            batch_size: opts.batch_size,
        },
        updates,
        adds: stats.adds - baseline.adds,
        deletes: stats.deletes - baseline.deletes,
        live_m,
        sparsifier_size: ds.output_sparsifier().m(),
        size_bound: live_m,
        i_last: ds.i_last(),
        rebuilds,
        moved_total: stats.moved - baseline.moved,
        recourse_total: stats.recourse - baseline.recourse,
        elapsed_us,
        amortized_us: if updates == 0 {
            0.0
        } else {
            elapsed_us / updates as f64
        },
        per_update: rp.records,
        verification: None,
    };
    Ok((ds, metrics))
}

pub fn cmd_run(a: &RunArgs) -> anyhow::Result<()> {
    let initial = match (&a.graph, a.empty, a.n) {
        (Some(p), false, _) => read_graph(p)?,
        (None, true, Some(n)) => Hypergraph::empty(n)?,
        _ => bail!("pass either --graph PATH or --empty --n N"),
    };
    let text = fs::read_to_string(&a.stream)
        .with_context(|| format!("reading {}", a.stream.display()))?;
    let stream = parse_dhu(&text).with_context(|| format!("parsing {}", a.stream.display()))?;
    let opts = ReplayOptions {
        cfg: a.config.sparsify_config(),
        seed: a.config.seed,
        max_m: a.max_m,
        scheduler: a.scheduler.into(),
        batch_size: a.batch_size,
        per_update: a.per_update,
    };
    let (ds, mut metrics) = replay(&initial, &stream, &opts)?;
    let ht = ds.output_sparsifier();
    if let Some(mode) = a.verify_mode {
        let h = ds.live_hypergraph();
        let (_, summary) = verify_pair(&h, &ht, a.config.eps, mode, a.trials, a.config.seed)?;
        metrics.verification = Some(summary);
    }
    if let Some(p) = &a.dump_sparsifier {
        emit(Some(p), &write_dhg(&ht))?;
    }
    let json = serde_json::to_string_pretty(&metrics)? + "\n";
    emit(a.out_json.as_deref(), &json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dhsparse::EdgeSpec;

    fn opts(batch_size: usize) -> ReplayOptions {
        ReplayOptions {
            cfg: SparsifyConfig {
                mstar_override: Some(0),
                lambda_override: Some(1),
                ..Default::default()
            },
            seed: 0,
            max_m: None,
            scheduler: Scheduler::Sequential,
            batch_size,
            per_update: true,
        }
    }

    #[test]
    fn capacity_counts_insertions() {
        let h = Hypergraph::new(3, [EdgeSpec::new([0], [1], 1.0)]).unwrap();
        let s = parse_dhu("add 1 0 1 2 1\ndel 0\nbatch 2\nadd 1 1 1 2 1\ndel 1\n").unwrap();
        assert_eq!(default_capacity(&h, &s), 3);
    }

    #[test]
    fn grouping_flushes_before_deleting_a_pending_insert() {
        let h = Hypergraph::empty(3).unwrap();
        let s = parse_dhu("add 1 0 1 1 1\nadd 1 1 1 2 1\ndel 0\nadd 1 2 1 0 1\n").unwrap();
        let (ds, m) = replay(&h, &s, &opts(8)).unwrap();
        assert_eq!(m.updates, 4);
        assert_eq!(m.per_update.unwrap().len(), 2);
        assert_eq!(ds.len(), 2);
        assert!(!ds.contains(EdgeId(0)));
    }

    #[test]
    fn grouping_preserves_the_final_edge_set() {
        let h = Hypergraph::new(4, (0..6).map(|i| EdgeSpec::new([i % 4], [(i + 1) % 4], 1.0))).unwrap();
        let s = parse_dhu("del 2\nadd 1 0 1 3 2\ndel 0\nadd 1 1 1 2 3\ndel 6\n").unwrap();
        let (a, _) = replay(&h, &s, &opts(1)).unwrap();
        let (b, _) = replay(&h, &s, &opts(3)).unwrap();
        assert_eq!(a.live_hypergraph(), b.live_hypergraph());
    }
}
