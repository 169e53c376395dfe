//! Fully dynamic maintenance by binary-counter batching.
//!
//! Live edges are split into sub-hypergraphs `H_1..H_K` with `|H_i| <= 2^i`,
//! each owned by a [`DecrementalSparsifier`]. An insertion increments the
//! counter `t` and rebuilds level `j = max{i : 2^(i-1) | t}` from the new
//! edge and everything below it. Deletions go to the owning level. The
//! output is the union of the per-level sparsifiers.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::decremental::{DecrementalSparsifier, RecourseReport};
use crate::error::{Error, Result};
use crate::format::Update;
use crate::hypergraph::{EdgeId, EdgeSpec, Hyperedge, Hypergraph};
use crate::rng;
use crate::static_sparsify::SparsifyConfig;
use crate::Scheduler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateKind {
    Add,
    Delete,
    AddBatch,
    DeleteBatch,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateMetrics {
    pub kind: UpdateKind,
    /// Number of updates this call applied.
    pub updates: usize,
    pub level_rebuilt: Option<usize>,
    /// Edges moved up from lower levels by the rebuild.
    pub moved: usize,
    pub recourse: usize,
    pub deletions_propagated: usize,
    pub elapsed: Duration,
}

impl UpdateMetrics {
    fn new(kind: UpdateKind) -> Self {
        Self {
            kind,
            updates: 0,
            level_rebuilt: None,
            moved: 0,
            recourse: 0,
            deletions_propagated: 0,
            elapsed: Duration::ZERO,
        }
    }
}

/// Cumulative counters since construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DynamicStats {
    pub updates: u64,
    pub adds: u64,
    pub deletes: u64,
    /// Rebuild count per level, index 0 being level 1.
    pub rebuilds: Vec<u64>,
    pub moved: u64,
    pub recourse: u64,
    pub elapsed: Duration,
}

impl DynamicStats {
    pub fn amortized_us(&self) -> f64 {
        if self.updates == 0 {
            0.0
        } else {
            self.elapsed.as_secs_f64() * 1e6 / self.updates as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct DynamicSparsifier {
    n: usize,
    max_m: usize,
    cfg: SparsifyConfig,
    /// Engine for `H_{i+1}`; `None` while that level is empty.
    subs: Vec<Option<DecrementalSparsifier>>,
    owner: HashMap<EdgeId, usize>,
    t: u64,
    i_last: usize,
    next_id: u64,
    stats: DynamicStats,
}

/// `⌈log2 max_m⌉ + 1`.
pub fn level_count(max_m: usize) -> usize {
    let ceil_log = usize::BITS - (max_m.max(1) - 1).leading_zeros();
    ceil_log as usize + 1
}

/// Ids and weights of `h`, for diffing sparsifiers.
fn weights(h: &Hypergraph) -> impl Iterator<Item = (EdgeId, u64)> + '_ {
    h.edges().map(|e| (e.id(), e.weight().to_bits()))
}

impl DynamicSparsifier {
    pub fn new(n: usize, max_m: usize, cfg: SparsifyConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoVertices);
        }
        if max_m == 0 {
            return Err(Error::InvalidConfig("max_m must be at least 1".into()));
        }
        cfg.validate()?;
        let k = level_count(max_m);
        Ok(Self {
            n,
            max_m,
            cfg,
            subs: vec![None; k],
            owner: HashMap::new(),
            t: 0,
            i_last: 1,
            next_id: 0,
            stats: DynamicStats {
                rebuilds: vec![0; k],
                ..Default::default()
            },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_m(&self) -> usize {
        self.max_m
    }

    pub fn config(&self) -> &SparsifyConfig {
        &self.cfg
    }

    /// Number of levels `K`.
    pub fn levels(&self) -> usize {
        self.subs.len()
    }

    pub fn counter(&self) -> u64 {
        self.t
    }

    pub fn i_last(&self) -> usize {
        self.i_last
    }

    pub fn next_id(&self) -> EdgeId {
        EdgeId(self.next_id)
    }

    /// Number of live edges.
    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.owner.contains_key(&id)
    }

    /// Level (1-based) owning `id`.
    pub fn owner_of(&self, id: EdgeId) -> Option<usize> {
        self.owner.get(&id).copied()
    }

    pub fn stats(&self) -> &DynamicStats {
        &self.stats
    }

    /// `|H_i|` for `i = 1..=K`.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.subs
            .iter()
            .map(|s| s.as_ref().map_or(0, DecrementalSparsifier::len))
            .collect()
    }

    pub fn engine(&self, level: usize) -> Option<&DecrementalSparsifier> {
        self.subs.get(level.checked_sub(1)?)?.as_ref()
    }

    /// `(level, H_i, H̃_i)` for every non-empty level.
    pub fn level_views(&self) -> impl Iterator<Item = (usize, &Hypergraph, &Hypergraph)> + '_ {
        self.subs.iter().enumerate().filter_map(|(i, s)| {
            s.as_ref()
                .map(|ds| (i + 1, ds.base(), ds.current_sparsifier()))
        })
    }

    /// The live hypergraph.
    pub fn live_hypergraph(&self) -> Hypergraph {
        self.union(|ds| ds.base())
    }

    /// `H̃ = ∪ H̃_i`.
    pub fn output_sparsifier(&self) -> Hypergraph {
        self.union(|ds| ds.current_sparsifier())
    }

    fn union(&self, part: impl Fn(&DecrementalSparsifier) -> &Hypergraph) -> Hypergraph {
        let mut out = Hypergraph::empty(self.n).expect("n >= 1");
        for ds in self.subs.iter().flatten() {
            for e in part(ds).edges() {
                out.insert(e.clone()).expect("levels are id-disjoint");
            }
        }
        out
    }

    /// Inserts one edge. Same as a batch of one.
    pub fn add(&mut self, spec: EdgeSpec) -> Result<(EdgeId, UpdateMetrics)> {
        let (ids, mut m) = self.add_batch(vec![spec])?;
        m.kind = UpdateKind::Add;
        Ok((ids[0], m))
    }

    /// Inserts all of `specs` with a single rebuild. The counter advances by
    /// `specs.len()`; the rebuilt level is the highest counter bit that
    /// changed, raised until it can hold everything merged into it.
    pub fn add_batch(&mut self, specs: Vec<EdgeSpec>) -> Result<(Vec<EdgeId>, UpdateMetrics)> {
        let start = Instant::now();
        let mut metrics = UpdateMetrics::new(UpdateKind::AddBatch);
        if specs.is_empty() {
            return Ok((Vec::new(), metrics));
        }
        let k = specs.len();
        if self.len() + k > self.max_m {
            return Err(Error::CapacityExceeded { max_m: self.max_m });
        }
        let mut fresh = Vec::with_capacity(k);
        for (i, spec) in specs.into_iter().enumerate() {
            fresh.push(Hyperedge::new(EdgeId(self.next_id + i as u64), spec, self.n)?);
        }
        let t_old = self.t;
        let t_new = t_old + k as u64;
        let top = self.levels();
        let mut j = ((u64::BITS - (t_old ^ t_new).leading_zeros()) as usize).min(top);
        let sizes = self.level_sizes();
        while j < top {
            let below: usize = sizes[..j - 1].iter().sum();
            if (1usize << j) >= below + k + sizes[j - 1] {
                break;
            }
            j += 1;
        }

        let ids: Vec<EdgeId> = fresh.iter().map(Hyperedge::id).collect();
        let mut old = BTreeMap::new();
        let mut merged = Hypergraph::empty(self.n)?;
        for (i, slot) in self.subs.iter_mut().enumerate().take(j) {
            if let Some(ds) = slot.take() {
                old.extend(weights(ds.current_sparsifier()));
                if i + 1 < j {
                    metrics.moved += ds.len();
                }
                for e in ds.base().edges() {
                    merged.insert(e.clone())?;
                }
            }
        }
        for e in fresh {
            merged.insert(e)?;
        }
        for id in merged.ids() {
            self.owner.insert(id, j);
        }
        let cfg = self.cfg.clone().with_seed(rng::derive(self.cfg.seed, t_new));
        let ds = DecrementalSparsifier::new(merged, cfg)?;
        let new: BTreeMap<EdgeId, u64> = weights(ds.current_sparsifier()).collect();
        metrics.recourse = old.iter().filter(|(id, w)| new.get(id) != Some(w)).count()
            + new.keys().filter(|id| !old.contains_key(id)).count();
        self.subs[j - 1] = Some(ds);

        self.t = t_new;
        self.next_id += k as u64;
        self.i_last = self.i_last.max(j);
        metrics.level_rebuilt = Some(j);
        metrics.updates = k;
        metrics.elapsed = start.elapsed();
        self.stats.adds += k as u64;
        self.stats.updates += k as u64;
        self.stats.rebuilds[j - 1] += 1;
        self.stats.moved += metrics.moved as u64;
        self.stats.recourse += metrics.recourse as u64;
        self.stats.elapsed += metrics.elapsed;
        Ok((ids, metrics))
    }

    fn drop_empty(&mut self, level: usize) {
        if self.subs[level - 1].as_ref().is_some_and(DecrementalSparsifier::is_empty) {
            self.subs[level - 1] = None;
        }
    }

    fn record_delete(&mut self, metrics: &mut UpdateMetrics, report: &RecourseReport, start: Instant) {
        metrics.recourse = report.recourse();
        metrics.deletions_propagated = report.deletions_propagated;
        metrics.elapsed = start.elapsed();
        self.stats.deletes += metrics.updates as u64;
        self.stats.updates += metrics.updates as u64;
        self.stats.recourse += metrics.recourse as u64;
        self.stats.elapsed += metrics.elapsed;
    }

    pub fn delete(&mut self, id: EdgeId) -> Result<(RecourseReport, UpdateMetrics)> {
        let start = Instant::now();
        let level = self.owner_of(id).ok_or(Error::UnknownEdge(id))?;
        let report = self.subs[level - 1]
            .as_mut()
            .expect("owner points at a live level")
            .delete(id)?;
        self.owner.remove(&id);
        self.drop_empty(level);
        let mut metrics = UpdateMetrics::new(UpdateKind::Delete);
        metrics.updates = 1;
        self.record_delete(&mut metrics, &report, start);
        Ok((report, metrics))
    }

    /// Deletes all of `ids`, each level handling its share as one batch.
    /// Identical to deleting the ids one at a time in ascending order.
    pub fn delete_batch(
        &mut self,
        ids: &[EdgeId],
        scheduler: Scheduler,
    ) -> Result<(RecourseReport, UpdateMetrics)> {
        let start = Instant::now();
        let mut parts: BTreeMap<usize, Vec<EdgeId>> = BTreeMap::new();
        let mut seen = std::collections::HashSet::with_capacity(ids.len());
        for &id in ids {
            let level = self.owner_of(id).ok_or(Error::UnknownEdge(id))?;
            if !seen.insert(id) {
                return Err(Error::DuplicateEdge(id));
            }
            parts.entry(level).or_default().push(id);
        }
        let mut work: Vec<(usize, &mut DecrementalSparsifier, Vec<EdgeId>)> = self
            .subs
            .iter_mut()
            .enumerate()
            .filter_map(|(i, s)| {
                let batch = parts.remove(&(i + 1))?;
                Some((i + 1, s.as_mut().expect("owned level is live"), batch))
            })
            .collect();
        let reports: Vec<Result<RecourseReport>> = match scheduler {
            Scheduler::Sequential => work
                .iter_mut()
                .map(|(_, ds, batch)| ds.delete_batch(batch, scheduler))
                .collect(),
            Scheduler::Parallel => work
                .par_iter_mut()
                .map(|(_, ds, batch)| ds.delete_batch(batch, scheduler))
                .collect(),
        };
        let levels: Vec<usize> = work.iter().map(|w| w.0).collect();
        let mut report = RecourseReport::default();
        for r in reports {
            report.merge(r?);
        }
        for id in ids {
            self.owner.remove(id);
        }
        for level in levels {
            self.drop_empty(level);
        }
        let mut metrics = UpdateMetrics::new(UpdateKind::DeleteBatch);
        metrics.updates = ids.len();
        self.record_delete(&mut metrics, &report, start);
        Ok((report, metrics))
    }

    /// Applies a mixed batch: all deletions first, then all insertions.
    pub fn apply_batch(
        &mut self,
        updates: Vec<Update>,
        scheduler: Scheduler,
    ) -> Result<(Vec<EdgeId>, UpdateMetrics)> {
        let start = Instant::now();
        let mut dels = Vec::new();
        let mut adds = Vec::new();
        for u in updates {
            match u {
                Update::Add(spec) => adds.push(spec),
                Update::Del(id) => dels.push(id),
            }
        }
        if self.len() - dels.len().min(self.len()) + adds.len() > self.max_m {
            return Err(Error::CapacityExceeded { max_m: self.max_m });
        }
        for spec in &adds {
            Hyperedge::new(EdgeId(0), spec.clone(), self.n)?;
        }
        let mut metrics = UpdateMetrics::new(UpdateKind::Mixed);
        if !dels.is_empty() {
            let (_, m) = self.delete_batch(&dels, scheduler)?;
            metrics.updates += m.updates;
            metrics.recourse += m.recourse;
            metrics.deletions_propagated += m.deletions_propagated;
        }
        let (ids, m) = self.add_batch(adds)?;
        metrics.updates += m.updates;
        metrics.recourse += m.recourse;
        metrics.level_rebuilt = m.level_rebuilt;
        metrics.moved = m.moved;
        metrics.elapsed = start.elapsed();
        Ok((ids, metrics))
    }

    /// Checks capacity, the ownership partition and id-disjointness of the
    /// output, without inspecting engine internals.
    pub fn check_partition(&self) -> std::result::Result<(), String> {
        let mut total = 0usize;
        for (i, slot) in self.subs.iter().enumerate() {
            let level = i + 1;
            let Some(ds) = slot else { continue };
            if ds.is_empty() {
                return Err(format!("level {level} holds an empty engine"));
            }
            if ds.len() > 1usize << level {
                return Err(format!("level {level} holds {} > 2^{level} edges", ds.len()));
            }
            for id in ds.base().ids() {
                if self.owner.get(&id) != Some(&level) {
                    return Err(format!("edge {id} in level {level} not owned by it"));
                }
            }
            total += ds.len();
        }
        if total != self.owner.len() {
            return Err(format!("{} owned ids but {total} edges in levels", self.owner.len()));
        }
        let mut seen = std::collections::HashSet::new();
        for ds in self.subs.iter().flatten() {
            for id in ds.current_sparsifier().ids() {
                if !ds.base().contains(id) {
                    return Err(format!("sparsifier edge {id} not in its level"));
                }
                if !seen.insert(id) {
                    return Err(format!("sparsifier edge {id} appears twice"));
                }
            }
        }
        Ok(())
    }

    /// [`Self::check_partition`] plus a full check of every engine.
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.check_partition()?;
        for (i, ds) in self.subs.iter().enumerate() {
            if let Some(ds) = ds {
                ds.validate().map_err(|e| format!("level {}: {e}", i + 1))?;
            }
        }
        Ok(())
    }
}
