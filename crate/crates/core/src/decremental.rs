//! Sparsifier maintenance under deletions.
//!
//! Each level keeps its coreset, its sample and a pair index over its live
//! input. Deleting a coreset edge promotes the heaviest non-coreset edge of
//! the pair it was taken for; if that edge was sampled it leaves the sample
//! and its deletion is passed to the next level. Every level therefore sees
//! at most one deletion per base deletion.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::hypergraph::{EdgeId, Hypergraph};
use crate::pair_index::{PairIndex, PairKey};
use crate::rng::SamplingStream;
use crate::static_sparsify::{recurse, LevelArtifacts, LevelBuild, SparsifyConfig};
use crate::Scheduler;

/// How one level handled a deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelDelete {
    /// The edge was in neither the coreset nor the sample.
    Outside,
    /// The edge was sampled; the next level must delete it too.
    Sampled,
    /// The edge was a coreset member. `replacement` is the promoted edge,
    /// with whether it had been sampled.
    Coreset {
        pair: PairKey,
        replacement: Option<(EdgeId, bool)>,
    },
}

impl LevelDelete {
    /// The deletion this level passes to the next one.
    pub fn forwarded(&self, target: EdgeId) -> Option<EdgeId> {
        match *self {
            Self::Outside => None,
            Self::Sampled => Some(target),
            Self::Coreset {
                replacement: Some((r, true)),
                ..
            } => Some(r),
            Self::Coreset { .. } => None,
        }
    }
}

/// One recursion level. The index holds exactly the live input edges, at
/// their level-input weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelState {
    level: usize,
    lambda: usize,
    stream: SamplingStream,
    index: PairIndex,
    /// Coreset ids with the pair each was taken for.
    coreset: BTreeMap<EdgeId, PairKey>,
    sample: BTreeSet<EdgeId>,
}

impl LevelState {
    fn from_build(level: usize, lb: LevelBuild) -> Self {
        Self {
            level,
            lambda: lb.lambda,
            stream: lb.stream,
            index: lb.index,
            coreset: lb.coreset,
            sample: lb.sample,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn stream(&self) -> SamplingStream {
        self.stream
    }

    pub fn index(&self) -> &PairIndex {
        &self.index
    }

    pub fn input_len(&self) -> usize {
        self.index.len()
    }

    pub fn attribution(&self) -> &BTreeMap<EdgeId, PairKey> {
        &self.coreset
    }

    pub fn sample_ids(&self) -> &BTreeSet<EdgeId> {
        &self.sample
    }

    pub fn in_coreset(&self, id: EdgeId) -> bool {
        self.coreset.contains_key(&id)
    }

    pub fn in_sample(&self, id: EdgeId) -> bool {
        self.sample.contains(&id)
    }

    /// `|C ∪ S|`.
    pub fn kept(&self) -> usize {
        self.coreset.len() + self.sample.len()
    }

    /// Deletes `t` from this level's input.
    pub fn delete(&mut self, t: EdgeId) -> Result<LevelDelete> {
        self.index.remove_edge(t)?;
        if let Some(pair) = self.coreset.remove(&t) {
            let coreset = &self.coreset;
            let r = self
                .index
                .heaviest_outside(pair, |id| coreset.contains_key(&id));
            Ok(LevelDelete::Coreset {
                pair,
                replacement: r.map(|r| self.promote(r, pair)),
            })
        } else if self.sample.remove(&t) {
            Ok(LevelDelete::Sampled)
        } else {
            Ok(LevelDelete::Outside)
        }
    }

    fn promote(&mut self, r: EdgeId, pair: PairKey) -> (EdgeId, bool) {
        self.coreset.insert(r, pair);
        (r, self.sample.remove(&r))
    }

    /// Deletes `targets` with the same outcome as calling [`Self::delete`]
    /// on each in order. Replacements are resolved against the index before
    /// any removal, skipping targets not yet deleted at that point in the
    /// sequence; the index is then cleared of all targets in one batch.
    pub fn delete_batch(
        &mut self,
        targets: &[EdgeId],
        scheduler: Scheduler,
    ) -> Result<Vec<LevelDelete>> {
        let mut pos = HashMap::with_capacity(targets.len());
        for (i, &t) in targets.iter().enumerate() {
            if !self.index.contains(t) {
                return Err(Error::UnknownEdge(t));
            }
            if pos.insert(t, i).is_some() {
                return Err(Error::DuplicateEdge(t));
            }
        }
        let mut out = Vec::with_capacity(targets.len());
        for (i, &t) in targets.iter().enumerate() {
            let outcome = if let Some(pair) = self.coreset.remove(&t) {
                let coreset = &self.coreset;
                let r = self.index.heaviest_outside(pair, |id| {
                    coreset.contains_key(&id) || pos.get(&id).is_some_and(|&j| j <= i)
                });
                LevelDelete::Coreset {
                    pair,
                    replacement: r.map(|r| self.promote(r, pair)),
                }
            } else if self.sample.remove(&t) {
                LevelDelete::Sampled
            } else {
                LevelDelete::Outside
            };
            out.push(outcome);
        }
        self.index.remove_edges_batch(targets, scheduler)?;
        Ok(out)
    }
}

/// Changes to the maintained sparsifier caused by one update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecourseReport {
    /// Level deletions performed, counting the one at level 1.
    pub deletions_propagated: usize,
    /// Promoted edges with the level that promoted them.
    pub replacements: Vec<(usize, EdgeId)>,
    /// Ids that left the sparsifier.
    pub sparsifier_removed: Vec<EdgeId>,
    /// Ids that entered the sparsifier or changed weight in it.
    pub sparsifier_added: Vec<EdgeId>,
}

impl RecourseReport {
    pub fn recourse(&self) -> usize {
        self.sparsifier_removed.len() + self.sparsifier_added.len()
    }

    pub fn merge(&mut self, other: RecourseReport) {
        self.deletions_propagated += other.deletions_propagated;
        self.replacements.extend(other.replacements);
        self.sparsifier_removed.extend(other.sparsifier_removed);
        self.sparsifier_added.extend(other.sparsifier_added);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecrementalSparsifier {
    cfg: SparsifyConfig,
    base: Hypergraph,
    levels: Vec<LevelState>,
    sparsifier: Hypergraph,
    k: usize,
    mstar: usize,
}

impl DecrementalSparsifier {
    /// Runs the static construction on `h`, keeping per-level state.
    pub fn new(h: Hypergraph, cfg: SparsifyConfig) -> Result<Self> {
        cfg.validate()?;
        let mut levels = Vec::new();
        let (plan, _) = recurse(&h, &cfg, |level, _, lb| {
            levels.push(LevelState::from_build(level, lb));
        });
        let mut ds = Self {
            cfg,
            sparsifier: Hypergraph::empty(h.n())?,
            base: h,
            levels,
            k: plan.k,
            mstar: plan.mstar,
        };
        ds.sparsifier = ds.materialize();
        Ok(ds)
    }

    pub fn config(&self) -> &SparsifyConfig {
        &self.cfg
    }

    /// The live base hypergraph.
    pub fn base(&self) -> &Hypergraph {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.m()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn i_last(&self) -> usize {
        self.levels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mstar(&self) -> usize {
        self.mstar
    }

    pub fn levels(&self) -> &[LevelState] {
        &self.levels
    }

    pub fn current_sparsifier(&self) -> &Hypergraph {
        &self.sparsifier
    }

    /// Weight of `id` in the sparsifier as the level states define it.
    fn placement(&self, id: EdgeId) -> Option<f64> {
        let Some(last) = self.levels.last() else {
            return self.base.edge(id).map(|e| e.weight());
        };
        for ls in &self.levels {
            if ls.in_coreset(id) {
                return ls.index.weight_of(id);
            }
            if !ls.in_sample(id) {
                return None;
            }
        }
        last.index.weight_of(id).map(|w| 2.0 * w)
    }

    fn materialize(&self) -> Hypergraph {
        let Some(last) = self.levels.last() else {
            return self.base.clone();
        };
        let ids = self
            .levels
            .iter()
            .flat_map(|ls| ls.coreset.keys())
            .chain(last.sample.iter());
        let mut h = Hypergraph::empty(self.base.n()).expect("n >= 1");
        for &id in ids {
            let w = self.placement(id).expect("kept edge is placed");
            let e = self.base.edge(id).expect("kept edge is live");
            h.insert(e.with_weight(w)).expect("levels keep disjoint ids");
        }
        h
    }

    /// Per-level coresets and samples as hypergraphs.
    pub fn level_views(&self) -> Vec<LevelArtifacts> {
        self.levels
            .iter()
            .map(|ls| {
                let pick = |ids: &mut dyn Iterator<Item = EdgeId>, factor: f64| {
                    let mut h = Hypergraph::empty(self.base.n()).expect("n >= 1");
                    for id in ids {
                        let w = ls.index.weight_of(id).expect("kept edge is indexed");
                        let e = self.base.edge(id).expect("kept edge is live");
                        h.insert(e.with_weight(factor * w)).expect("distinct ids");
                    }
                    h
                };
                LevelArtifacts {
                    level: ls.level,
                    coreset: pick(&mut ls.coreset.keys().copied(), 1.0),
                    sample: pick(&mut ls.sample.iter().copied(), 2.0),
                }
            })
            .collect()
    }

    /// Brings the sparsifier in line with the level states for `touched`
    /// ids and reports what changed.
    fn settle(&mut self, touched: impl IntoIterator<Item = EdgeId>, report: &mut RecourseReport) {
        let touched: BTreeSet<EdgeId> = touched.into_iter().collect();
        for id in touched {
            let before = self.sparsifier.edge(id).map(|e| e.weight());
            let after = self.placement(id);
            match (before, after) {
                (Some(_), None) => {
                    self.sparsifier.remove(id).expect("present");
                    report.sparsifier_removed.push(id);
                }
                (None, Some(w)) => {
                    let e = self.base.edge(id).expect("placed edge is live");
                    self.sparsifier.insert(e.with_weight(w)).expect("absent");
                    report.sparsifier_added.push(id);
                }
                (Some(a), Some(b)) if a.to_bits() != b.to_bits() => {
                    let e = self.sparsifier.remove(id).expect("present");
                    self.sparsifier.insert(e.with_weight(b)).expect("absent");
                    report.sparsifier_added.push(id);
                }
                _ => {}
            }
        }
    }

    /// Deletes base edge `e`, walking the levels one target at a time.
    pub fn delete(&mut self, e: EdgeId) -> Result<RecourseReport> {
        if !self.base.contains(e) {
            return Err(Error::UnknownEdge(e));
        }
        let mut report = RecourseReport::default();
        let mut touched = vec![e];
        let mut target = Some(e);
        for ls in &mut self.levels {
            let Some(t) = target else { break };
            let outcome = ls.delete(t)?;
            report.deletions_propagated += 1;
            if let LevelDelete::Coreset {
                replacement: Some((r, _)),
                ..
            } = outcome
            {
                report.replacements.push((ls.level, r));
                touched.push(r);
            }
            target = outcome.forwarded(t);
        }
        self.base.remove(e)?;
        self.settle(touched, &mut report);
        Ok(report)
    }

    /// Deletes all of `ids`. The resulting state is identical to deleting
    /// them one at a time in ascending id order. The report holds the net
    /// change of the sparsifier over the whole batch.
    pub fn delete_batch(&mut self, ids: &[EdgeId], scheduler: Scheduler) -> Result<RecourseReport> {
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateEdge(w[0]));
            }
        }
        if let Some(&bad) = sorted.iter().find(|id| !self.base.contains(**id)) {
            return Err(Error::UnknownEdge(bad));
        }
        let mut report = RecourseReport::default();
        let mut touched: HashSet<EdgeId> = sorted.iter().copied().collect();
        let mut targets = sorted.clone();
        for ls in &mut self.levels {
            if targets.is_empty() {
                break;
            }
            let outcomes = ls.delete_batch(&targets, scheduler)?;
            report.deletions_propagated += targets.len();
            let mut next = Vec::new();
            for (&t, outcome) in targets.iter().zip(&outcomes) {
                if let LevelDelete::Coreset {
                    replacement: Some((r, _)),
                    ..
                } = outcome
                {
                    report.replacements.push((ls.level, *r));
                    touched.insert(*r);
                }
                next.extend(outcome.forwarded(t));
            }
            targets = next;
        }
        for &id in &sorted {
            self.base.remove(id)?;
        }
        self.settle(touched, &mut report);
        Ok(report)
    }

    /// Full structural self-check against the level invariants.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut input: BTreeSet<EdgeId> = self.base.ids().collect();
        let mut factor = 1.0;
        for ls in &self.levels {
            let indexed: BTreeSet<EdgeId> = ls.index.ids().collect();
            if indexed != input {
                return Err(format!("level {} input differs from its parent", ls.level));
            }
            ls.index.validate().map_err(|e| format!("level {}: {e}", ls.level))?;
            for id in &input {
                let w = ls.index.weight_of(*id).expect("indexed");
                let base = self.base.edge(*id).expect("live").weight();
                if w.to_bits() != (factor * base).to_bits() {
                    return Err(format!("level {} weight of {id} is {w}", ls.level));
                }
            }
            for (id, p) in &ls.coreset {
                if ls.sample.contains(id) {
                    return Err(format!("level {}: {id} both in coreset and sample", ls.level));
                }
                let pairs = ls.index.pairs_of(*id).map_err(|e| e.to_string())?;
                if !pairs.contains(p) {
                    return Err(format!("level {}: {id} attributed to foreign pair", ls.level));
                }
            }
            if !ls.sample.is_subset(&input) {
                return Err(format!("level {}: sample outside input", ls.level));
            }
            input = ls.sample.clone();
            factor *= 2.0;
        }
        if self.sparsifier != self.materialize() {
            return Err("maintained sparsifier differs from the level states".into());
        }
        Ok(())
    }
}
