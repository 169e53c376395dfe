//! Per-pair ordered edge sets `E(u,v)`.
//!
//! For every ordered vertex pair `(u, v)` the index keeps the edges with `u`
//! in the tail and `v` in the head, sorted by weight descending and then by
//! id ascending. Buckets exist only while non-empty.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{EdgeId, Hyperedge, Hypergraph, VertexId};
use crate::Scheduler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairKey {
    pub u: VertexId,
    pub v: VertexId,
}

impl PairKey {
    pub fn new(u: u32, v: u32) -> Self {
        Self {
            u: VertexId(u),
            v: VertexId(v),
        }
    }
}

/// Bucket element. Orders heaviest first, ties by smaller id.
#[derive(Debug, Clone, Copy)]
struct Entry {
    weight: f64,
    id: EdgeId,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then(self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone)]
struct Member {
    weight: f64,
    pairs: Box<[PairKey]>,
}

#[derive(Debug, Clone, Default)]
pub struct PairIndex {
    buckets: BTreeMap<PairKey, BTreeSet<Entry>>,
    members: HashMap<EdgeId, Member>,
}

fn pairs_for(e: &Hyperedge) -> Box<[PairKey]> {
    let mut out = Vec::with_capacity(e.tail().len() * e.head().len());
    for &u in e.tail() {
        for &v in e.head() {
            out.push(PairKey { u, v });
        }
    }
    out.into_boxed_slice()
}

impl PairIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Indexes every edge of `h` under its current weight.
    pub fn build(h: &Hypergraph) -> Self {
        let mut idx = Self::new();
        for e in h.edges() {
            idx.insert(e);
        }
        idx
    }

    /// Adds `e` to all of its buckets. Used while building; the index is
    /// otherwise deletion-only.
    pub fn insert(&mut self, e: &Hyperedge) {
        let pairs = pairs_for(e);
        let entry = Entry {
            weight: e.weight(),
            id: e.id(),
        };
        for p in pairs.iter() {
            self.buckets.entry(*p).or_default().insert(entry);
        }
        let prev = self.members.insert(
            e.id(),
            Member {
                weight: e.weight(),
                pairs,
            },
        );
        assert!(prev.is_none(), "edge {} indexed twice", e.id());
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.members.contains_key(&id)
    }

    /// Number of indexed edges.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Sum of bucket sizes.
    pub fn entry_count(&self) -> usize {
        self.buckets.values().map(BTreeSet::len).sum()
    }

    /// Indexed ids, in no particular order.
    pub fn ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.members.keys().copied()
    }

    pub fn weight_of(&self, id: EdgeId) -> Option<f64> {
        self.members.get(&id).map(|m| m.weight)
    }

    pub fn pairs_of(&self, id: EdgeId) -> Result<&[PairKey]> {
        self.members
            .get(&id)
            .map(|m| &*m.pairs)
            .ok_or(Error::UnknownEdge(id))
    }

    /// Non-empty buckets in lexicographic pair order.
    pub fn pairs(&self) -> impl Iterator<Item = PairKey> + '_ {
        self.buckets.keys().copied()
    }

    /// Bucket contents in order; empty for an absent bucket.
    pub fn bucket(&self, p: PairKey) -> impl Iterator<Item = EdgeId> + '_ {
        self.buckets
            .get(&p)
            .into_iter()
            .flat_map(|b| b.iter().map(|e| e.id))
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Result<()> {
        let m = self.members.remove(&id).ok_or(Error::UnknownEdge(id))?;
        let entry = Entry {
            weight: m.weight,
            id,
        };
        for p in m.pairs.iter() {
            let bucket = self.buckets.get_mut(p).expect("member pair has a bucket");
            let removed = bucket.remove(&entry);
            debug_assert!(removed);
            if bucket.is_empty() {
                self.buckets.remove(p);
            }
        }
        Ok(())
    }

    /// First edge of bucket `p` (in bucket order) for which `skip` is false.
    pub fn heaviest_outside(&self, p: PairKey, skip: impl Fn(EdgeId) -> bool) -> Option<EdgeId> {
        self.bucket(p).find(|&id| !skip(id))
    }

    /// Removes all of `ids`. Buckets are disjoint state, so the parallel
    /// scheduler processes them concurrently; the result is the same as
    /// removing the ids one by one in any order.
    pub fn remove_edges_batch(&mut self, ids: &[EdgeId], scheduler: Scheduler) -> Result<()> {
        let mut seen = HashSet::with_capacity(ids.len());
        for &id in ids {
            if !self.members.contains_key(&id) {
                return Err(Error::UnknownEdge(id));
            }
            if !seen.insert(id) {
                return Err(Error::DuplicateEdge(id));
            }
        }
        let mut per_bucket: BTreeMap<PairKey, Vec<Entry>> = BTreeMap::new();
        for id in ids {
            let m = self.members.remove(id).expect("checked above");
            let entry = Entry {
                weight: m.weight,
                id: *id,
            };
            for p in m.pairs.iter() {
                per_bucket.entry(*p).or_default().push(entry);
            }
        }
        match scheduler {
            Scheduler::Sequential => {
                for (p, entries) in per_bucket {
                    let bucket = self.buckets.get_mut(&p).expect("member pair has a bucket");
                    for e in &entries {
                        bucket.remove(e);
                    }
                    if bucket.is_empty() {
                        self.buckets.remove(&p);
                    }
                }
            }
            Scheduler::Parallel => {
                let mut work: Vec<(PairKey, BTreeSet<Entry>, Vec<Entry>)> = per_bucket
                    .into_iter()
                    .map(|(p, entries)| {
                        let bucket = self.buckets.remove(&p).expect("member pair has a bucket");
                        (p, bucket, entries)
                    })
                    .collect();
                work.par_iter_mut().for_each(|(_, bucket, entries)| {
                    for e in entries.iter() {
                        bucket.remove(e);
                    }
                });
                for (p, bucket, _) in work {
                    if !bucket.is_empty() {
                        self.buckets.insert(p, bucket);
                    }
                }
            }
        }
        Ok(())
    }

    /// Full structural self-check: membership both ways and bucket order.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut count = 0usize;
        for (p, bucket) in &self.buckets {
            if bucket.is_empty() {
                return Err(format!("empty bucket {p:?} retained"));
            }
            for e in bucket {
                count += 1;
                let m = self
                    .members
                    .get(&e.id)
                    .ok_or_else(|| format!("bucket {p:?} holds unindexed edge {}", e.id))?;
                if !m.pairs.contains(p) || m.weight.to_bits() != e.weight.to_bits() {
                    return Err(format!("bucket {p:?} entry {} disagrees with member", e.id));
                }
            }
        }
        let expected: usize = self.members.values().map(|m| m.pairs.len()).sum();
        if count != expected {
            return Err(format!("bucket entries {count} != member pairs {expected}"));
        }
        Ok(())
    }
}

/// Same buckets holding the same entries in the same order.
impl PartialEq for PairIndex {
    fn eq(&self, other: &Self) -> bool {
        self.buckets.len() == other.buckets.len()
            && self
                .buckets
                .iter()
                .zip(other.buckets.iter())
                .all(|((p, a), (q, b))| {
                    p == q
                        && a.len() == b.len()
                        && a.iter().zip(b.iter()).all(|(x, y)| {
                            x.id == y.id && x.weight.to_bits() == y.weight.to_bits()
                        })
                })
            && self.members.len() == other.members.len()
    }
}
