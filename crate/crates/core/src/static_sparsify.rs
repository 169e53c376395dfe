//! One-shot sparsification.
//!
//! [`coreset_and_sample`] splits a hypergraph into a coreset (for every
//! vertex pair, up to `λ` of the heaviest edges not yet taken) and a sample
//! of the remaining edges, each kept with probability 1/2 at twice its
//! weight. [`spectral_sparsify`] recurses on the sample only, collecting the
//! coresets, so the result is `C_1 ∪ ... ∪ C_last ∪ S_last`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::hypergraph::{EdgeId, Hypergraph};
use crate::pair_index::{PairIndex, PairKey};
use crate::rng::SamplingStream;

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyConfig {
    /// Target accuracy, `0 < eps < 1`.
    pub eps: f64,
    /// Multiplier in the per-pair coreset size.
    pub c_lambda: f64,
    /// Multiplier in the recursion guard; at least 3.
    pub c: f64,
    /// Replaces the computed `λ` when set.
    pub lambda_override: Option<usize>,
    /// Replaces the computed `m★` when set.
    pub mstar_override: Option<usize>,
    pub seed: u64,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        Self {
            eps: 0.5,
            c_lambda: 1.0,
            c: 3.0,
            lambda_override: None,
            mstar_override: None,
            seed: 0,
        }
    }
}

/// `max(1, log2 m)`.
fn log_term(m: usize) -> f64 {
    if m <= 1 {
        1.0
    } else {
        (m as f64).log2().max(1.0)
    }
}

/// `⌈c_λ · max(1, log2 m)^3 / eps^2⌉`.
pub fn lambda_formula(m: usize, c_lambda: f64, eps: f64) -> usize {
    (c_lambda * log_term(m).powi(3) / (eps * eps)).ceil() as usize
}

/// `⌈n^2 / eps^2 · max(1, log2 m)^3⌉`.
pub fn mstar_formula(n: usize, eps: f64, m: usize) -> usize {
    let n = n as f64;
    (n * n / (eps * eps) * log_term(m).powi(3)).ceil() as usize
}

/// Number of recursion levels allowed for `m` edges: `⌈ln m / ln(4/3)⌉`.
pub fn level_budget(m: usize) -> Result<usize> {
    match m {
        0 => Err(Error::EmptyEdgeSet),
        1 => Ok(0),
        _ => Ok(((m as f64).ln() / (4.0f64 / 3.0).ln()).ceil() as usize),
    }
}

impl SparsifyConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if !(self.c_lambda > 0.0 && self.c_lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "c_lambda must be positive, got {}",
                self.c_lambda
            )));
        }
        if !(self.c >= 3.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("c must be >= 3, got {}", self.c)));
        }
        Ok(())
    }

    pub fn lambda_for(&self, m: usize, eps_effective: f64) -> usize {
        self.lambda_override
            .unwrap_or_else(|| lambda_formula(m, self.c_lambda, eps_effective))
    }

    pub fn mstar_for(&self, n: usize, m: usize) -> usize {
        self.mstar_override
            .unwrap_or_else(|| mstar_formula(n, self.eps, m))
    }
}

/// Result of one coreset-and-sample pass, with the pair each coreset edge
/// was taken for.
#[derive(Debug, Clone, PartialEq)]
pub struct CoresetSample {
    pub coreset: Hypergraph,
    pub sample: Hypergraph,
    pub attribution: BTreeMap<EdgeId, PairKey>,
    pub lambda: usize,
}

/// Index, coreset and sample ids of one level, before materialization.
#[derive(Debug, Clone)]
pub(crate) struct LevelBuild {
    pub index: PairIndex,
    pub coreset: BTreeMap<EdgeId, PairKey>,
    pub sample: BTreeSet<EdgeId>,
    pub lambda: usize,
    pub stream: SamplingStream,
}

pub(crate) fn build_level(input: &Hypergraph, lambda: usize, stream: SamplingStream) -> LevelBuild {
    let index = PairIndex::build(input);
    let mut coreset = BTreeMap::new();
    if lambda > 0 {
        for p in index.pairs() {
            let mut taken = 0;
            for id in index.bucket(p) {
                if taken == lambda {
                    break;
                }
                if let std::collections::btree_map::Entry::Vacant(slot) = coreset.entry(id) {
                    slot.insert(p);
                    taken += 1;
                }
            }
        }
    }
    let sample = input
        .ids()
        .filter(|id| !coreset.contains_key(id) && stream.keep(*id))
        .collect();
    LevelBuild {
        index,
        coreset,
        sample,
        lambda,
        stream,
    }
}

/// Builds a hypergraph from `ids` of `source`, with weights scaled by `factor`.
fn restrict(source: &Hypergraph, ids: impl Iterator<Item = EdgeId>, factor: f64) -> Hypergraph {
    let mut out = Hypergraph::empty(source.n()).expect("n >= 1");
    for id in ids {
        let e = source.edge(id).expect("subset of source");
        out.insert(e.with_weight(e.weight() * factor))
            .expect("ids are distinct");
    }
    out
}

impl LevelBuild {
    pub(crate) fn coreset_graph(&self, input: &Hypergraph) -> Hypergraph {
        restrict(input, self.coreset.keys().copied(), 1.0)
    }

    pub(crate) fn sample_graph(&self, input: &Hypergraph) -> Hypergraph {
        restrict(input, self.sample.iter().copied(), 2.0)
    }
}

pub fn coreset_and_sample(
    h: &Hypergraph,
    eps_effective: f64,
    cfg: &SparsifyConfig,
    stream: SamplingStream,
) -> CoresetSample {
    let lambda = cfg.lambda_for(h.m(), eps_effective);
    let lb = build_level(h, lambda, stream);
    CoresetSample {
        coreset: lb.coreset_graph(h),
        sample: lb.sample_graph(h),
        attribution: lb.coreset.clone(),
        lambda,
    }
}

/// Level count, threshold and per-level accuracy fixed at the start of a
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RecursionPlan {
    pub k: usize,
    pub mstar: usize,
    pub eps_level: f64,
    pub threshold: f64,
}

impl RecursionPlan {
    pub fn new(h: &Hypergraph, cfg: &SparsifyConfig) -> Self {
        let m = h.m();
        let k = if m == 0 { 0 } else { level_budget(m).expect("m >= 1") };
        let mstar = cfg.mstar_for(h.n(), m);
        let eps_level = if k == 0 { cfg.eps } else { cfg.eps / (2 * k) as f64 };
        Self {
            k,
            mstar,
            eps_level,
            threshold: 32.0 * cfg.c * mstar as f64,
        }
    }

    /// Whether a level is built on top of `size` edges when `done` levels
    /// exist already.
    pub fn continues(&self, done: usize, size: usize) -> bool {
        done < self.k && size > 0 && size as f64 >= self.threshold
    }
}

/// Runs the recursion, handing each level's input and build to `visit`.
/// Returns the plan and the final sample (the input of the level that was
/// not built).
pub(crate) fn recurse(
    h: &Hypergraph,
    cfg: &SparsifyConfig,
    mut visit: impl FnMut(usize, &Hypergraph, LevelBuild),
) -> (RecursionPlan, Hypergraph) {
    let plan = RecursionPlan::new(h, cfg);
    let mut current = h.clone();
    let mut level = 0;
    while plan.continues(level, current.m()) {
        level += 1;
        let lambda = cfg.lambda_for(current.m(), plan.eps_level);
        let lb = build_level(&current, lambda, SamplingStream::new(cfg.seed, level as u64));
        let next = lb.sample_graph(&current);
        visit(level, &current, lb);
        current = next;
    }
    (plan, current)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelArtifacts {
    pub level: usize,
    pub coreset: Hypergraph,
    pub sample: Hypergraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifierBundle {
    pub levels: Vec<LevelArtifacts>,
    pub i_last: usize,
    pub sparsifier: Hypergraph,
    pub k: usize,
    pub mstar: usize,
}

pub fn spectral_sparsify(h: &Hypergraph, cfg: &SparsifyConfig) -> Result<SparsifierBundle> {
    cfg.validate()?;
    let mut levels = Vec::new();
    let mut sparsifier = Hypergraph::empty(h.n())?;
    let (plan, last) = recurse(h, cfg, |level, input, lb| {
        let coreset = lb.coreset_graph(input);
        for e in coreset.edges() {
            sparsifier.insert(e.clone()).expect("coresets are disjoint");
        }
        levels.push(LevelArtifacts {
            level,
            coreset,
            sample: lb.sample_graph(input),
        });
    });
    for e in last.edges() {
        sparsifier.insert(e.clone()).expect("final sample is disjoint from coresets");
    }
    Ok(SparsifierBundle {
        i_last: levels.len(),
        levels,
        sparsifier,
        k: plan.k,
        mstar: plan.mstar,
    })
}
