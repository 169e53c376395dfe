//! Spectral sparsification of directed hypergraphs under edge insertions
//! and deletions.
//!
//! The energy of a vector `x` with respect to a hypergraph `H` is
//! `Q_H(x) = Σ_e w_e · (max_{u∈T(e)} x_u − min_{v∈H(e)} x_v)₊²`. A
//! `(1±ε)`-sparsifier `H̃` is a reweighted sub-hypergraph with
//! `(1−ε)·Q_H̃(x) ≤ Q_H(x) ≤ (1+ε)·Q_H̃(x)` for every `x`.
//!
//! * [`spectral_sparsify`] builds one from scratch.
//! * [`DecrementalSparsifier`] maintains one under deletions.
//! * [`DynamicSparsifier`] maintains one under insertions and deletions.
//! * [`verify`] holds brute-force and statistical checks.

pub mod decremental;
pub mod dynamic;
pub mod error;
pub mod format;
pub mod generate;
pub mod hypergraph;
pub mod pair_index;
pub mod rng;
pub mod static_sparsify;
pub mod verify;

use std::fmt;
use std::str::FromStr;

pub use decremental::{DecrementalSparsifier, RecourseReport};
pub use dynamic::{DynamicSparsifier, DynamicStats, UpdateKind, UpdateMetrics};
pub use error::{Error, Result};
pub use format::{StreamEntry, StreamItem, Update};
pub use hypergraph::{EdgeId, EdgeSpec, EnergyVector, Hyperedge, Hypergraph, VertexId};
pub use pair_index::{PairIndex, PairKey};
pub use static_sparsify::{
    coreset_and_sample, level_budget, spectral_sparsify, CoresetSample, LevelArtifacts,
    SparsifierBundle, SparsifyConfig,
};
pub use verify::ApproxReport;

/// How batch operations execute. Both produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Scheduler {
    #[default]
    Sequential,
    Parallel,
}

impl FromStr for Scheduler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq" | "sequential" => Ok(Self::Sequential),
            "par" | "parallel" => Ok(Self::Parallel),
            _ => Err(Error::InvalidArgument(format!("unknown scheduler `{s}`"))),
        }
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sequential => "seq",
            Self::Parallel => "par",
        })
    }
}
