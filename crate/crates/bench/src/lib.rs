//! Shared fixtures for the criterion benches.

use dhsparse::generate::{random_hypergraph, StreamGen, WeightDist};
use dhsparse::rng::derive;
use dhsparse::{DynamicSparsifier, EdgeSpec, Hypergraph, SparsifyConfig, Update};

/// Config that recurses on small inputs so every level does real work.
pub fn forced_config(seed: u64) -> SparsifyConfig {
    SparsifyConfig {
        mstar_override: Some(0),
        lambda_override: Some(8),
        ..SparsifyConfig::default().with_seed(seed)
    }
}

pub fn graph(n: usize, m: usize, r: usize, seed: u64) -> Hypergraph {
    random_hypergraph(n, m, r, WeightDist::Uniform, seed).expect("valid generator parameters")
}

pub fn specs(h: &Hypergraph) -> Vec<EdgeSpec> {
    h.edges()
        .map(|e| EdgeSpec {
            tail: e.tail().to_vec(),
            head: e.head().to_vec(),
            weight: e.weight(),
        })
        .collect()
}

/// A dynamic structure holding `m` random edges, plus a generator for a
/// mixed stream that keeps the live count at most `m`.
pub fn loaded(n: usize, m: usize, r: usize, cfg: SparsifyConfig, seed: u64) -> (DynamicSparsifier, StreamGen) {
    let h = graph(n, m, r, derive(seed, 1));
    let mut ds = DynamicSparsifier::new(n, m.max(1), cfg).expect("valid config");
    ds.add_batch(specs(&h)).expect("fits capacity");
    let mut gen = StreamGen::new(n, r, WeightDist::Uniform, m, 0.5, derive(seed, 2)).expect("valid stream");
    gen.assume_added(m);
    (ds, gen)
}

/// Pre-generated batches of mixed updates for `loaded(n, m, r, _, seed)`.
pub fn batches(n: usize, m: usize, r: usize, seed: u64, batch: usize, count: usize) -> Vec<Vec<Update>> {
    let mut gen = StreamGen::new(n, r, WeightDist::Uniform, m, 0.5, derive(seed, 2)).expect("valid stream");
    gen.assume_added(m);
    (0..count).map(|_| gen.next_batch(batch)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_line_up() {
        let (mut ds, _) = loaded(8, 64, 3, forced_config(1), 5);
        for b in batches(8, 64, 3, 5, 4, 10) {
            ds.apply_batch(b, dhsparse::Scheduler::Sequential).unwrap();
        }
        assert!(ds.len() <= 64);
        ds.validate().unwrap();
    }
}
