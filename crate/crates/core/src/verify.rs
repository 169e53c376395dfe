//! Brute-force and statistical checks of the sparsifier guarantee
//! `(1−ε)·Q_H̃(x) ≤ Q_H(x) ≤ (1+ε)·Q_H̃(x)`.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hypergraph::{EnergyVector, Hypergraph};
use crate::rng::{derive, derive_labeled, SamplingStream};
use crate::static_sparsify::{coreset_and_sample, SparsifyConfig};

pub const MAX_CUT_VERTICES: usize = 16;
const MAX_WITNESSES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    pub trials: usize,
    /// Smallest `Q_H / Q_H̃` over probes where both are positive.
    pub worst_ratio_low: f64,
    /// Largest `Q_H / Q_H̃` over probes where both are positive.
    pub worst_ratio_high: f64,
    /// Largest `|Q_H̃ − Q_H| / max(Q_H, 1)`.
    pub max_rel_error: f64,
    pub violations: usize,
    pub witnesses: Vec<Vec<f64>>,
}

impl ApproxReport {
    fn new() -> Self {
        Self {
            trials: 0,
            worst_ratio_low: f64::INFINITY,
            worst_ratio_high: f64::NEG_INFINITY,
            max_rel_error: 0.0,
            violations: 0,
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, q: f64, qt: f64, eps: f64, x: impl FnOnce() -> Vec<f64>) {
        self.trials += 1;
        self.max_rel_error = self.max_rel_error.max((qt - q).abs() / q.max(1.0));
        let ok = match (q > 0.0, qt > 0.0) {
            (false, false) => true,
            (true, true) => {
                let ratio = q / qt;
                self.worst_ratio_low = self.worst_ratio_low.min(ratio);
                self.worst_ratio_high = self.worst_ratio_high.max(ratio);
                (1.0 - eps) * qt <= q && q <= (1.0 + eps) * qt
            }
            _ => false,
        };
        if !ok {
            self.violations += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(x());
            }
        }
    }

    fn finish(mut self) -> Self {
        if self.worst_ratio_low > self.worst_ratio_high {
            self.worst_ratio_low = 1.0;
            self.worst_ratio_high = 1.0;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// The ratio furthest from 1 in multiplicative terms.
    pub fn worst_ratio(&self) -> f64 {
        if self.worst_ratio_high * self.worst_ratio_low >= 1.0 {
            self.worst_ratio_high
        } else {
            self.worst_ratio_low
        }
    }

    /// Combines reports of independent probe sets.
    pub fn merge(mut self, other: &ApproxReport) -> Self {
        self.trials += other.trials;
        self.worst_ratio_low = self.worst_ratio_low.min(other.worst_ratio_low);
        self.worst_ratio_high = self.worst_ratio_high.max(other.worst_ratio_high);
        self.max_rel_error = self.max_rel_error.max(other.max_rel_error);
        self.violations += other.violations;
        for w in &other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w.clone());
            }
        }
        self
    }
}

fn same_n(h: &Hypergraph, ht: &Hypergraph) -> Result<()> {
    if h.n() != ht.n() {
        return Err(Error::VertexCountMismatch(h.n(), ht.n()));
    }
    Ok(())
}

pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Probes with `trials` standard normal vectors.
pub fn check_random_vectors(
    h: &Hypergraph,
    ht: &Hypergraph,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<ApproxReport> {
    same_n(h, ht)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_labeled(seed, "probe"));
    let mut report = ApproxReport::new();
    for _ in 0..trials {
        let x = random_vector(h.n(), &mut rng);
        let q = h.energy_unchecked(&x);
        let qt = ht.energy_unchecked(&x);
        report.record(q, qt, eps, || x);
    }
    Ok(report.finish())
}

/// Compares the two directed cut functions on all `2^n` vertex subsets.
pub fn check_all_cuts(h: &Hypergraph, ht: &Hypergraph, eps: f64) -> Result<ApproxReport> {
    same_n(h, ht)?;
    let n = h.n();
    if n > MAX_CUT_VERTICES {
        return Err(Error::TooManyVertices {
            n,
            max: MAX_CUT_VERTICES,
        });
    }
    let mut report = ApproxReport::new();
    for mask in 0..1u64 << n {
        let q = h.cut_value_mask(mask);
        let qt = ht.cut_value_mask(mask);
        report.record(q, qt, eps, || {
            (0..n).map(|v| (mask >> v & 1) as f64).collect()
        });
    }
    Ok(report.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnbiasednessReport {
    pub runs: usize,
    pub target: f64,
    pub mean: f64,
    pub std_err: f64,
    pub passed: bool,
}

/// Monte Carlo estimate of `E[Q_{C∪S}(x)]` over `runs` independent
/// coreset-and-sample passes with `λ = 0`.
pub fn sampling_unbiasedness(
    h: &Hypergraph,
    eps_effective: f64,
    runs: usize,
    x: &EnergyVector,
    seed: u64,
) -> Result<UnbiasednessReport> {
    let cfg = SparsifyConfig {
        lambda_override: Some(0),
        ..Default::default()
    };
    sampling_unbiasedness_with(h, eps_effective, runs, x, seed, &cfg)
}

/// As [`sampling_unbiasedness`] with an explicit configuration.
pub fn sampling_unbiasedness_with(
    h: &Hypergraph,
    eps_effective: f64,
    runs: usize,
    x: &EnergyVector,
    seed: u64,
    cfg: &SparsifyConfig,
) -> Result<UnbiasednessReport> {
    if runs < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 runs, got {runs}")));
    }
    let target = h.energy(x)?;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for run in 0..runs {
        let stream = SamplingStream::new(derive(seed, run as u64), 1);
        let cs = coreset_and_sample(h, eps_effective, cfg, stream);
        let q = cs.coreset.energy_unchecked(x.as_slice()) + cs.sample.energy_unchecked(x.as_slice());
        let k = (run + 1) as f64;
        let delta = q - mean;
        mean += delta / k;
        m2 += delta * (q - mean);
    }
    let var = m2 / (runs - 1) as f64;
    let std_err = (var / runs as f64).sqrt();
    Ok(UnbiasednessReport {
        runs,
        target,
        mean,
        std_err,
        passed: (mean - target).abs() <= 4.0 * std_err,
    })
}

/// Exact value of a finite non-negative `f64`, scaled by `2^1074`.
fn exact(v: f64) -> BigInt {
    debug_assert!(v.is_finite() && v >= 0.0);
    let bits = v.to_bits();
    let exp = (bits >> 52 & 0x7ff) as usize;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        BigInt::from(frac)
    } else {
        BigInt::from(frac | 1u64 << 52) << (exp - 1)
    }
}

/// `Q_H(x)` as the exact real sum of the per-edge `f64` terms, scaled by
/// `2^1074`.
pub fn exact_energy(h: &Hypergraph, x: &EnergyVector) -> Result<BigInt> {
    if x.len() != h.n() {
        return Err(Error::LengthMismatch {
            expected: h.n(),
            got: x.len(),
        });
    }
    Ok(h.edges().fold(BigInt::zero(), |acc, e| {
        acc + exact(e.energy_term(x.as_slice()))
    }))
}

/// Whether the energy of the union equals the sum of the parts' energies,
/// exactly, at every `x` given.
pub fn decomposable_at(parts: &[Hypergraph], xs: &[EnergyVector]) -> Result<bool> {
    let Some(first) = parts.first() else {
        return Ok(true);
    };
    let union = Hypergraph::union_disjoint(parts)?;
    for x in xs {
        if x.len() != first.n() {
            return Err(Error::LengthMismatch {
                expected: first.n(),
                got: x.len(),
            });
        }
        let mut sum = BigInt::zero();
        for p in parts {
            sum += exact_energy(p, x)?;
        }
        if exact_energy(&union, x)? != sum {
            return Ok(false);
        }
    }
    Ok(true)
}

/// [`decomposable_at`] over `trials` standard normal vectors.
pub fn decomposability_check(parts: &[Hypergraph], trials: usize, seed: u64) -> Result<bool> {
    let Some(first) = parts.first() else {
        return Ok(true);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_labeled(seed, "decompose"));
    let xs: Vec<EnergyVector> = (0..trials)
        .map(|_| EnergyVector::new(random_vector(first.n(), &mut rng)))
        .collect::<Result<_>>()?;
    decomposable_at(parts, &xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_hypergraph, WeightDist};
    use crate::hypergraph::{EdgeId, EdgeSpec};
    use crate::static_sparsify::spectral_sparsify;

    #[test]
    fn identity_sparsifier() {
        let h = random_hypergraph(8, 60, 4, WeightDist::Uniform, 1).unwrap();
        let r = check_random_vectors(&h, &h, 1e-12, 200, 3).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!((r.worst_ratio_low, r.worst_ratio_high), (1.0, 1.0));
        let r = check_all_cuts(&h, &h, 1e-12).unwrap();
        assert_eq!(r.trials, 256);
        assert_eq!(r.violations, 0);
        assert_eq!(r.max_rel_error, 0.0);
    }

    #[test]
    fn both_empty() {
        let h = Hypergraph::empty(5).unwrap();
        assert!(check_random_vectors(&h, &h, 0.1, 50, 0).unwrap().passed());
        assert!(check_all_cuts(&h, &h, 0.1).unwrap().passed());
    }

    #[test]
    fn halved_dominant_edge_is_caught() {
        let h = Hypergraph::new(
            3,
            [EdgeSpec::new([0], [1], 100.0), EdgeSpec::new([1], [2], 0.01)],
        )
        .unwrap();
        let mut ht = h.clone();
        let e = ht.remove(EdgeId(0)).unwrap();
        ht.insert(e.with_weight(50.0)).unwrap();
        assert!(check_random_vectors(&h, &ht, 0.01, 100, 1).unwrap().violations >= 1);
        let r = check_all_cuts(&h, &ht, 0.01).unwrap();
        assert!(r.violations >= 1);
        assert!(!r.witnesses.is_empty());
    }

    #[test]
    fn missing_edge_breaks_a_cut() {
        let h = Hypergraph::new(
            3,
            [EdgeSpec::new([0], [1], 1.0), EdgeSpec::new([0], [2], 1.0)],
        )
        .unwrap();
        let mut ht = h.clone();
        ht.remove(EdgeId(1)).unwrap();
        let r = check_all_cuts(&h, &ht, 0.4).unwrap();
        // s = {0, 1}: Q_H = 1, Q_H̃ = 0
        assert!(r.witnesses.contains(&vec![1.0, 1.0, 0.0]));
    }

    #[test]
    fn cut_limits() {
        let h = Hypergraph::empty(17).unwrap();
        assert!(matches!(
            check_all_cuts(&h, &h, 0.1),
            Err(Error::TooManyVertices { n: 17, .. })
        ));
        let one = Hypergraph::empty(1).unwrap();
        let r = check_all_cuts(&one, &one, 0.1).unwrap();
        assert_eq!((r.trials, r.violations), (2, 0));
        let other = Hypergraph::empty(2).unwrap();
        assert!(check_random_vectors(&one, &other, 0.1, 1, 0).is_err());
    }

    #[test]
    fn exactness_path_passes_tiny_eps() {
        let h = random_hypergraph(10, 100, 5, WeightDist::Pareto(1.5), 4).unwrap();
        let cfg = SparsifyConfig {
            lambda_override: Some(100),
            mstar_override: Some(0),
            ..Default::default()
        };
        let b = spectral_sparsify(&h, &cfg).unwrap();
        assert!(check_all_cuts(&h, &b.sparsifier, 1e-9).unwrap().passed());
        assert!(check_random_vectors(&h, &b.sparsifier, 1e-9, 100, 2).unwrap().passed());
    }

    #[test]
    fn unbiasedness_examples() {
        let x = EnergyVector::new(vec![1.0, 0.0]).unwrap();
        let empty = Hypergraph::empty(2).unwrap();
        let r = sampling_unbiasedness(&empty, 0.5, 100, &x, 0).unwrap();
        assert_eq!(r.mean, 0.0);
        assert!(r.passed);

        let one = Hypergraph::new(2, [EdgeSpec::new([0], [1], 1.0)]).unwrap();
        let r = sampling_unbiasedness(&one, 0.5, 4000, &x, 1).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.mean - 1.0).abs() < 0.1);

        let cfg = SparsifyConfig {
            lambda_override: Some(10),
            ..Default::default()
        };
        let r = sampling_unbiasedness_with(&one, 0.5, 100, &x, 2, &cfg).unwrap();
        assert_eq!((r.mean, r.std_err), (1.0, 0.0));
        assert!(sampling_unbiasedness(&one, 0.5, 99, &x, 0).is_err());
    }

    #[test]
    fn exact_conversion() {
        assert_eq!(exact(0.0), BigInt::zero());
        assert_eq!(exact(f64::from_bits(1)), BigInt::from(1));
        assert_eq!(exact(1.0), BigInt::from(1) << 1074);
        assert_eq!(exact(0.75) + exact(0.25), exact(1.0));
    }

    #[test]
    fn decomposability() {
        let h = random_hypergraph(6, 90, 4, WeightDist::Uniform, 9).unwrap();
        let mut parts = vec![Hypergraph::empty(6).unwrap(); 3];
        for e in h.edges() {
            parts[(e.id().0 % 3) as usize].insert(e.clone()).unwrap();
        }
        assert!(decomposability_check(&parts, 100, 1).unwrap());
        assert!(decomposability_check(&parts[..1], 10, 1).unwrap());
        assert!(decomposability_check(&[], 10, 1).unwrap());
        let overlapping = vec![parts[0].clone(), parts[0].clone()];
        assert!(decomposability_check(&overlapping, 1, 0).is_err());
    }
}
