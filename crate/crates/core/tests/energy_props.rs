use dhsparse::verify::{decomposable_at, exact_energy};
use dhsparse::{EdgeSpec, EnergyVector, Hypergraph, VertexId};
use proptest::prelude::*;

const N: usize = 7;

fn edge() -> impl Strategy<Value = EdgeSpec> {
    (
        prop::collection::btree_set(0..N as u32, 1..4),
        prop::collection::btree_set(0..N as u32, 1..4),
        1u32..64,
    )
        .prop_map(|(t, h, w)| EdgeSpec::new(t, h, w as f64 / 8.0))
}

fn hypergraph() -> impl Strategy<Value = Hypergraph> {
    prop::collection::vec(edge(), 0..30).prop_map(|es| Hypergraph::new(N, es).unwrap())
}

fn real_vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, N)
}

/// Multiples of 1/4 in a small range: sums and squares stay exact.
fn dyadic_vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-64i32..64).prop_map(|v| v as f64 / 4.0), N)
}

fn ev(v: Vec<f64>) -> EnergyVector {
    EnergyVector::new(v).unwrap()
}

proptest! {
    #[test]
    fn energy_is_non_negative(h in hypergraph(), x in real_vector()) {
        prop_assert!(h.energy(&ev(x)).unwrap() >= 0.0);
    }

    #[test]
    fn translation_invariance(h in hypergraph(), x in dyadic_vector(), c in -64i32..64) {
        let shifted: Vec<f64> = x.iter().map(|v| v + c as f64 / 2.0).collect();
        prop_assert_eq!(h.energy(&ev(x)).unwrap(), h.energy(&ev(shifted)).unwrap());
    }

    #[test]
    fn quadratic_scaling(h in hypergraph(), x in real_vector(), p in -6i32..6) {
        let c = 2f64.powi(p);
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        prop_assert_eq!(h.energy(&ev(scaled)).unwrap(), c * c * h.energy(&ev(x)).unwrap());
    }

    #[test]
    fn weight_linearity(h in hypergraph(), x in real_vector(), p in -6i32..6) {
        let c = 2f64.powi(p);
        let x = ev(x);
        prop_assert_eq!(h.scaled(c).unwrap().energy(&x).unwrap(), c * h.energy(&x).unwrap());
    }

    #[test]
    fn cuts_equal_indicator_energy(h in hypergraph(), mask in 0u64..(1 << N)) {
        let s: Vec<VertexId> = (0..N as u32).filter(|v| mask >> v & 1 == 1).map(VertexId).collect();
        let cut = h.directed_cut_value(&s).unwrap();
        prop_assert_eq!(cut, h.energy(&EnergyVector::indicator(N, &s).unwrap()).unwrap());
        prop_assert_eq!(cut, h.cut_value_mask(mask));
    }

    #[test]
    fn additivity_over_partitions(h in hypergraph(), labels in prop::collection::vec(0usize..3, 30), x in real_vector()) {
        let mut parts = vec![Hypergraph::empty(N).unwrap(); 3];
        for (e, l) in h.edges().zip(&labels) {
            parts[*l].insert(e.clone()).unwrap();
        }
        let x = ev(x);
        prop_assert!(decomposable_at(&parts, std::slice::from_ref(&x)).unwrap());
        let union = Hypergraph::union_disjoint(&parts).unwrap();
        prop_assert_eq!(exact_energy(&union, &x).unwrap(), exact_energy(&h, &x).unwrap());
    }

    #[test]
    fn dyadic_additivity_in_floating_point(h in hypergraph(), x in dyadic_vector()) {
        let (a, b): (Vec<_>, Vec<_>) = h.edges().cloned().partition(|e| e.id().0 % 2 == 0);
        let a = Hypergraph::from_edges(N, a).unwrap();
        let b = Hypergraph::from_edges(N, b).unwrap();
        let x = ev(x);
        prop_assert_eq!(h.energy(&x).unwrap(), a.energy(&x).unwrap() + b.energy(&x).unwrap());
    }
}

#[test]
fn spec_examples() {
    let h = Hypergraph::new(3, [EdgeSpec::new([0, 1], [2], 2.0)]).unwrap();
    assert_eq!(h.energy(&ev(vec![3.0, 1.0, 0.0])).unwrap(), 18.0);
    let h = Hypergraph::new(2, [EdgeSpec::new([0], [1], 1.0)]).unwrap();
    assert_eq!(h.energy(&ev(vec![0.0, 5.0])).unwrap(), 0.0);
    assert!(h.energy(&ev(vec![0.0])).is_err());
}
