//! Directed weighted hypergraphs and their energy function.
//!
//! A hyperedge `e = (T(e), H(e))` joins a non-empty tail set to a non-empty
//! head set (the two may overlap) with a positive weight. For a potential
//! vector `x` the energy of a hypergraph is
//!
//! ```text
//! Q(x) = sum_e w_e * max_{u in T(e), v in H(e)} (x_u - x_v)_+^2
//! ```
//!
//! which we evaluate per edge as `(max_T x - min_H x)_+^2`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Stable edge identity. Assigned in increasing order and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EdgeId(pub u64);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An edge before it has been given an id.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub tail: Vec<VertexId>,
    pub head: Vec<VertexId>,
    pub weight: f64,
}

impl EdgeSpec {
    pub fn new(
        tail: impl IntoIterator<Item = u32>,
        head: impl IntoIterator<Item = u32>,
        weight: f64,
    ) -> Self {
        Self {
            tail: tail.into_iter().map(VertexId).collect(),
            head: head.into_iter().map(VertexId).collect(),
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    id: EdgeId,
    tail: Arc<[VertexId]>,
    head: Arc<[VertexId]>,
    weight: f64,
}

fn normalize(mut vs: Vec<VertexId>, n: usize) -> Result<Arc<[VertexId]>> {
    vs.sort_unstable();
    vs.dedup();
    if let Some(v) = vs.last() {
        if v.index() >= n {
            return Err(Error::VertexOutOfRange { vertex: v.index(), n });
        }
    }
    Ok(vs.into())
}

pub(crate) fn check_weight(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWeight(w))
    }
}

impl Hyperedge {
    /// Validates `spec` against vertex count `n`. Tail and head are stored
    /// as sorted sets.
    pub fn new(id: EdgeId, spec: EdgeSpec, n: usize) -> Result<Self> {
        if spec.tail.is_empty() {
            return Err(Error::EmptyTail);
        }
        if spec.head.is_empty() {
            return Err(Error::EmptyHead);
        }
        check_weight(spec.weight)?;
        Ok(Self {
            id,
            tail: normalize(spec.tail, n)?,
            head: normalize(spec.head, n)?,
            weight: spec.weight,
        })
    }

    #[inline]
    pub fn id(&self) -> EdgeId {
        self.id
    }

    #[inline]
    pub fn tail(&self) -> &[VertexId] {
        &self.tail
    }

    #[inline]
    pub fn head(&self) -> &[VertexId] {
        &self.head
    }

    #[inline]
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Same edge with a new weight; tail and head storage is shared.
    pub fn with_weight(&self, weight: f64) -> Self {
        debug_assert!(weight > 0.0 && weight.is_finite());
        Self {
            id: self.id,
            tail: Arc::clone(&self.tail),
            head: Arc::clone(&self.head),
            weight,
        }
    }

    /// `|T(e) ∪ H(e)|`.
    pub fn span(&self) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        let (t, h) = (&*self.tail, &*self.head);
        while i < t.len() || j < h.len() {
            count += 1;
            match (t.get(i), h.get(j)) {
                (Some(a), Some(b)) if a == b => {
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a < b => i += 1,
                (Some(_), None) => i += 1,
                _ => j += 1,
            }
        }
        count
    }

    /// `max_{u in T, v in H} (x_u - x_v)_+^2`, without the weight.
    #[inline]
    pub fn stretch(&self, x: &[f64]) -> f64 {
        let hi = self
            .tail
            .iter()
            .map(|v| x[v.index()])
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = self
            .head
            .iter()
            .map(|v| x[v.index()])
            .fold(f64::INFINITY, f64::min);
        let d = hi - lo;
        if d > 0.0 {
            d * d
        } else {
            0.0
        }
    }

    /// This edge's contribution to the energy.
    #[inline]
    pub fn energy_term(&self, x: &[f64]) -> f64 {
        self.weight * self.stretch(x)
    }

    /// Whether the edge crosses the directed cut given by membership mask
    /// `inside`: some tail vertex inside and some head vertex outside.
    #[inline]
    pub fn crosses(&self, inside: impl Fn(VertexId) -> bool) -> bool {
        self.tail.iter().any(|&v| inside(v)) && self.head.iter().any(|&v| !inside(v))
    }
}

/// A real value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyVector(Vec<f64>);

impl EnergyVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        Ok(Self(values))
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// 0/1 indicator of `s` over `n` vertices.
    pub fn indicator(n: usize, s: &[VertexId]) -> Result<Self> {
        let mut v = vec![0.0; n];
        for &u in s {
            if u.index() >= n {
                return Err(Error::VertexOutOfRange { vertex: u.index(), n });
            }
            v[u.index()] = 1.0;
        }
        Ok(Self(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A hypergraph over vertices `0..n` with id-keyed edges. Iteration is
/// always in ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    n: usize,
    edges: BTreeMap<EdgeId, Hyperedge>,
}

impl Hypergraph {
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoVertices);
        }
        Ok(Self {
            n,
            edges: BTreeMap::new(),
        })
    }

    /// Builds a hypergraph whose edges get ids `0..specs.len()` in input order.
    pub fn new(n: usize, specs: impl IntoIterator<Item = EdgeSpec>) -> Result<Self> {
        let mut h = Self::empty(n)?;
        for (i, spec) in specs.into_iter().enumerate() {
            let e = Hyperedge::new(EdgeId(i as u64), spec, n)?;
            h.edges.insert(e.id, e);
        }
        Ok(h)
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Hyperedge>) -> Result<Self> {
        let mut h = Self::empty(n)?;
        for e in edges {
            h.insert(e)?;
        }
        Ok(h)
    }

    pub fn insert(&mut self, e: Hyperedge) -> Result<()> {
        let n = self.n;
        if let Some(v) = e.tail.iter().chain(e.head.iter()).find(|v| v.index() >= n) {
            return Err(Error::VertexOutOfRange { vertex: v.index(), n });
        }
        if self.edges.contains_key(&e.id) {
            return Err(Error::DuplicateEdge(e.id));
        }
        self.edges.insert(e.id, e);
        Ok(())
    }

    pub fn remove(&mut self, id: EdgeId) -> Result<Hyperedge> {
        self.edges.remove(&id).ok_or(Error::UnknownEdge(id))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &Hyperedge> + '_ {
        self.edges.values()
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Hyperedge> {
        self.edges.get(&id)
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.edges.contains_key(&id)
    }

    /// Largest `|T(e) ∪ H(e)|` over all edges; 0 when there are none.
    pub fn rank(&self) -> usize {
        self.edges.values().map(Hyperedge::span).max().unwrap_or(0)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().fold(0.0, |acc, e| acc + e.weight)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    pub fn energy(&self, x: &EnergyVector) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(self.energy_unchecked(x.as_slice()))
    }

    /// Energy of a raw slice; the caller guarantees `x.len() == n`.
    pub(crate) fn energy_unchecked(&self, x: &[f64]) -> f64 {
        self.edges.values().fold(0.0, |acc, e| acc + e.energy_term(x))
    }

    /// Total weight of edges with a tail vertex in `s` and a head vertex
    /// outside `s`. Equal to the energy of the indicator vector of `s`.
    pub fn directed_cut_value(&self, s: &[VertexId]) -> Result<f64> {
        let mut inside = vec![false; self.n];
        for &v in s {
            if v.index() >= self.n {
                return Err(Error::VertexOutOfRange {
                    vertex: v.index(),
                    n: self.n,
                });
            }
            inside[v.index()] = true;
        }
        Ok(self
            .edges
            .values()
            .filter(|e| e.crosses(|v| inside[v.index()]))
            .fold(0.0, |acc, e| acc + e.weight))
    }

    /// Cut value for the vertex set encoded in the low `n` bits of `mask`.
    /// Requires `n <= 64`.
    pub fn cut_value_mask(&self, mask: u64) -> f64 {
        debug_assert!(self.n <= 64);
        self.edges
            .values()
            .filter(|e| e.crosses(|v| mask >> v.0 & 1 == 1))
            .fold(0.0, |acc, e| acc + e.weight)
    }

    /// Edge-disjoint union of hypergraphs over the same vertex set.
    pub fn union_disjoint<'a>(parts: impl IntoIterator<Item = &'a Hypergraph>) -> Result<Self> {
        let mut parts = parts.into_iter();
        let Some(first) = parts.next() else {
            return Err(Error::InvalidArgument(
                "union of zero hypergraphs has no vertex count".into(),
            ));
        };
        let mut out = first.clone();
        for p in parts {
            if p.n != out.n {
                return Err(Error::VertexCountMismatch(out.n, p.n));
            }
            for e in p.edges.values() {
                if out.edges.contains_key(&e.id) {
                    return Err(Error::DuplicateEdge(e.id));
                }
                out.edges.insert(e.id, e.clone());
            }
        }
        Ok(out)
    }

    /// Copy with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        check_weight(c)?;
        let edges = self
            .edges
            .iter()
            .map(|(&id, e)| {
                let w = e.weight * c;
                check_weight(w).map(|_| (id, e.with_weight(w)))
            })
            .collect::<Result<_>>()?;
        Ok(Self { n: self.n, edges })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(ids: &[u32]) -> Vec<VertexId> {
        ids.iter().copied().map(VertexId).collect()
    }

    #[test]
    fn empty_hypergraph() {
        let h = Hypergraph::new(3, []).unwrap();
        assert_eq!(h.m(), 0);
        assert_eq!(h.rank(), 0);
        assert_eq!(h.energy(&EnergyVector::constant(3, 1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn single_edge_gets_id_zero() {
        let h = Hypergraph::new(3, [EdgeSpec::new([0, 1], [2], 2.0)]).unwrap();
        assert_eq!(h.m(), 1);
        assert_eq!(h.ids().collect::<Vec<_>>(), vec![EdgeId(0)]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Hypergraph::new(2, [EdgeSpec::new([0], [], 1.0)]),
            Err(Error::EmptyHead)
        );
        assert_eq!(
            Hypergraph::new(2, [EdgeSpec::new([], [1], 1.0)]),
            Err(Error::EmptyTail)
        );
        assert_eq!(
            Hypergraph::new(2, [EdgeSpec::new([0], [2], 1.0)]),
            Err(Error::VertexOutOfRange { vertex: 2, n: 2 })
        );
        for w in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                Hypergraph::new(2, [EdgeSpec::new([0], [1], w)]),
                Err(Error::InvalidWeight(_))
            ));
        }
        assert_eq!(Hypergraph::new(0, []), Err(Error::NoVertices));
    }

    #[test]
    fn rank_examples() {
        let h = Hypergraph::new(3, [EdgeSpec::new([0, 1], [1, 2], 1.0)]).unwrap();
        assert_eq!(h.rank(), 3);
        let h = Hypergraph::new(
            6,
            [
                EdgeSpec::new([0], [1], 1.0),
                EdgeSpec::new([0, 1, 2], [3, 4], 1.0),
            ],
        )
        .unwrap();
        assert_eq!(h.rank(), 5);
    }

    #[test]
    fn energy_examples() {
        // ({a,b},{c}), w=2, x=(3,1,0): 2 * max(9, 1) = 18
        let h = Hypergraph::new(3, [EdgeSpec::new([0, 1], [2], 2.0)]).unwrap();
        let x = EnergyVector::new(vec![3.0, 1.0, 0.0]).unwrap();
        assert_eq!(h.energy(&x).unwrap(), 18.0);

        // direction matters: ({a},{b}) with x_a < x_b has no energy
        let h = Hypergraph::new(2, [EdgeSpec::new([0], [1], 1.0)]).unwrap();
        let x = EnergyVector::new(vec![0.0, 5.0]).unwrap();
        assert_eq!(h.energy(&x).unwrap(), 0.0);

        let x = EnergyVector::new(vec![1.0]).unwrap();
        assert_eq!(
            h.energy(&x),
            Err(Error::LengthMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn overlapping_tail_and_head() {
        let h = Hypergraph::new(3, [EdgeSpec::new([0, 1], [1, 2], 1.0)]).unwrap();
        // pair (1,1) contributes nothing; (0,2) does
        let x = EnergyVector::new(vec![2.0, 7.0, -1.0]).unwrap();
        // max over pairs with u != v: (7 - -1)^2 = 64
        assert_eq!(h.energy(&x).unwrap(), 64.0);
        let x = EnergyVector::new(vec![0.0, 1.0, 1.0]).unwrap();
        assert_eq!(h.energy(&x).unwrap(), 0.0);
    }

    #[test]
    fn cut_examples() {
        let h = Hypergraph::new(3, [EdgeSpec::new([0], [1, 2], 3.0)]).unwrap();
        assert_eq!(h.directed_cut_value(&vs(&[0, 1])).unwrap(), 3.0);
        assert_eq!(h.directed_cut_value(&[]).unwrap(), 0.0);
        assert_eq!(h.directed_cut_value(&vs(&[0, 1, 2])).unwrap(), 0.0);
        let h = Hypergraph::new(2, [EdgeSpec::new([0], [1], 1.0)]).unwrap();
        assert_eq!(h.directed_cut_value(&vs(&[1])).unwrap(), 0.0);
        assert!(h.directed_cut_value(&vs(&[5])).is_err());
        assert_eq!(h.cut_value_mask(0b01), 1.0);
    }

    #[test]
    fn union_examples() {
        let a = Hypergraph::new(3, [EdgeSpec::new([0], [1], 1.0)]).unwrap();
        let empty = Hypergraph::empty(3).unwrap();
        assert_eq!(Hypergraph::union_disjoint([&a, &empty]).unwrap(), a);
        assert_eq!(
            Hypergraph::union_disjoint([&a, &a]),
            Err(Error::DuplicateEdge(EdgeId(0)))
        );
        let b = Hypergraph::empty(4).unwrap();
        assert_eq!(
            Hypergraph::union_disjoint([&a, &b]),
            Err(Error::VertexCountMismatch(3, 4))
        );
    }

    #[test]
    fn span_counts_union() {
        let e = Hyperedge::new(EdgeId(0), EdgeSpec::new([3, 1, 1], [1, 4, 0], 1.0), 5).unwrap();
        assert_eq!(e.tail(), &vs(&[1, 3])[..]);
        assert_eq!(e.span(), 4);
    }
}
