//! Seeded random hypergraphs and update streams.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};

use crate::error::{Error, Result};
use crate::format::Update;
use crate::hypergraph::{EdgeId, EdgeSpec, Hypergraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDist {
    /// Uniform on `(0, 1]`.
    Uniform,
    /// Pareto with scale 1 and the given shape.
    Pareto(f64),
    Constant(f64),
}

impl FromStr for WeightDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad weight distribution `{s}`"));
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            let v: f64 = a.ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(bad())
            }
        };
        match name {
            "uniform" if arg.is_none() => Ok(Self::Uniform),
            "pareto" => Ok(Self::Pareto(num(arg)?)),
            "const" | "constant" => Ok(Self::Constant(num(arg)?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for WeightDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform => write!(f, "uniform"),
            Self::Pareto(a) => write!(f, "pareto:{a}"),
            Self::Constant(c) => write!(f, "const:{c}"),
        }
    }
}

/// Draws random edges with `|T ∪ H| <= r`.
#[derive(Debug, Clone)]
pub struct EdgeSampler {
    n: usize,
    r: usize,
    dist: WeightDist,
    rng: ChaCha8Rng,
}

impl EdgeSampler {
    /// `r == 1` is only accepted with `allow_self`, in which case every edge
    /// is a self-loop `({v}, {v})`.
    pub fn new(n: usize, r: usize, dist: WeightDist, seed: u64, allow_self: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoVertices);
        }
        if r > n {
            return Err(Error::InvalidArgument(format!("rank {r} exceeds n = {n}")));
        }
        if r < 2 && !(r == 1 && allow_self) {
            return Err(Error::InvalidArgument(
                "rank must be at least 2 (rank 1 needs --allow-self)".into(),
            ));
        }
        if let WeightDist::Pareto(a) | WeightDist::Constant(a) = dist {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidArgument(format!("bad distribution parameter {a}")));
            }
        }
        Ok(Self {
            n,
            r,
            dist,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn weight(&mut self) -> f64 {
        match self.dist {
            WeightDist::Uniform => 1.0 - self.rng.random::<f64>(),
            WeightDist::Pareto(a) => Pareto::new(1.0, a)
                .expect("validated shape")
                .sample(&mut self.rng),
            WeightDist::Constant(c) => c,
        }
    }

    pub fn next_spec(&mut self) -> EdgeSpec {
        let weight = self.weight();
        if self.r == 1 {
            let v = VertexId(self.rng.random_range(0..self.n) as u32);
            return EdgeSpec {
                tail: vec![v],
                head: vec![v],
                weight,
            };
        }
        let a = self.rng.random_range(1..=self.r / 2);
        let b = self.rng.random_range(1..=self.r - a);
        let mut pick = |k: usize| -> Vec<VertexId> {
            let mut v: Vec<VertexId> = index::sample(&mut self.rng, self.n, k)
                .into_iter()
                .map(|i| VertexId(i as u32))
                .collect();
            v.sort_unstable();
            v
        };
        let tail = pick(a);
        let head = pick(b);
        EdgeSpec { tail, head, weight }
    }
}

pub fn random_hypergraph(
    n: usize,
    m: usize,
    r: usize,
    dist: WeightDist,
    seed: u64,
) -> Result<Hypergraph> {
    let mut s = EdgeSampler::new(n, r, dist, seed, false)?;
    Hypergraph::new(n, (0..m).map(|_| s.next_spec()))
}

/// Random add/delete stream against a structure whose next assigned id and
/// live ids are tracked here. Never exceeds `max_live` live edges and never
/// deletes from an empty structure.
#[derive(Debug, Clone)]
pub struct StreamGen {
    edges: EdgeSampler,
    rng: ChaCha8Rng,
    live: Vec<EdgeId>,
    next_id: u64,
    max_live: usize,
    p_add: f64,
}

impl StreamGen {
    pub fn new(
        n: usize,
        r: usize,
        dist: WeightDist,
        max_live: usize,
        p_add: f64,
        seed: u64,
    ) -> Result<Self> {
        Ok(Self {
            edges: EdgeSampler::new(n, r, dist, crate::rng::derive(seed, 1), false)?,
            rng: ChaCha8Rng::seed_from_u64(crate::rng::derive(seed, 2)),
            live: Vec::new(),
            next_id: 0,
            max_live,
            p_add,
        })
    }

    /// Registers ids `next_id..next_id+count` as live (e.g. after loading an
    /// initial hypergraph).
    pub fn assume_added(&mut self, count: usize) {
        for _ in 0..count {
            self.live.push(EdgeId(self.next_id));
            self.next_id += 1;
        }
    }

    pub fn live(&self) -> usize {
        self.live.len()
    }

    pub fn next_update(&mut self) -> Update {
        let add = self.live.is_empty()
            || (self.live.len() < self.max_live && self.rng.random::<f64>() < self.p_add);
        if add {
            self.live.push(EdgeId(self.next_id));
            self.next_id += 1;
            Update::Add(self.edges.next_spec())
        } else {
            let i = self.rng.random_range(0..self.live.len());
            Update::Del(self.live.swap_remove(i))
        }
    }

    /// A batch of up to `size` updates, valid to apply as deletes-then-adds:
    /// deletions only name edges live before the batch.
    pub fn next_batch(&mut self, size: usize) -> Vec<Update> {
        let mut dels = 0usize;
        let mut adds = 0usize;
        let mut out = Vec::with_capacity(size);
        let before_live = self.live.len();
        for _ in 0..size {
            let can_del = before_live > dels;
            let can_add = before_live - dels + adds < self.max_live;
            let add = match (can_add, can_del) {
                (true, true) => self.rng.random::<f64>() < self.p_add,
                (true, false) => true,
                (false, true) => false,
                (false, false) => break,
            };
            if add {
                adds += 1;
                out.push(Update::Add(self.edges.next_spec()));
            } else {
                // only pick among edges that were live before this batch
                let pool = before_live - dels;
                let i = self.rng.random_range(0..pool);
                let id = self.live[i];
                self.live.swap(i, pool - 1);
                dels += 1;
                out.push(Update::Del(id));
            }
        }
        // drop the deleted ones (moved to the tail of the old region)
        let keep = before_live - dels;
        self.live.drain(keep..before_live);
        for _ in 0..adds {
            self.live.push(EdgeId(self.next_id));
            self.next_id += 1;
        }
        out
    }
}
