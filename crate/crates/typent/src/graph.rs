//! Qudit interaction graphs: vertex subsets, bipartitions, boundary edges,
//! and probability distributions over edges.
//!
//! Vertices are 0-based contiguous integers and subsets are 64-bit masks, so
//! the engine supports up to 64 vertices.

use std::fmt;

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 64;

/// A set of vertices of a [`QuditGraph`], stored as a bit mask.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_bits(bits: u64) -> Self {
        Subset(bits)
    }

    /// The full vertex set of an `n`-vertex graph.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_VERTICES);
        if n == MAX_VERTICES {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    /// The contiguous range `start..end` of vertices.
    pub fn interval(start: usize, end: usize) -> Self {
        assert!(start <= end && end <= MAX_VERTICES);
        (start..end).collect()
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, v: usize) -> bool {
        v < MAX_VERTICES && self.0 >> v & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn minus(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn complement(self, n: usize) -> Subset {
        Subset(Self::full(n).0 & !self.0)
    }

    pub fn vertices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(v)
            }
        })
    }

    /// `Some((start, len))` if the subset is a contiguous nonempty range.
    pub fn as_interval(self) -> Option<(usize, usize)> {
        if self.0 == 0 {
            return None;
        }
        let start = self.0.trailing_zeros() as usize;
        let len = (self.0 >> start).trailing_ones() as usize;
        if self.0 >> start == (Subset::full(len).0) {
            Some((start, len))
        } else {
            None
        }
    }

    /// True when the subset is `{0, .., m}` for some `m` (or empty).
    pub fn is_prefix(self) -> bool {
        self.0 == 0 || matches!(self.as_interval(), Some((0, _)))
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut bits = 0u64;
        for v in iter {
            assert!(v < MAX_VERTICES, "vertex {v} out of range");
            bits |= 1 << v;
        }
        Subset(bits)
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.vertices()).finish()
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// An unordered pair of distinct vertices, stored with `u < v`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    u: usize,
    v: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::invalid(format!("self-loop at vertex {a}")));
        }
        Ok(Edge {
            u: a.min(b),
            v: a.max(b),
        })
    }

    pub fn endpoints(self) -> (usize, usize) {
        (self.u, self.v)
    }

    pub fn as_subset(self) -> Subset {
        [self.u, self.v].into_iter().collect()
    }

    /// True when exactly one endpoint lies in `a`.
    pub fn straddles(self, a: Subset) -> bool {
        a.contains(self.u) != a.contains(self.v)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.u, self.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// The interaction geometry: `n` qudits of local dimension `d` and the set of
/// edges on which two-qudit gates may act.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuditGraph {
    n: usize,
    d: u32,
    edges: Vec<Edge>,
}

impl QuditGraph {
    pub fn new(n: usize, d: u32, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        if n > MAX_VERTICES {
            return Err(Error::invalid(format!(
                "graph has {n} vertices; at most {MAX_VERTICES} supported"
            )));
        }
        if d < 2 {
            return Err(Error::invalid(format!("local dimension {d} < 2")));
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &edges {
            if e.v >= n {
                return Err(Error::invalid(format!("edge {e} endpoint out of [0, {n})")));
            }
            if !seen.insert(*e) {
                return Err(Error::invalid(format!("duplicate edge {e}")));
            }
        }
        Ok(QuditGraph { n, d, edges })
    }

    /// Path graph on `l` vertices: edges `{i, i+1}` for `i = 0..l-1`.
    pub fn chain(l: usize, d: u32) -> Result<Self> {
        if l < 2 {
            return Err(Error::invalid(format!("chain length {l} < 2")));
        }
        let edges = (0..l - 1)
            .map(|i| Edge::new(i, i + 1))
            .collect::<Result<Vec<_>>>()?;
        QuditGraph::new(l, d, edges)
    }

    /// Cycle graph on `l` vertices.
    pub fn cycle(l: usize, d: u32) -> Result<Self> {
        if l < 3 {
            return Err(Error::invalid(format!("cycle length {l} < 3")));
        }
        let edges = (0..l)
            .map(|i| Edge::new(i, (i + 1) % l))
            .collect::<Result<Vec<_>>>()?;
        QuditGraph::new(l, d, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn local_dim(&self) -> u32 {
        self.d
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn full_set(&self) -> Subset {
        Subset::full(self.n)
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    /// True when the edge set is exactly that of the path `0-1-..-(n-1)`.
    pub fn is_chain(&self) -> bool {
        if self.edges.len() != self.n.saturating_sub(1) {
            return false;
        }
        let mut sorted = self.edges.clone();
        sorted.sort();
        sorted
            .iter()
            .enumerate()
            .all(|(i, e)| e.endpoints() == (i, i + 1))
    }

    /// Edges with one endpoint in `a` and one in the complement.
    pub fn boundary_edges(&self, a: Subset) -> Vec<Edge> {
        self.edges.iter().copied().filter(|e| e.straddles(a)).collect()
    }

    pub fn uniform_edge_distribution(&self) -> Result<EdgeDistribution> {
        if self.edges.is_empty() {
            return Err(Error::invalid("graph has no edges"));
        }
        let p = 1.0 / self.edges.len() as f64;
        EdgeDistribution::new(self, vec![p; self.edges.len()])
    }
}

/// A probability distribution over the edges of a graph, aligned with the
/// graph's edge order.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeDistribution {
    probs: Vec<f64>,
}

impl EdgeDistribution {
    pub fn new(graph: &QuditGraph, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != graph.edges().len() {
            return Err(Error::invalid(format!(
                "{} probabilities for {} edges",
                probs.len(),
                graph.edges().len()
            )));
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::invalid("edge probabilities must be nonnegative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "edge probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(EdgeDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Total probability mass on edges straddling `a`; for the uniform
    /// distribution this is the boundary fraction q = |dA| / |E|.
    pub fn boundary_fraction(&self, graph: &QuditGraph, a: Subset) -> f64 {
        graph
            .edges()
            .iter()
            .zip(&self.probs)
            .filter(|(e, _)| e.straddles(a))
            .map(|(_, p)| p)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_construction() {
        let g = QuditGraph::chain(2, 2).unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 1).unwrap()]);

        let g = QuditGraph::chain(4, 2).unwrap();
        let expect: Vec<Edge> = [(0, 1), (1, 2), (2, 3)]
            .iter()
            .map(|&(a, b)| Edge::new(a, b).unwrap())
            .collect();
        assert_eq!(g.edges(), expect.as_slice());

        let g = QuditGraph::chain(8, 3).unwrap();
        assert_eq!(g.edges().len(), 7);
        assert_eq!(g.local_dim(), 3);
        assert!(g.is_chain());
    }

    #[test]
    fn chain_rejects_degenerate() {
        assert!(matches!(
            QuditGraph::chain(1, 2),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            QuditGraph::chain(4, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cycle_construction() {
        assert_eq!(QuditGraph::cycle(3, 2).unwrap().edges().len(), 3);
        assert_eq!(QuditGraph::cycle(12, 2).unwrap().edges().len(), 12);
        let g = QuditGraph::cycle(4, 5).unwrap();
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.local_dim(), 5);
        assert!(!g.is_chain());
        assert!(matches!(
            QuditGraph::cycle(2, 2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn boundary_edges_basic() {
        let g = QuditGraph::chain(4, 2).unwrap();
        let a = Subset::interval(0, 2);
        assert_eq!(g.boundary_edges(a), vec![Edge::new(1, 2).unwrap()]);

        let g = QuditGraph::cycle(12, 2).unwrap();
        let arc = Subset::interval(0, 4);
        assert_eq!(g.boundary_edges(arc).len(), 2);

        assert!(g.boundary_edges(Subset::EMPTY).is_empty());
        assert!(g.boundary_edges(g.full_set()).is_empty());
    }

    #[test]
    fn boundary_symmetric_under_complement() {
        let g = QuditGraph::cycle(9, 2).unwrap();
        for bits in [0u64, 0b1, 0b10110, 0b111111111] {
            let a = Subset::from_bits(bits);
            assert_eq!(
                g.boundary_edges(a),
                g.boundary_edges(a.complement(9)),
                "A = {a}"
            );
        }
    }

    #[test]
    fn uniform_distribution() {
        let g = QuditGraph::chain(4, 2).unwrap();
        let dist = g.uniform_edge_distribution().unwrap();
        for &p in dist.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }

        let g = QuditGraph::cycle(12, 2).unwrap();
        let dist = g.uniform_edge_distribution().unwrap();
        let q = dist.boundary_fraction(&g, Subset::interval(0, 4));
        assert!((q - 2.0 / 12.0).abs() < 1e-15);

        // single-edge system: the trivial distribution p(e) = 1
        let g = QuditGraph::chain(2, 2).unwrap();
        let dist = g.uniform_edge_distribution().unwrap();
        assert_eq!(dist.probs(), &[1.0]);
    }

    #[test]
    fn distribution_validation() {
        let g = QuditGraph::chain(3, 2).unwrap();
        assert!(EdgeDistribution::new(&g, vec![0.5, 0.5, 0.5]).is_err());
        assert!(EdgeDistribution::new(&g, vec![1.5, -0.5]).is_err());
        assert!(EdgeDistribution::new(&g, vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn subset_interval_recognition() {
        assert_eq!(Subset::interval(2, 5).as_interval(), Some((2, 3)));
        assert_eq!(Subset::from_bits(0b1011).as_interval(), None);
        assert_eq!(Subset::EMPTY.as_interval(), None);
        assert!(Subset::interval(0, 3).is_prefix());
        assert!(!Subset::interval(1, 3).is_prefix());
        assert_eq!(Subset::full(64).len(), 64);
    }

    #[test]
    fn graph_validation() {
        let e = Edge::new(0, 1).unwrap();
        assert!(QuditGraph::new(2, 2, vec![e, e]).is_err());
        assert!(QuditGraph::new(2, 2, vec![Edge::new(0, 5).unwrap()]).is_err());
        assert!(Edge::new(3, 3).is_err());
        assert!(QuditGraph::new(65, 2, vec![]).is_err());
    }
}
