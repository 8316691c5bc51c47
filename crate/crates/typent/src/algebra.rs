//! Exact ensemble-average engine.
//!
//! Haar-averaging a two-qudit gate on edge `X` acts on the span of the subset
//! permutation operators `T_S` as a simple rewrite: if `X` straddles the
//! boundary of `S`, `T_S` becomes `N_d (T_{S\X} + T_{S+X})`, otherwise it is
//! left alone. A [`PermPolynomial`] tracks the coefficients of the `T_S` as a
//! sparse subset-indexed map, and the sum of coefficients is the average
//! purity (each `T_S` pairs to 1 against a product state). Depth-k ensembles
//! average by iterating the rewrite.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeDistribution, QuditGraph, Subset};

/// The Haar-average constant N_d = d / (d^2 + 1).
///
/// A single Haar gate leaves one qudit with average purity 2 N_d.
pub fn nd_constant(d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid(format!("local dimension {d} < 2")));
    }
    let d = d as f64;
    Ok(d / (d * d + 1.0))
}

/// A formal real-weighted sum of subset permutation operators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PermPolynomial {
    terms: BTreeMap<Subset, f64>,
}

impl PermPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    /// The polynomial `1.0 * T_S`.
    pub fn unit(s: Subset) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(s, 1.0);
        PermPolynomial { terms }
    }

    /// Add `c * T_S`, merging with any existing coefficient.
    pub fn add_term(&mut self, s: Subset, c: f64) {
        *self.terms.entry(s).or_insert(0.0) += c;
    }

    pub fn coefficient(&self, s: Subset) -> f64 {
        self.terms.get(&s).copied().unwrap_or(0.0)
    }

    /// Terms in canonical (bit-mask) order.
    pub fn terms(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.terms.iter().map(|(&s, &c)| (s, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Sum of all coefficients; equals the ensemble-average purity when the
    /// polynomial was evolved from a single `T_A` with coefficient 1.
    pub fn purity(&self) -> f64 {
        self.terms.values().sum()
    }

    /// Drop terms with `|coefficient| < eps`; returns the discarded mass.
    pub fn prune(&mut self, eps: f64) -> f64 {
        if eps <= 0.0 {
            return 0.0;
        }
        let mut discarded = 0.0;
        self.terms.retain(|_, c| {
            if c.abs() < eps {
                discarded += c.abs();
                false
            } else {
                true
            }
        });
        discarded
    }

    /// `self + alpha * other`, term-wise.
    pub fn add_scaled(&self, other: &PermPolynomial, alpha: f64) -> PermPolynomial {
        let mut out = self.clone();
        for (s, c) in other.terms() {
            out.add_term(s, alpha * c);
        }
        out
    }

    /// One line per term, `subset-bitmask-hex coefficient`, sorted by mask.
    pub fn to_dump_string(&self) -> String {
        let mut out = String::new();
        for (s, c) in self.terms() {
            let _ = writeln!(out, "{:x} {:.16e}", s.bits(), c);
        }
        out
    }
}

/// Apply the single-edge averaging projector R_e to every term.
///
/// Terms whose subset is straddled by `e` split into the two neighbouring
/// subsets with weight N_d each; all other terms pass through unchanged.
pub fn apply_edge_projector(p: &PermPolynomial, e: Edge, d: u32) -> PermPolynomial {
    debug_assert!(d >= 2);
    let df = d as f64;
    let nd = df / (df * df + 1.0);
    let ex = e.as_subset();
    let mut out = PermPolynomial::new();
    for (s, c) in p.terms() {
        if e.straddles(s) {
            out.add_term(s.minus(ex), c * nd);
            out.add_term(s.union(ex), c * nd);
        } else {
            out.add_term(s, c);
        }
    }
    out
}

/// Apply the edge-mixture superoperator: sum over edges of p(X) R_X.
pub fn apply_mixture(
    p: &PermPolynomial,
    graph: &QuditGraph,
    dist: &EdgeDistribution,
) -> PermPolynomial {
    let df = graph.local_dim() as f64;
    let nd = df / (df * df + 1.0);
    let mut out = PermPolynomial::new();
    for (s, c) in p.terms() {
        for (&e, &pe) in graph.edges().iter().zip(dist.probs()) {
            if pe == 0.0 {
                continue;
            }
            if e.straddles(s) {
                let ex = e.as_subset();
                out.add_term(s.minus(ex), c * pe * nd);
                out.add_term(s.union(ex), c * pe * nd);
            } else {
                out.add_term(s, c * pe);
            }
        }
    }
    out
}

/// Apply one full sweep of edge projectors for a fixed gate ordering.
///
/// `ordering` lists the gates in the order they hit the state, so the
/// Heisenberg-picture averaging sweep processes the edges in reverse: the
/// last gate applied is the first projector to act on the polynomial.
pub fn apply_ordered_chain(
    p: &PermPolynomial,
    graph: &QuditGraph,
    ordering: &[Edge],
) -> Result<PermPolynomial> {
    validate_ordering(graph, ordering)?;
    Ok(sweep(p, ordering, graph.local_dim()))
}

fn sweep(p: &PermPolynomial, ordering: &[Edge], d: u32) -> PermPolynomial {
    let mut cur = p.clone();
    for &e in ordering.iter().rev() {
        cur = apply_edge_projector(&cur, e, d);
    }
    cur
}

fn validate_ordering(graph: &QuditGraph, ordering: &[Edge]) -> Result<()> {
    let mut given: Vec<Edge> = ordering.to_vec();
    let mut all: Vec<Edge> = graph.edges().to_vec();
    given.sort();
    all.sort();
    if given != all {
        return Err(Error::invalid(
            "ordering is not a permutation of the graph's edges",
        ));
    }
    Ok(())
}

/// The gate ordering with minimal purity loss on a chain: the boundary edge
/// fires first, then the bulk edges of each side proceed outward from the
/// boundary.
pub fn least_entangling_ordering(graph: &QuditGraph, a: Subset) -> Result<Vec<Edge>> {
    if !graph.is_chain() {
        return Err(Error::invalid("least-entangling ordering needs a chain graph"));
    }
    let l = graph.vertex_count();
    let l_a = a.len();
    if !a.is_prefix() || l_a == 0 || l_a >= l {
        return Err(Error::invalid(format!(
            "partition {a} is not a proper prefix interval of the chain"
        )));
    }
    let mut ordering = Vec::with_capacity(l - 1);
    ordering.push(Edge::new(l_a - 1, l_a)?);
    for i in (0..l_a.saturating_sub(1)).rev() {
        ordering.push(Edge::new(i, i + 1)?);
    }
    for i in l_a..l - 1 {
        ordering.push(Edge::new(i, i + 1)?);
    }
    Ok(ordering)
}

/// Which averaging superoperator to iterate.
#[derive(Clone, Debug)]
pub enum SuperopKind {
    /// Haar gate on one fixed edge.
    SingleEdge(Edge),
    /// One edge per tick, drawn from a distribution.
    Mixture(EdgeDistribution),
    /// Every edge once per tick, in a fixed gate order.
    OrderedChain(Vec<Edge>),
    /// Every edge once per tick, in a fresh uniformly random order per tick
    /// derived from the seed.
    RandomOrderChain(u64),
}

/// A superoperator together with the graph it acts on.
#[derive(Clone, Debug)]
pub struct SuperopSpec {
    graph: QuditGraph,
    kind: SuperopKind,
}

impl SuperopSpec {
    pub fn new(graph: QuditGraph, kind: SuperopKind) -> Result<Self> {
        match &kind {
            SuperopKind::SingleEdge(e) => {
                if !graph.contains_edge(*e) {
                    return Err(Error::invalid(format!("edge {e} not in graph")));
                }
            }
            SuperopKind::Mixture(dist) => {
                if dist.probs().len() != graph.edges().len() {
                    return Err(Error::invalid("distribution does not match graph edges"));
                }
            }
            SuperopKind::OrderedChain(ordering) => validate_ordering(&graph, ordering)?,
            SuperopKind::RandomOrderChain(_) => {
                if graph.edges().is_empty() {
                    return Err(Error::invalid("graph has no edges"));
                }
            }
        }
        Ok(SuperopSpec { graph, kind })
    }

    pub fn graph(&self) -> &QuditGraph {
        &self.graph
    }

    pub fn kind(&self) -> &SuperopKind {
        &self.kind
    }

    /// Apply one tick of the superoperator. For `RandomOrderChain` the edge
    /// permutation of tick `step` is a pure function of (seed, step).
    pub fn apply_step(&self, p: &PermPolynomial, step: u64) -> PermPolynomial {
        let d = self.graph.local_dim();
        match &self.kind {
            SuperopKind::SingleEdge(e) => apply_edge_projector(p, *e, d),
            SuperopKind::Mixture(dist) => apply_mixture(p, &self.graph, dist),
            SuperopKind::OrderedChain(ordering) => sweep(p, ordering, d),
            SuperopKind::RandomOrderChain(seed) => {
                let ordering = self.random_ordering(*seed, step);
                sweep(p, &ordering, d)
            }
        }
    }

    fn random_ordering(&self, seed: u64, step: u64) -> Vec<Edge> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(step);
        let mut ordering = self.graph.edges().to_vec();
        ordering.shuffle(&mut rng);
        ordering
    }
}

/// Result of [`iterate`]: the evolved polynomial plus the total coefficient
/// mass removed by pruning.
#[derive(Clone, Debug)]
pub struct IterationOutcome {
    pub poly: PermPolynomial,
    pub discarded_mass: f64,
}

/// Apply the superoperator `k` times (`k = 0` is the identity), pruning
/// coefficients below `prune_eps` after each tick.
pub fn iterate(
    p: &PermPolynomial,
    superop: &SuperopSpec,
    k: u32,
    prune_eps: f64,
) -> IterationOutcome {
    let mut poly = p.clone();
    let mut discarded_mass = 0.0;
    for step in 0..k as u64 {
        poly = superop.apply_step(&poly, step);
        discarded_mass += poly.prune(prune_eps);
    }
    IterationOutcome {
        poly,
        discarded_mass,
    }
}

/// The empty set plus every contiguous interval of a length-`l` chain
/// (including the full set). This family is invariant under all chain
/// superoperators.
pub fn interval_basis(l: usize) -> Vec<Subset> {
    let mut basis = vec![Subset::EMPTY];
    for len in 1..=l {
        for start in 0..=l - len {
            basis.push(Subset::interval(start, start + len));
        }
    }
    basis
}

/// Smallest superoperator-invariant subset family containing `seed_subset`,
/// grown breadth-first up to `cap` members.
///
/// For `RandomOrderChain` the closure is taken under the tick-0 sweep.
pub fn closure_basis(superop: &SuperopSpec, seed_subset: Subset, cap: usize) -> Result<Vec<Subset>> {
    let mut seen: BTreeSet<Subset> = BTreeSet::new();
    let mut queue: VecDeque<Subset> = VecDeque::new();
    seen.insert(seed_subset);
    queue.push_back(seed_subset);
    while let Some(s) = queue.pop_front() {
        let image = superop.apply_step(&PermPolynomial::unit(s), 0);
        for (t, _) in image.terms() {
            if seen.insert(t) {
                if seen.len() > cap {
                    return Err(Error::invalid(format!(
                        "closure of {seed_subset} exceeds the cap of {cap} subsets"
                    )));
                }
                queue.push_back(t);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Matrix of one superoperator tick in the given subset basis:
/// `M[j][i]` is the coefficient of `basis[j]` in the image of `basis[i]`.
///
/// For `RandomOrderChain` this represents the tick-0 sweep.
pub fn transfer_matrix(superop: &SuperopSpec, basis: &[Subset]) -> Result<DMatrix<f64>> {
    if basis.is_empty() {
        return Err(Error::invalid("empty basis"));
    }
    let index: BTreeMap<Subset, usize> =
        basis.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    if index.len() != basis.len() {
        return Err(Error::invalid("basis contains duplicate subsets"));
    }
    let n = basis.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &s) in basis.iter().enumerate() {
        let image = superop.apply_step(&PermPolynomial::unit(s), 0);
        for (t, c) in image.terms() {
            match index.get(&t) {
                Some(&j) => m[(j, i)] = c,
                None => {
                    return Err(Error::BasisNotClosed {
                        origin: s,
                        escaped: t,
                    })
                }
            }
        }
    }
    Ok(m)
}

/// Eigenvalue moduli of a transfer matrix, sorted descending.
#[derive(Clone, Debug)]
pub struct SpectralResult {
    /// All eigenvalue moduli, descending.
    pub moduli: Vec<f64>,
    /// Basis dimension (matrix size).
    pub dim: usize,
    /// Largest modulus; 1 for every superoperator in this module.
    pub leading: f64,
    /// `1 - |lambda_2|` where `lambda_2` is the largest modulus strictly
    /// below the leading unit cluster (multiplicity of the leading
    /// eigenvalue is ignored); 0 when no such eigenvalue exists.
    pub gap: f64,
}

const LEADING_TOL: f64 = 1e-10;
const CLUSTER_TOL: f64 = 1e-9;

/// Compute and sanity-check the spectrum of a transfer matrix.
pub fn spectral_analysis(m: &DMatrix<f64>) -> Result<SpectralResult> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::invalid("transfer matrix must be square and nonempty"));
    }
    let eigs = m.complex_eigenvalues();
    let mut moduli: Vec<f64> = eigs.iter().map(|z| z.norm()).collect();
    if moduli.iter().any(|v| !v.is_finite()) {
        return Err(Error::Computation("eigensolver returned non-finite values".into()));
    }
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let leading = moduli[0];
    if (leading - 1.0).abs() > LEADING_TOL {
        return Err(Error::Computation(format!(
            "leading eigenvalue modulus {leading} differs from 1 beyond {LEADING_TOL}"
        )));
    }
    let sub = moduli
        .iter()
        .copied()
        .find(|&v| v <= leading - CLUSTER_TOL);
    let gap = match sub {
        Some(v) => leading - v,
        None => 0.0,
    };
    Ok(SpectralResult {
        dim: moduli.len(),
        leading,
        gap,
        moduli,
    })
}
