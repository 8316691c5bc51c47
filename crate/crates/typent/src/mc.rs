//! Monte Carlo engine: Haar-random two-qudit circuits on product states,
//! exact per-sample reduced purities, ensemble aggregation.
//!
//! Sample `i` of a run draws all of its randomness from stream `i` of a
//! ChaCha generator seeded with the master seed, so results are bit-identical
//! for a given `(seed, spec, samples)` triple regardless of how the samples
//! are scheduled across workers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::Distribution;
use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::algebra::{SuperopKind, SuperopSpec};
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeDistribution, QuditGraph, Subset};
use crate::stats::PurityStats;

/// Default refusal threshold for the amplitude array: 1 GiB is 2^26 complex
/// doubles, i.e. 26 qubit-equivalents.
pub const DEFAULT_MEM_CAP_GIB: f64 = 1.0;

const BYTES_PER_AMP: f64 = 16.0;

/// A dense complex square matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    dim: usize,
    elems: Vec<Complex64>,
}

impl Unitary {
    pub fn identity(dim: usize) -> Self {
        let mut elems = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            elems[i * dim + i] = Complex64::ONE;
        }
        Unitary { dim, elems }
    }

    /// The two-qudit swap |x,y> -> |y,x> on a d*d-dimensional pair space.
    pub fn swap_pair(d: usize) -> Self {
        let dim = d * d;
        let mut elems = vec![Complex64::ZERO; dim * dim];
        for x in 0..d {
            for y in 0..d {
                elems[(y * d + x) * dim + (x * d + y)] = Complex64::ONE;
            }
        }
        Unitary { dim, elems }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elems[row * self.dim + col]
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Unitary) -> Unitary {
        assert_eq!(self.dim, rhs.dim);
        let dim = self.dim;
        let mut elems = vec![Complex64::ZERO; dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let a = self.elems[r * dim + k];
                for c in 0..dim {
                    elems[r * dim + c] += a * rhs.elems[k * dim + c];
                }
            }
        }
        Unitary { dim, elems }
    }

    /// Largest entry-wise deviation of U-dagger U from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let dim = self.dim;
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::ZERO;
                for k in 0..dim {
                    acc += self.elems[k * dim + r].conj() * self.elems[k * dim + c];
                }
                let target = if r == c { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

/// Draw a Haar-distributed unitary: QR-decompose a complex Ginibre matrix
/// and absorb the phases of R's diagonal into Q, which makes the
/// distribution exactly invariant.
pub fn sample_haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Unitary> {
    if dim < 2 {
        return Err(Error::invalid(format!("unitary dimension {dim} < 2")));
    }
    let ginibre = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = ginibre.qr();
    let q = qr.q();
    let r = qr.r();
    let mut elems = vec![Complex64::ZERO; dim * dim];
    for col in 0..dim {
        let rdiag = r[(col, col)];
        let phase = if rdiag.norm() > 0.0 {
            rdiag / rdiag.norm()
        } else {
            Complex64::ONE
        };
        for row in 0..dim {
            elems[row * dim + col] = q[(row, col)] * phase;
        }
    }
    Ok(Unitary { dim, elems })
}

/// A sampled two-qudit gate bound to the edge it acts on.
#[derive(Clone, Debug)]
pub struct GateSample {
    pub edge: Edge,
    pub unitary: Unitary,
}

/// A normalized pure state of `n` qudits of dimension `d`, with site `s`
/// stored at stride `d^s` (site 0 varies fastest).
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    d: u32,
    amps: Vec<Complex64>,
}

/// Error unless `d^n` amplitudes fit under `cap_gib` gibibytes.
pub fn check_memory_cap(n: usize, d: u32, cap_gib: f64) -> Result<usize> {
    let amps_f = (d as f64).powi(n as i32);
    let required_gib = amps_f * BYTES_PER_AMP / (1u64 << 30) as f64;
    // a NaN cap refuses everything
    if cap_gib.is_nan() || required_gib > cap_gib {
        let amplitudes = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        return Err(Error::MemoryCap {
            amplitudes,
            required_gib,
            cap_gib,
        });
    }
    Ok(amps_f as usize)
}

impl StateVector {
    /// The product state |0..0>.
    pub fn zero_state(n: usize, d: u32, mem_cap_gib: f64) -> Result<Self> {
        if n == 0 || d < 2 {
            return Err(Error::invalid(format!("need n >= 1 and d >= 2, got n={n}, d={d}")));
        }
        let len = check_memory_cap(n, d, mem_cap_gib)?;
        let mut amps = vec![Complex64::ZERO; len];
        amps[0] = Complex64::ONE;
        Ok(StateVector { n, d, amps })
    }

    /// Wrap explicit amplitudes; must be length d^n and unit norm.
    pub fn from_amplitudes(n: usize, d: u32, amps: Vec<Complex64>) -> Result<Self> {
        let expect = (d as usize).pow(n as u32);
        if amps.len() != expect {
            return Err(Error::invalid(format!(
                "{} amplitudes for a {expect}-dimensional space",
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state has norm {norm}")));
        }
        Ok(StateVector { n, d, amps })
    }

    pub fn site_count(&self) -> usize {
        self.n
    }

    pub fn local_dim(&self) -> u32 {
        self.d
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Apply a two-qudit gate in place over strided amplitude blocks.
    ///
    /// The gate basis is |x_u, x_v> with `u < v` the normalized edge
    /// endpoints and pair index `x_u * d + x_v`. One application costs
    /// O(d^n * d^2) arithmetic and touches no auxiliary buffer larger than
    /// d^2 amplitudes.
    pub fn apply_two_site_gate(&mut self, gate: &GateSample) -> Result<()> {
        let d = self.d as usize;
        let dd = d * d;
        if gate.unitary.dim() != dd {
            return Err(Error::invalid(format!(
                "gate dimension {} does not match local pair dimension {dd}",
                gate.unitary.dim()
            )));
        }
        let (u, v) = gate.edge.endpoints();
        if v >= self.n {
            return Err(Error::invalid(format!(
                "edge {} outside a {}-site state",
                gate.edge, self.n
            )));
        }
        let stride_u = d.pow(u as u32);
        let stride_v = d.pow(v as u32);
        let block_u = stride_u * d;
        let block_v = stride_v * d;
        let matrix = &gate.unitary.elems;
        let mut scratch = vec![Complex64::ZERO; dd];

        let len = self.amps.len();
        let mut high = 0;
        while high < len {
            let mut mid = high;
            while mid < high + stride_v {
                for base in mid..mid + stride_u {
                    for xu in 0..d {
                        for xv in 0..d {
                            scratch[xu * d + xv] =
                                self.amps[base + xu * stride_u + xv * stride_v];
                        }
                    }
                    for row in 0..dd {
                        let mut acc = Complex64::ZERO;
                        for col in 0..dd {
                            acc += matrix[row * dd + col] * scratch[col];
                        }
                        let xu = row / d;
                        let xv = row % d;
                        self.amps[base + xu * stride_u + xv * stride_v] = acc;
                    }
                }
                mid += block_u;
            }
            high += block_v;
        }
        debug_assert!((self.norm() - 1.0).abs() < 1e-10);
        Ok(())
    }

    /// Purity of the reduced state on `a`: matricize the amplitudes into a
    /// d^|A| x d^|B| array M and return the squared Frobenius norm of M
    /// times its adjoint. The Gram matrix is formed on the smaller side,
    /// which leaves the value unchanged.
    pub fn reduced_purity(&self, a: Subset) -> Result<f64> {
        let full = Subset::full(self.n);
        if !a.minus(full).is_empty() {
            return Err(Error::invalid(format!(
                "partition {a} outside a {}-site state",
                self.n
            )));
        }
        if a.is_empty() || a == full {
            return Err(Error::invalid(
                "partition must be a proper nonempty subset (purity would be trivially 1)",
            ));
        }
        let d = self.d as usize;
        let a_sites: Vec<usize> = a.vertices().collect();
        let b_sites: Vec<usize> = a.complement(self.n).vertices().collect();
        let (row_sites, col_sites) = if a_sites.len() <= b_sites.len() {
            (a_sites, b_sites)
        } else {
            (b_sites, a_sites)
        };
        let row_off = site_offsets(&row_sites, d);
        let col_off = site_offsets(&col_sites, d);

        let mut purity = 0.0;
        for r in 0..row_off.len() {
            let mut diag = Complex64::ZERO;
            for &c in &col_off {
                diag += self.amps[row_off[r] + c] * self.amps[row_off[r] + c].conj();
            }
            purity += diag.norm_sqr();
            for rp in r + 1..row_off.len() {
                let mut g = Complex64::ZERO;
                for &c in &col_off {
                    g += self.amps[row_off[r] + c] * self.amps[row_off[rp] + c].conj();
                }
                purity += 2.0 * g.norm_sqr();
            }
        }
        Ok(purity)
    }
}

/// All index offsets generated by the digits of the given sites, in
/// lexicographic digit order (first site fastest).
fn site_offsets(sites: &[usize], d: usize) -> Vec<usize> {
    let strides: Vec<usize> = sites.iter().map(|&s| d.pow(s as u32)).collect();
    let count = d.pow(sites.len() as u32);
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut rem = idx;
        let mut off = 0;
        for &stride in &strides {
            off += (rem % d) * stride;
            rem /= d;
        }
        out.push(off);
    }
    out
}

/// Gate order for the chain model.
#[derive(Clone, Debug)]
pub enum ChainOrdering {
    /// The same gate order every tick.
    Fixed(Vec<Edge>),
    /// A fresh uniformly random edge permutation every tick.
    RandomPerStep,
}

/// How each tick of the circuit is drawn.
#[derive(Clone, Debug)]
pub enum CircuitModel {
    /// One Haar gate on a fixed edge per tick.
    SingleEdge(Edge),
    /// One Haar gate on an edge drawn from a distribution per tick.
    RandomEdge(EdgeDistribution),
    /// A Haar gate on every edge per tick, ordered per `ChainOrdering`.
    Chain(ChainOrdering),
}

/// Defines the depth-k ensemble: geometry, bipartition, circuit model.
#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub graph: QuditGraph,
    pub part: Subset,
    pub model: CircuitModel,
    pub depth: u32,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let full = self.graph.full_set();
        if !self.part.minus(full).is_empty() {
            return Err(Error::invalid(format!(
                "partition {} outside the {}-vertex graph",
                self.part,
                self.graph.vertex_count()
            )));
        }
        if self.part.is_empty() || self.part == full {
            return Err(Error::invalid("partition must be a proper nonempty subset"));
        }
        match &self.model {
            CircuitModel::SingleEdge(e) => {
                if !self.graph.contains_edge(*e) {
                    return Err(Error::invalid(format!("edge {e} not in graph")));
                }
            }
            CircuitModel::RandomEdge(dist) => {
                if dist.probs().len() != self.graph.edges().len() {
                    return Err(Error::invalid("distribution does not match graph edges"));
                }
            }
            CircuitModel::Chain(ChainOrdering::Fixed(ordering)) => {
                // reuse the algebra-side permutation check
                SuperopSpec::new(self.graph.clone(), SuperopKind::OrderedChain(ordering.clone()))?;
            }
            CircuitModel::Chain(ChainOrdering::RandomPerStep) => {
                if self.graph.edges().is_empty() {
                    return Err(Error::invalid("graph has no edges"));
                }
            }
        }
        Ok(())
    }

    /// The exact-engine superoperator computing the same ensemble average.
    ///
    /// For `RandomPerStep` the returned superoperator is one seeded
    /// realization of the tick orderings, not the average over orderings,
    /// so Monte Carlo agreement is expected only in the averaged models.
    pub fn superop(&self, seed: u64) -> Result<SuperopSpec> {
        let kind = match &self.model {
            CircuitModel::SingleEdge(e) => SuperopKind::SingleEdge(*e),
            CircuitModel::RandomEdge(dist) => SuperopKind::Mixture(dist.clone()),
            CircuitModel::Chain(ChainOrdering::Fixed(ordering)) => {
                SuperopKind::OrderedChain(ordering.clone())
            }
            CircuitModel::Chain(ChainOrdering::RandomPerStep) => {
                SuperopKind::RandomOrderChain(seed)
            }
        };
        SuperopSpec::new(self.graph.clone(), kind)
    }
}

/// Sampling controls for [`run_ensemble`].
#[derive(Clone, Debug)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub mem_cap_gib: f64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            mem_cap_gib: DEFAULT_MEM_CAP_GIB,
        }
    }
}

/// Result of a Monte Carlo run: aggregate statistics plus the per-sample
/// purities in sample-index order.
#[derive(Clone, Debug)]
pub struct EnsembleRun {
    pub stats: PurityStats,
    pub purities: Vec<f64>,
}

/// Sample the ensemble and aggregate purity statistics.
///
/// Samples run concurrently; each owns its state vector and RNG stream, and
/// aggregation happens in canonical sample order, so the output is fully
/// deterministic in `(seed, spec, samples)`.
pub fn run_ensemble(spec: &EnsembleSpec, cfg: &McConfig) -> Result<EnsembleRun> {
    spec.validate()?;
    if cfg.samples == 0 {
        return Err(Error::invalid("at least one sample required"));
    }
    check_memory_cap(spec.graph.vertex_count(), spec.graph.local_dim(), cfg.mem_cap_gib)?;
    let purities: Vec<f64> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| sample_purity(spec, cfg, i))
        .collect::<Result<_>>()?;
    let stats = PurityStats::from_purities(&purities)?;
    Ok(EnsembleRun { stats, purities })
}

fn sample_purity(spec: &EnsembleSpec, cfg: &McConfig, index: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);

    let d = spec.graph.local_dim();
    let pair_dim = (d as usize) * (d as usize);
    let mut state =
        StateVector::zero_state(spec.graph.vertex_count(), d, cfg.mem_cap_gib)?;

    match &spec.model {
        CircuitModel::SingleEdge(e) => {
            for _ in 0..spec.depth {
                let unitary = sample_haar_unitary(pair_dim, &mut rng)?;
                state.apply_two_site_gate(&GateSample { edge: *e, unitary })?;
            }
        }
        CircuitModel::RandomEdge(dist) => {
            let weights = WeightedIndex::new(dist.probs().iter().copied())
                .map_err(|e| Error::invalid(format!("bad edge distribution: {e}")))?;
            for _ in 0..spec.depth {
                let edge = spec.graph.edges()[weights.sample(&mut rng)];
                let unitary = sample_haar_unitary(pair_dim, &mut rng)?;
                state.apply_two_site_gate(&GateSample { edge, unitary })?;
            }
        }
        CircuitModel::Chain(ChainOrdering::Fixed(ordering)) => {
            for _ in 0..spec.depth {
                for &edge in ordering {
                    let unitary = sample_haar_unitary(pair_dim, &mut rng)?;
                    state.apply_two_site_gate(&GateSample { edge, unitary })?;
                }
            }
        }
        CircuitModel::Chain(ChainOrdering::RandomPerStep) => {
            let mut ordering = spec.graph.edges().to_vec();
            for _ in 0..spec.depth {
                ordering.shuffle(&mut rng);
                for &edge in &ordering {
                    let unitary = sample_haar_unitary(pair_dim, &mut rng)?;
                    state.apply_two_site_gate(&GateSample { edge, unitary })?;
                }
            }
        }
    }

    if spec.depth > 0 {
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Computation(format!(
                "state norm drifted to {norm} in sample {index}"
            )));
        }
    }
    state.reduced_purity(spec.part)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn edge(a: usize, b: usize) -> Edge {
        Edge::new(a, b).unwrap()
    }

    #[test]
    fn haar_samples_are_unitary() {
        let mut r = rng(1);
        for dim in [2usize, 4, 9] {
            for _ in 0..40 {
                let u = sample_haar_unitary(dim, &mut r).unwrap();
                assert!(u.unitarity_error() < 1e-12, "dim {dim}");
            }
        }
        assert!(sample_haar_unitary(1, &mut r).is_err());
    }

    #[test]
    fn identity_gate_is_noop() {
        let mut state = StateVector::zero_state(3, 2, DEFAULT_MEM_CAP_GIB).unwrap();
        let mut r = rng(2);
        let haar = sample_haar_unitary(4, &mut r).unwrap();
        state
            .apply_two_site_gate(&GateSample { edge: edge(0, 2), unitary: haar })
            .unwrap();
        let before = state.amplitudes().to_vec();
        state
            .apply_two_site_gate(&GateSample { edge: edge(0, 2), unitary: Unitary::identity(4) })
            .unwrap();
        for (a, b) in before.iter().zip(state.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn swap_gate_exchanges_local_states() {
        // |phi_0> x |phi_1> on 2 qubits, site 0 at stride 1
        let phi0 = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        let phi1 = [
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
        ];
        let mut amps = vec![Complex64::ZERO; 4];
        for x0 in 0..2 {
            for x1 in 0..2 {
                amps[x0 + 2 * x1] = phi0[x0] * phi1[x1];
            }
        }
        let mut state = StateVector::from_amplitudes(2, 2, amps).unwrap();
        state
            .apply_two_site_gate(&GateSample { edge: edge(0, 1), unitary: Unitary::swap_pair(2) })
            .unwrap();
        for x0 in 0..2 {
            for x1 in 0..2 {
                let expect = phi1[x0] * phi0[x1];
                assert!((state.amplitudes()[x0 + 2 * x1] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn gates_preserve_norm() {
        let mut state = StateVector::zero_state(4, 3, DEFAULT_MEM_CAP_GIB).unwrap();
        let mut r = rng(3);
        for (a, b) in [(0, 1), (1, 2), (2, 3), (0, 3), (1, 3)] {
            let unitary = sample_haar_unitary(9, &mut r).unwrap();
            state
                .apply_two_site_gate(&GateSample { edge: edge(a, b), unitary })
                .unwrap();
            assert!((state.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gate_dimension_mismatch_rejected() {
        let mut state = StateVector::zero_state(3, 2, DEFAULT_MEM_CAP_GIB).unwrap();
        let err = state
            .apply_two_site_gate(&GateSample { edge: edge(0, 1), unitary: Unitary::identity(9) })
            .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn product_state_purity_is_one() {
        let state = StateVector::zero_state(4, 2, DEFAULT_MEM_CAP_GIB).unwrap();
        for bits in [0b1u64, 0b11, 0b101, 0b111] {
            let p = state.reduced_purity(Subset::from_bits(bits)).unwrap();
            assert!((p - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn bell_state_purity_is_half() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![
            Complex64::new(s, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(s, 0.0),
        ];
        let state = StateVector::from_amplitudes(2, 2, amps).unwrap();
        let p = state.reduced_purity([0].into_iter().collect()).unwrap();
        assert!((p - 0.5).abs() < 1e-14);
        let p = state.reduced_purity([1].into_iter().collect()).unwrap();
        assert!((p - 0.5).abs() < 1e-14);
    }

    #[test]
    fn purity_respects_bounds_on_random_states() {
        let mut r = rng(5);
        let mut state = StateVector::zero_state(5, 2, DEFAULT_MEM_CAP_GIB).unwrap();
        for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)] {
            let unitary = sample_haar_unitary(4, &mut r).unwrap();
            state
                .apply_two_site_gate(&GateSample { edge: edge(a, b), unitary })
                .unwrap();
        }
        for bits in 1..(1u64 << 5) - 1 {
            let a = Subset::from_bits(bits);
            let min_side = a.len().min(5 - a.len()) as i32;
            let p = state.reduced_purity(a).unwrap();
            assert!(p <= 1.0 + 1e-12);
            assert!(p >= 2.0f64.powi(-min_side) - 1e-12);
        }
    }

    #[test]
    fn purity_rejects_trivial_partitions() {
        let state = StateVector::zero_state(3, 2, DEFAULT_MEM_CAP_GIB).unwrap();
        assert!(state.reduced_purity(Subset::EMPTY).is_err());
        assert!(state.reduced_purity(Subset::full(3)).is_err());
        assert!(state.reduced_purity(Subset::from_bits(0b1000)).is_err());
    }

    #[test]
    fn memory_cap_enforced() {
        let err = StateVector::zero_state(30, 2, 0.001).unwrap_err();
        match err {
            Error::MemoryCap { cap_gib, .. } => assert_eq!(cap_gib, 0.001),
            other => panic!("expected MemoryCap, got {other:?}"),
        }
        assert!(StateVector::zero_state(10, 2, DEFAULT_MEM_CAP_GIB).is_ok());
    }

    fn single_edge_spec(depth: u32) -> EnsembleSpec {
        let graph = QuditGraph::chain(2, 2).unwrap();
        EnsembleSpec {
            part: [0].into_iter().collect(),
            model: CircuitModel::SingleEdge(edge(0, 1)),
            depth,
            graph,
        }
    }

    #[test]
    fn zero_depth_run_is_pure() {
        let run = run_ensemble(&single_edge_spec(0), &McConfig::new(50, 11)).unwrap();
        assert_eq!(run.stats.mean, 1.0);
        assert_eq!(run.stats.variance, 0.0);
        assert_eq!(run.stats.mean_s2, 0.0);
    }

    #[test]
    fn runs_are_deterministic_in_seed() {
        let spec = single_edge_spec(1);
        let a = run_ensemble(&spec, &McConfig::new(300, 42)).unwrap();
        let b = run_ensemble(&spec, &McConfig::new(300, 42)).unwrap();
        assert_eq!(a.purities, b.purities);
        assert_eq!(a.stats, b.stats);
        let c = run_ensemble(&spec, &McConfig::new(300, 43)).unwrap();
        assert_ne!(a.purities, c.purities);
    }

    #[test]
    fn single_edge_mean_approaches_half_of_nd() {
        let run = run_ensemble(&single_edge_spec(1), &McConfig::new(2000, 7)).unwrap();
        let tol = 6.0 * run.stats.stderr;
        assert!(
            (run.stats.mean - 0.8).abs() < tol,
            "mean {} +- {}",
            run.stats.mean,
            run.stats.stderr
        );
    }

    #[test]
    fn chain_model_matches_exact_engine_at_small_depth() {
        let graph = QuditGraph::chain(4, 2).unwrap();
        let part = Subset::interval(0, 2);
        let ordering = crate::algebra::least_entangling_ordering(&graph, part).unwrap();
        let spec = EnsembleSpec {
            graph,
            part,
            model: CircuitModel::Chain(ChainOrdering::Fixed(ordering)),
            depth: 1,
        };
        let run = run_ensemble(&spec, &McConfig::new(2000, 13)).unwrap();
        assert!((run.stats.mean - 0.8).abs() < 6.0 * run.stats.stderr);
        // samples stay in the physical band
        for &p in &run.purities {
            assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&p));
        }
    }

    #[test]
    fn ensemble_validation_errors() {
        let graph = QuditGraph::chain(3, 2).unwrap();
        let bad_part = EnsembleSpec {
            part: Subset::EMPTY,
            model: CircuitModel::SingleEdge(edge(0, 1)),
            depth: 1,
            graph: graph.clone(),
        };
        assert!(run_ensemble(&bad_part, &McConfig::new(1, 0)).is_err());

        let bad_edge = EnsembleSpec {
            part: [0].into_iter().collect(),
            model: CircuitModel::SingleEdge(edge(0, 2)),
            depth: 1,
            graph,
        };
        assert!(run_ensemble(&bad_edge, &McConfig::new(1, 0)).is_err());
    }
}
