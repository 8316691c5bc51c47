//! Property tests for the structural invariants shared by both engines.

use proptest::prelude::*;

use typent::algebra::{
    apply_edge_projector, iterate, least_entangling_ordering, PermPolynomial, SuperopKind,
    SuperopSpec,
};
use typent::closed_form;
use typent::mc::{run_ensemble, CircuitModel, ChainOrdering, EnsembleSpec, McConfig};
use typent::stats::PurityStats;
use typent::{Edge, QuditGraph, Subset};

fn arb_graph() -> impl Strategy<Value = QuditGraph> {
    (2usize..10, 2u32..4).prop_flat_map(|(n, d)| {
        let max_edges = n * (n - 1) / 2;
        proptest::collection::btree_set((0..n, 0..n), 1..=max_edges.min(12)).prop_filter_map(
            "needs at least one valid edge",
            move |pairs| {
                let edges: Vec<Edge> = pairs
                    .into_iter()
                    .filter(|(a, b)| a != b)
                    .map(|(a, b)| Edge::new(a, b).unwrap())
                    .collect::<std::collections::BTreeSet<_>>()
                    .into_iter()
                    .collect();
                if edges.is_empty() {
                    None
                } else {
                    Some(QuditGraph::new(n, d, edges).unwrap())
                }
            },
        )
    })
}

proptest! {
    #[test]
    fn boundary_edges_symmetric_in_complement(g in arb_graph(), bits in any::<u64>()) {
        let n = g.vertex_count();
        let a = Subset::from_bits(bits & Subset::full(n).bits());
        prop_assert_eq!(g.boundary_edges(a), g.boundary_edges(a.complement(n)));
    }

    #[test]
    fn boundary_empty_iff_trivial_cut_on_connected_graph(l in 3usize..12, bits in any::<u64>()) {
        let g = QuditGraph::cycle(l, 2).unwrap();
        let a = Subset::from_bits(bits & Subset::full(l).bits());
        let boundary = g.boundary_edges(a);
        let trivial = a.is_empty() || a == g.full_set();
        prop_assert_eq!(boundary.is_empty(), trivial);
    }

    #[test]
    fn edge_distribution_normalized(g in arb_graph(), raw in proptest::collection::vec(0.01f64..10.0, 1..13)) {
        let m = g.edges().len();
        let mut weights: Vec<f64> = raw.into_iter().cycle().take(m).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let dist = typent::EdgeDistribution::new(&g, weights).unwrap();
        let sum: f64 = dist.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn projector_mass_never_increases(
        g in arb_graph(),
        bits in any::<u64>(),
        edge_pick in any::<prop::sample::Index>(),
    ) {
        let n = g.vertex_count();
        let a = Subset::from_bits(bits & Subset::full(n).bits());
        let e = g.edges()[edge_pick.index(g.edges().len())];
        let p = PermPolynomial::unit(a);
        let out = apply_edge_projector(&p, e, g.local_dim());
        prop_assert!(out.purity() <= p.purity() + 1e-15);
        // strict decrease exactly when the edge straddles the subset
        if e.straddles(a) {
            prop_assert!(out.purity() < p.purity());
        } else {
            prop_assert!((out.purity() - p.purity()).abs() <= 1e-15);
        }
        // coefficients stay nonnegative
        for (_, c) in out.terms() {
            prop_assert!(c >= 0.0);
        }
    }

    #[test]
    fn chain_evolution_stays_on_intervals(
        l in 3usize..10,
        start_len in (0usize..9, 1usize..9),
        picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..20),
    ) {
        let g = QuditGraph::chain(l, 2).unwrap();
        let (s, len) = start_len;
        let s = s.min(l - 1);
        let len = len.min(l - s);
        let mut poly = PermPolynomial::unit(Subset::interval(s, s + len));
        for pick in picks {
            let e = g.edges()[pick.index(g.edges().len())];
            poly = apply_edge_projector(&poly, e, 2);
        }
        for (subset, _) in poly.terms() {
            prop_assert!(
                subset.is_empty() || subset.as_interval().is_some(),
                "non-interval subset {} produced on a chain",
                subset
            );
        }
    }

    #[test]
    fn chain_engine_reproduces_binomial_sum(d in 2u32..4, l_a in 2usize..6, k in 1u32..6) {
        // closed-form module is the independent oracle here
        prop_assume!((k as usize) < l_a);
        let l = 2 * l_a;
        let g = QuditGraph::chain(l, d).unwrap();
        let a = Subset::interval(0, l_a);
        let ordering = least_entangling_ordering(&g, a).unwrap();
        let spec = SuperopSpec::new(g, SuperopKind::OrderedChain(ordering)).unwrap();
        let engine = iterate(&PermPolynomial::unit(a), &spec, k, 0.0).poly.purity();
        let oracle = closed_form::chain_purity_exact(k, d).unwrap();
        prop_assert!(
            (engine - oracle).abs() <= 1e-12 * oracle,
            "engine {} vs oracle {} at d={}, L_A={}, k={}",
            engine, oracle, d, l_a, k
        );
    }

    #[test]
    fn superoperator_is_linear(alpha in 0.01f64..2.0, beta in 0.01f64..2.0) {
        let g = QuditGraph::chain(6, 2).unwrap();
        let dist = g.uniform_edge_distribution().unwrap();
        let spec = SuperopSpec::new(g, SuperopKind::Mixture(dist)).unwrap();
        let mut p = PermPolynomial::new();
        p.add_term(Subset::interval(0, 2), alpha);
        let mut q = PermPolynomial::new();
        q.add_term(Subset::interval(1, 5), beta);
        let lhs = spec.apply_step(&p.add_scaled(&q, 1.0), 0);
        let rhs = spec.apply_step(&p, 0).add_scaled(&spec.apply_step(&q, 0), 1.0);
        for (s, c) in lhs.terms() {
            prop_assert!((c - rhs.coefficient(s)).abs() <= 1e-12);
        }
    }

    #[test]
    fn jensen_holds_on_any_sample_set(samples in proptest::collection::vec(0.01f64..=1.0, 1..60)) {
        let stats = PurityStats::from_purities(&samples).unwrap();
        prop_assert!(stats.mean_s2 >= stats.s2_of_mean - 1e-12);
        prop_assert!(stats.variance >= 0.0);
    }
}

// Monte Carlo properties are sampled sparsely; each case runs a small run.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mc_purities_stay_in_physical_band(seed in any::<u64>(), k in 0u32..4) {
        let g = QuditGraph::cycle(5, 2).unwrap();
        let dist = g.uniform_edge_distribution().unwrap();
        let spec = EnsembleSpec {
            graph: g,
            part: Subset::interval(0, 2),
            model: CircuitModel::RandomEdge(dist),
            depth: k,
        };
        let run = run_ensemble(&spec, &McConfig::new(64, seed)).unwrap();
        for &p in &run.purities {
            prop_assert!(p <= 1.0 + 1e-12);
            prop_assert!(p >= 0.25 - 1e-12); // d^-min(|A|, |B|)
        }
        prop_assert!(run.stats.mean_s2 >= run.stats.s2_of_mean - 1e-12);
    }

    #[test]
    fn mc_deterministic_given_seed(seed in any::<u64>()) {
        let g = QuditGraph::chain(4, 2).unwrap();
        let spec = EnsembleSpec {
            part: Subset::interval(0, 2),
            model: CircuitModel::Chain(ChainOrdering::RandomPerStep),
            depth: 2,
            graph: g,
        };
        let a = run_ensemble(&spec, &McConfig::new(48, seed)).unwrap();
        let b = run_ensemble(&spec, &McConfig::new(48, seed)).unwrap();
        prop_assert_eq!(a.purities, b.purities);
    }
}
