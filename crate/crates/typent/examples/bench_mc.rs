//! Quick wall-clock probe of the acceptance-scale Monte Carlo runs.

use std::time::Instant;

use typent::mc::{run_ensemble, ChainOrdering, CircuitModel, EnsembleSpec, McConfig};
use typent::algebra::least_entangling_ordering;
use typent::{Edge, QuditGraph, Subset};

fn main() {
    // criterion 1 scale: single edge, 1e5 samples
    let g = QuditGraph::chain(2, 2).unwrap();
    let spec = EnsembleSpec {
        part: [0].into_iter().collect(),
        model: CircuitModel::SingleEdge(Edge::new(0, 1).unwrap()),
        depth: 1,
        graph: g,
    };
    let t = Instant::now();
    let run = run_ensemble(&spec, &McConfig::new(100_000, 1)).unwrap();
    println!(
        "single-edge 1e5: {:?}  mean={:.6} var={:.6} stderr={:.2e}",
        t.elapsed(),
        run.stats.mean,
        run.stats.variance,
        run.stats.stderr
    );

    // criterion 5 scale: chain L=6, random-per-step, k=100, 2000 samples
    let g = QuditGraph::chain(6, 2).unwrap();
    let spec = EnsembleSpec {
        part: Subset::interval(0, 2),
        model: CircuitModel::Chain(ChainOrdering::RandomPerStep),
        depth: 100,
        graph: g,
    };
    let t = Instant::now();
    let run = run_ensemble(&spec, &McConfig::new(2000, 2)).unwrap();
    println!(
        "chain L=6 k=100 2e3: {:?}  mean={:.6} stderr={:.2e} (asymptote 0.307692)",
        t.elapsed(),
        run.stats.mean,
        run.stats.stderr
    );

    // criterion 4 scale: cycle L=12, 1e4 samples, k=3
    let g = QuditGraph::cycle(12, 2).unwrap();
    let dist = g.uniform_edge_distribution().unwrap();
    let spec = EnsembleSpec {
        part: Subset::interval(0, 4),
        model: CircuitModel::RandomEdge(dist),
        depth: 3,
        graph: g,
    };
    let t = Instant::now();
    let run = run_ensemble(&spec, &McConfig::new(10_000, 3)).unwrap();
    println!(
        "cycle L=12 k=3 1e4: {:?}  mean={:.6} stderr={:.2e}",
        t.elapsed(),
        run.stats.mean,
        run.stats.stderr
    );

    // criterion 3 scale: chain L=6 least-entangling k=2, 1e4 samples
    let g = QuditGraph::chain(6, 2).unwrap();
    let part = Subset::interval(0, 3);
    let ordering = least_entangling_ordering(&g, part).unwrap();
    let spec = EnsembleSpec {
        part,
        model: CircuitModel::Chain(ChainOrdering::Fixed(ordering)),
        depth: 2,
        graph: g,
    };
    let t = Instant::now();
    let run = run_ensemble(&spec, &McConfig::new(10_000, 4)).unwrap();
    println!(
        "chain L=6 least k=2 1e4: {:?}  mean={:.6} stderr={:.2e} (exact 0.576)",
        t.elapsed(),
        run.stats.mean,
        run.stats.stderr
    );
}
