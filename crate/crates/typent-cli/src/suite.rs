//! The cross-validation suite behind `typent compare`: nine numbered
//! criteria pitting the exact engine, the Monte Carlo engine, and the
//! closed forms against each other at pinned tolerances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use typent::algebra::{
    interval_basis, iterate, least_entangling_ordering, spectral_analysis, transfer_matrix,
    PermPolynomial, SuperopKind, SuperopSpec,
};
use typent::closed_form::{self, ModelParams};
use typent::mc::{
    run_ensemble, sample_haar_unitary, ChainOrdering, CircuitModel, EnsembleRun, EnsembleSpec,
    GateSample, McConfig, StateVector, DEFAULT_MEM_CAP_GIB,
};
use typent::stats::PurityStats;
use typent::{QuditGraph, Subset};

use crate::CliError;

pub const EMBEDDED_PRESET: &str = include_str!("../../../configs/acceptance.toml");

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuitePreset {
    pub seed: u64,
    pub tolerances: SuiteTolerances,
    pub samples: SuiteSamples,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteTolerances {
    pub stderr_multiplier: f64,
    pub exact_rel: f64,
    pub variance_center: f64,
    pub variance_abs: f64,
    pub random_edge_approx_rel: f64,
    pub asymptotic_abs_slack: f64,
    pub jensen_eps: f64,
    pub spectral_eps: f64,
    pub unitarity_eps: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSamples {
    pub single_edge: u64,
    pub chain_cross: u64,
    pub random_edge: u64,
    pub asymptotic: u64,
    pub haar_check: u64,
    pub left_invariance: u64,
    pub variance_scan: u64,
}

impl SuitePreset {
    pub fn embedded() -> Self {
        toml::from_str(EMBEDDED_PRESET).expect("embedded preset parses")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("preset parse error: {e}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CriterionOutcome {
    fn new(id: u8, name: &'static str, pass: bool, detail: String) -> Self {
        CriterionOutcome { id, name, pass, detail }
    }

    pub fn status_line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("criterion {}: {tag} - {} ({})", self.id, self.name, self.detail)
    }
}

/// One Monte Carlo sweep point kept around for the entropy-bound criterion.
pub struct KRun {
    pub k: u32,
    pub run: EnsembleRun,
    pub algebra_purity: f64,
    pub d: u32,
    pub l_a: usize,
    pub q: f64,
}

/// The runs of criteria 3-5, shared with criterion 6.
pub struct SharedRuns {
    pub chain_cross: Vec<KRun>,
    pub random_edge: Vec<KRun>,
    pub asymptotic: KRun,
}

fn err_str(e: typent::Error) -> CliError {
    CliError::from_engine(e)
}

pub fn shared_runs(preset: &SuitePreset) -> Result<SharedRuns, CliError> {
    let chain_cross = chain_cross_runs(preset)?;
    let random_edge = random_edge_runs(preset)?;
    let asymptotic = asymptotic_run(preset)?;
    Ok(SharedRuns {
        chain_cross,
        random_edge,
        asymptotic,
    })
}

fn chain_cross_runs(preset: &SuitePreset) -> Result<Vec<KRun>, CliError> {
    let graph = QuditGraph::chain(6, 2).map_err(err_str)?;
    let part = Subset::interval(0, 3);
    let ordering = least_entangling_ordering(&graph, part).map_err(err_str)?;
    [1u32, 2, 3]
        .into_par_iter()
        .map(|k| {
            let spec = EnsembleSpec {
                graph: graph.clone(),
                part,
                model: CircuitModel::Chain(ChainOrdering::Fixed(ordering.clone())),
                depth: k,
            };
            let superop = spec.superop(preset.seed).map_err(err_str)?;
            let algebra_purity =
                iterate(&PermPolynomial::unit(part), &superop, k, 0.0).poly.purity();
            let run = run_ensemble(
                &spec,
                &McConfig::new(preset.samples.chain_cross, preset.seed.wrapping_add(30 + k as u64)),
            )
            .map_err(err_str)?;
            Ok(KRun {
                k,
                run,
                algebra_purity,
                d: 2,
                l_a: 3,
                q: 1.0 / 5.0,
            })
        })
        .collect()
}

fn random_edge_runs(preset: &SuitePreset) -> Result<Vec<KRun>, CliError> {
    let graph = QuditGraph::cycle(12, 2).map_err(err_str)?;
    let part = Subset::interval(0, 4);
    let dist = graph.uniform_edge_distribution().map_err(err_str)?;
    [1u32, 2, 3]
        .into_par_iter()
        .map(|k| {
            let spec = EnsembleSpec {
                graph: graph.clone(),
                part,
                model: CircuitModel::RandomEdge(dist.clone()),
                depth: k,
            };
            let superop = spec.superop(preset.seed).map_err(err_str)?;
            let algebra_purity =
                iterate(&PermPolynomial::unit(part), &superop, k, 0.0).poly.purity();
            let run = run_ensemble(
                &spec,
                &McConfig::new(preset.samples.random_edge, preset.seed.wrapping_add(40 + k as u64)),
            )
            .map_err(err_str)?;
            Ok(KRun {
                k,
                run,
                algebra_purity,
                d: 2,
                l_a: 4,
                q: 2.0 / 12.0,
            })
        })
        .collect()
}

fn asymptotic_run(preset: &SuitePreset) -> Result<KRun, CliError> {
    let graph = QuditGraph::chain(6, 2).map_err(err_str)?;
    let part = Subset::interval(0, 2);
    let spec = EnsembleSpec {
        graph,
        part,
        model: CircuitModel::Chain(ChainOrdering::RandomPerStep),
        depth: 100,
    };
    let run = run_ensemble(
        &spec,
        &McConfig::new(preset.samples.asymptotic, preset.seed.wrapping_add(50)),
    )
    .map_err(err_str)?;
    Ok(KRun {
        k: 100,
        run,
        algebra_purity: f64::NAN,
        d: 2,
        l_a: 2,
        q: 1.0 / 5.0,
    })
}

/// 1. Monte Carlo single-edge mean and variance against the Haar values.
pub fn criterion_1(preset: &SuitePreset) -> Result<CriterionOutcome, CliError> {
    let graph = QuditGraph::chain(2, 2).map_err(err_str)?;
    let spec = EnsembleSpec {
        part: [0].into_iter().collect(),
        model: CircuitModel::SingleEdge(graph.edges()[0]),
        depth: 1,
        graph,
    };
    let run = run_ensemble(
        &spec,
        &McConfig::new(preset.samples.single_edge, preset.seed.wrapping_add(10)),
    )
    .map_err(err_str)?;
    let mean_target = closed_form::single_edge_purity(2).map_err(err_str)?;
    let mean_diff = (run.stats.mean - mean_target).abs();
    let mean_allowed = preset.tolerances.stderr_multiplier * run.stats.stderr;
    let var_diff = (run.stats.variance - preset.tolerances.variance_center).abs();
    let pass = mean_diff <= mean_allowed && var_diff <= preset.tolerances.variance_abs;
    Ok(CriterionOutcome::new(
        1,
        "single-edge mean and variance",
        pass,
        format!(
            "mean {:.6} vs 0.8 (|diff| {:.2e} <= {:.2e}), variance {:.6} vs 0.017 +- {}",
            run.stats.mean, mean_diff, mean_allowed, run.stats.variance,
            preset.tolerances.variance_abs
        ),
    ))
}

/// 2. Exact engine reproduces the chain closed form for k < L_A.
pub fn criterion_2(preset: &SuitePreset) -> Result<CriterionOutcome, CliError> {
    let mut worst_rel: f64 = 0.0;
    let mut boundary_note = String::new();
    for d in [2u32, 3] {
        let graph = QuditGraph::chain(12, d).map_err(err_str)?;
        let part = Subset::interval(0, 6);
        let ordering = least_entangling_ordering(&graph, part).map_err(err_str)?;
        let superop =
            SuperopSpec::new(graph, SuperopKind::OrderedChain(ordering)).map_err(err_str)?;
        for k in 1..=5u32 {
            let engine = iterate(&PermPolynomial::unit(part), &superop, k, 0.0).poly.purity();
            let oracle = closed_form::chain_purity_exact(k, d).map_err(err_str)?;
            worst_rel = worst_rel.max((engine - oracle).abs() / oracle);
        }
        // informational: the formula's validity edge k = L_A
        let engine = iterate(&PermPolynomial::unit(part), &superop, 6, 0.0).poly.purity();
        let formula = closed_form::chain_purity_exact(6, d).map_err(err_str)?;
        boundary_note.push_str(&format!(
            " [k=L_A=6, d={d}: engine {engine:.6} vs formula {formula:.6}, rel dev {:.2e}]",
            (engine - formula).abs() / formula
        ));
    }
    let pass = worst_rel <= preset.tolerances.exact_rel;
    Ok(CriterionOutcome::new(
        2,
        "chain closed-form exactness",
        pass,
        format!(
            "worst relative deviation {worst_rel:.2e} <= {:.0e} over d in {{2,3}}, k=1..5;{boundary_note}",
            preset.tolerances.exact_rel
        ),
    ))
}

/// 3. Monte Carlo agrees with the exact engine on the chain model.
pub fn criterion_3(preset: &SuitePreset, shared: &SharedRuns) -> CriterionOutcome {
    let mut pass = true;
    let mut details = Vec::new();
    for kr in &shared.chain_cross {
        let diff = (kr.run.stats.mean - kr.algebra_purity).abs();
        let allowed = preset.tolerances.stderr_multiplier * kr.run.stats.stderr;
        pass &= diff <= allowed;
        details.push(format!(
            "k={}: mc {:.5} vs exact {:.5} (|diff| {:.2e} <= {:.2e})",
            kr.k, kr.run.stats.mean, kr.algebra_purity, diff, allowed
        ));
    }
    CriterionOutcome::new(3, "cross-engine agreement on the chain", pass, details.join("; "))
}

/// 4. Random-edge model: exact k=1 value, approximation quality, Monte
///    Carlo agreement.
pub fn criterion_4(preset: &SuitePreset, shared: &SharedRuns) -> Result<CriterionOutcome, CliError> {
    let mut pass = true;
    let mut details = Vec::new();
    let q = 2.0 / 12.0;

    for kr in &shared.random_edge {
        let params = ModelParams::new(2, kr.k, q).map_err(err_str)?;
        let approx = closed_form::random_edge_purity(params).map_err(err_str)?;
        if kr.k == 1 {
            let rel = (kr.algebra_purity - approx).abs() / approx;
            pass &= rel <= preset.tolerances.exact_rel;
            details.push(format!("k=1 exact: rel dev {rel:.2e}"));
        }
        let rel = (kr.algebra_purity - approx).abs() / approx;
        pass &= rel <= preset.tolerances.random_edge_approx_rel;
        let mc_diff = (kr.run.stats.mean - kr.algebra_purity).abs();
        let allowed = preset.tolerances.stderr_multiplier * kr.run.stats.stderr;
        pass &= mc_diff <= allowed;
        details.push(format!(
            "k={}: exact {:.5}, approx {:.5} (rel {rel:.2e}), mc {:.5} (|diff| {mc_diff:.2e} <= {allowed:.2e})",
            kr.k, kr.algebra_purity, approx, kr.run.stats.mean
        ));
    }
    Ok(CriterionOutcome::new(
        4,
        "random-edge exact vs approximation vs MC",
        pass,
        details.join("; "),
    ))
}

/// 5. Conjectured infinite-depth purity reached by a deep random-ordering
///    circuit.
pub fn criterion_5(preset: &SuitePreset, shared: &SharedRuns) -> Result<CriterionOutcome, CliError> {
    let target = closed_form::chain_asymptotic_purity(2, 6, 2).map_err(err_str)?;
    let kr = &shared.asymptotic;
    let diff = (kr.run.stats.mean - target).abs();
    let allowed = preset.tolerances.stderr_multiplier * kr.run.stats.stderr
        + preset.tolerances.asymptotic_abs_slack;
    Ok(CriterionOutcome::new(
        5,
        "asymptotic maximal mixing (conjecture check)",
        diff <= allowed,
        format!(
            "mc {:.6} vs asymptote {target:.6} (|diff| {diff:.2e} <= {allowed:.2e}) at k=100",
            kr.run.stats.mean
        ),
    ))
}

/// 6. Entropy bounds on every run of criteria 3-5: Jensen ordering, the
///    chain volume-law bound in its k <= L_A regime, and the random-edge
///    area-law bound.
pub fn criterion_6(preset: &SuitePreset, shared: &SharedRuns) -> Result<CriterionOutcome, CliError> {
    let mut pass = true;
    let mut details = Vec::new();
    let mult = preset.tolerances.stderr_multiplier;

    let all_runs = shared
        .chain_cross
        .iter()
        .chain(shared.random_edge.iter())
        .chain(std::iter::once(&shared.asymptotic));
    for kr in all_runs {
        let jensen = kr.run.stats.mean_s2 >= kr.run.stats.s2_of_mean - preset.tolerances.jensen_eps;
        pass &= jensen;
        if !jensen {
            details.push(format!("jensen violated at k={}", kr.k));
        }
    }

    for kr in &shared.chain_cross {
        let bound = closed_form::chain_entropy_bound(kr.k, kr.d).map_err(err_str)?;
        if bound > 0.0 && (kr.k as usize) <= kr.l_a {
            let ok = kr.run.stats.mean_s2 >= bound - mult * kr.run.stats.s2_stderr;
            pass &= ok;
            details.push(format!(
                "chain k={}: S2 {:.4} >= bound {:.4} {}",
                kr.k, kr.run.stats.mean_s2, bound, if ok { "ok" } else { "VIOLATED" }
            ));
        }
    }
    // the k=100 run sits far beyond the bound's k <= L_A regime; Jensen
    // already covered it above
    for kr in &shared.random_edge {
        let params = ModelParams::new(kr.d, kr.k, kr.q).map_err(err_str)?;
        let bound = closed_form::random_edge_entropy_bound(params).map_err(err_str)?;
        if bound > 0.0 {
            let ok = kr.run.stats.mean_s2 >= bound - mult * kr.run.stats.s2_stderr;
            pass &= ok;
            details.push(format!(
                "random-edge k={}: S2 {:.4} >= k q e_p {:.4} {}",
                kr.k, kr.run.stats.mean_s2, bound, if ok { "ok" } else { "VIOLATED" }
            ));
        }
    }
    if details.is_empty() {
        details.push("no applicable bounds".into());
    }
    details.insert(0, "jensen ok on all 7 runs".into());
    Ok(CriterionOutcome::new(6, "entropy bounds", pass, details.join("; ")))
}

/// 7. Spectral structure of the transfer matrices.
pub fn criterion_7(preset: &SuitePreset) -> Result<CriterionOutcome, CliError> {
    let eps = preset.tolerances.spectral_eps;
    let mut pass = true;
    let mut details = Vec::new();

    for l in 2..=10usize {
        let graph = QuditGraph::chain(l, 2).map_err(err_str)?;
        let dist = graph.uniform_edge_distribution().map_err(err_str)?;
        let superop = SuperopSpec::new(graph, SuperopKind::Mixture(dist)).map_err(err_str)?;
        let basis = interval_basis(l);
        let matrix = transfer_matrix(&superop, &basis).map_err(err_str)?;
        let spectral = spectral_analysis(&matrix).map_err(err_str)?;
        let ok = (spectral.leading - 1.0).abs() <= eps
            && spectral.moduli.iter().all(|&m| m <= 1.0 + eps);
        pass &= ok;
        if l == 10 {
            details.push(format!(
                "chain L=10 interval basis ({}): leading {:.12}, gap {:.6}",
                spectral.dim, spectral.leading, spectral.gap
            ));
        }
    }

    // single-edge 4x4: spectrum {1,1,0,0} from the explicit projector
    let graph = QuditGraph::chain(2, 2).map_err(err_str)?;
    let edge = graph.edges()[0];
    let superop = SuperopSpec::new(graph, SuperopKind::SingleEdge(edge)).map_err(err_str)?;
    let basis = vec![
        Subset::EMPTY,
        [0].into_iter().collect::<Subset>(),
        [1].into_iter().collect::<Subset>(),
        Subset::full(2),
    ];
    let matrix = transfer_matrix(&superop, &basis).map_err(err_str)?;
    let idempotent = &matrix * &matrix == matrix;
    pass &= idempotent;
    let spectral = spectral_analysis(&matrix).map_err(err_str)?;
    let expect = [1.0, 1.0, 0.0, 0.0];
    let spectrum_ok = spectral
        .moduli
        .iter()
        .zip(expect)
        .all(|(&m, e)| (m - e).abs() <= eps);
    pass &= spectrum_ok;
    details.push(format!(
        "single-edge 4x4: idempotent {idempotent}, moduli {:?}",
        spectral.moduli
    ));

    Ok(CriterionOutcome::new(7, "spectral structure", pass, details.join("; ")))
}

/// 8. Haar sampler soundness: unitarity and left-invariance.
pub fn criterion_8(preset: &SuitePreset) -> Result<CriterionOutcome, CliError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha_rng(preset.seed.wrapping_add(80));
    let mut worst = 0.0f64;
    for _ in 0..preset.samples.haar_check {
        let u = sample_haar_unitary(4, &mut rng).map_err(err_str)?;
        worst = worst.max(u.unitarity_error());
    }
    let unitarity_ok = worst <= preset.tolerances.unitarity_eps;

    // left-invariance: premultiplying every sample by a fixed W must leave
    // the single-edge mean purity at the Haar value
    let fixed_w = sample_haar_unitary(4, &mut rand_chacha_rng(preset.seed.wrapping_add(81)))
        .map_err(err_str)?;
    let seed = preset.seed.wrapping_add(82);
    let n_samples = preset.samples.left_invariance;
    let purities: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<f64, CliError> {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let u = sample_haar_unitary(4, &mut rng).map_err(err_str)?;
            let premultiplied = fixed_w.matmul(&u);
            let mut state = StateVector::zero_state(2, 2, DEFAULT_MEM_CAP_GIB).map_err(err_str)?;
            state
                .apply_two_site_gate(&GateSample {
                    edge: typent::Edge::new(0, 1).map_err(err_str)?,
                    unitary: premultiplied,
                })
                .map_err(err_str)?;
            state.reduced_purity([0].into_iter().collect()).map_err(err_str)
        })
        .collect::<Result<_, CliError>>()?;
    let stats = PurityStats::from_purities(&purities).map_err(err_str)?;
    let diff = (stats.mean - 0.8).abs();
    let allowed = preset.tolerances.stderr_multiplier * stats.stderr;
    let invariance_ok = diff <= allowed;

    Ok(CriterionOutcome::new(
        8,
        "Haar sampler soundness",
        unitarity_ok && invariance_ok,
        format!(
            "worst unitarity error {worst:.2e} <= {:.0e} over {} samples; W-premultiplied mean {:.5} vs 0.8 (|diff| {diff:.2e} <= {allowed:.2e})",
            preset.tolerances.unitarity_eps, preset.samples.haar_check, stats.mean
        ),
    ))
}

fn rand_chacha_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// 9. Concentration substitute: the relative fluctuation of S2 must not
///    grow when the boundary doubles (chain |dA| = 1 vs cycle |dA| = 2).
///    Raw purity variances are reported alongside; the paper's own scaling
///    (variance of S2 growing like |dA|) says they may grow.
pub fn criterion_9(preset: &SuitePreset) -> Result<CriterionOutcome, CliError> {
    let run_for = |graph: QuditGraph, part: Subset, seed: u64| -> Result<EnsembleRun, CliError> {
        let dist = graph.uniform_edge_distribution().map_err(err_str)?;
        let spec = EnsembleSpec {
            graph,
            part,
            model: CircuitModel::RandomEdge(dist),
            depth: 2,
        };
        run_ensemble(&spec, &McConfig::new(preset.samples.variance_scan, seed)).map_err(err_str)
    };

    let chain = run_for(
        QuditGraph::chain(12, 2).map_err(err_str)?,
        Subset::interval(0, 6),
        preset.seed.wrapping_add(90),
    )?;
    let cycle = run_for(
        QuditGraph::cycle(12, 2).map_err(err_str)?,
        Subset::interval(0, 6),
        preset.seed.wrapping_add(91),
    )?;

    let rel_fluct = |run: &EnsembleRun| {
        let n = run.stats.count as f64;
        let s2_var = run.stats.s2_stderr * run.stats.s2_stderr * n;
        s2_var.sqrt() / run.stats.mean_s2
    };
    let rel_chain = rel_fluct(&chain);
    let rel_cycle = rel_fluct(&cycle);
    Ok(CriterionOutcome::new(
        9,
        "concentration with growing boundary",
        rel_cycle <= rel_chain,
        format!(
            "relative S2 fluctuation {rel_cycle:.3} at |dA|=2 <= {rel_chain:.3} at |dA|=1 \
             (raw purity variance {:.5} -> {:.5})",
            chain.stats.variance, cycle.stats.variance
        ),
    ))
}

/// Run all nine criteria in order, sharing the heavy Monte Carlo runs.
pub fn run_all(preset: &SuitePreset) -> Result<Vec<CriterionOutcome>, CliError> {
    let shared = shared_runs(preset)?;
    Ok(vec![
        criterion_1(preset)?,
        criterion_2(preset)?,
        criterion_3(preset, &shared),
        criterion_4(preset, &shared)?,
        criterion_5(preset, &shared)?,
        criterion_6(preset, &shared)?,
        criterion_7(preset)?,
        criterion_8(preset)?,
        criterion_9(preset)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_preset_parses_with_expected_values() {
        let preset = SuitePreset::embedded();
        assert_eq!(preset.tolerances.stderr_multiplier, 4.0);
        assert_eq!(preset.tolerances.exact_rel, 1e-12);
        assert_eq!(preset.tolerances.variance_abs, 0.003);
        assert_eq!(preset.samples.single_edge, 100_000);
        assert_eq!(preset.samples.asymptotic, 2_000);
    }
}
