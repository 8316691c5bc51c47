//! Experiment configuration: a TOML document whose values can be overridden
//! by CLI flags, resolved into one effective config that is embedded in the
//! JSON report.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use typent::{Edge, QuditGraph, Subset};

use crate::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SingleEdge,
    RandomEdge,
    Chain,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::SingleEdge => "single-edge",
            ModelKind::RandomEdge => "random-edge",
            ModelKind::Chain => "chain",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Chain,
    Cycle,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub kind: GraphKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    pub d: u32,
    /// Explicit edge list, for `kind = "explicit"` (requires `n`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
}

impl GraphSpec {
    pub fn build(&self) -> Result<QuditGraph, CliError> {
        let graph = match self.kind {
            GraphKind::Chain => {
                let l = self.l.ok_or_else(|| config_err("graph.l required for chain"))?;
                QuditGraph::chain(l, self.d)
            }
            GraphKind::Cycle => {
                let l = self.l.ok_or_else(|| config_err("graph.l required for cycle"))?;
                QuditGraph::cycle(l, self.d)
            }
            GraphKind::Explicit => {
                let n = self.n.ok_or_else(|| config_err("graph.n required for explicit graphs"))?;
                let pairs = self
                    .edges
                    .as_ref()
                    .ok_or_else(|| config_err("graph.edges required for explicit graphs"))?;
                let edges = pairs
                    .iter()
                    .map(|&(a, b)| Edge::new(a, b))
                    .collect::<typent::Result<Vec<_>>>()
                    .map_err(CliError::from_config)?;
                QuditGraph::new(n, self.d, edges)
            }
        };
        graph.map_err(CliError::from_config)
    }
}

/// Bipartition: an interval `start..start+len`, an explicit vertex list, or
/// (for area-law scans) a sweep of prefix-arc lengths.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lens: Option<Vec<usize>>,
    /// Several explicit partitions, one sweep point each; lets a scan vary
    /// |dA| (e.g. one arc vs two arcs of a cycle).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_lists: Option<Vec<Vec<usize>>>,
}

impl PartitionSpec {
    pub fn interval(start: usize, len: usize) -> Self {
        PartitionSpec {
            start: Some(start),
            len: Some(len),
            ..Default::default()
        }
    }

    /// Resolve into one subset per sweep point.
    pub fn resolve(&self, graph: &QuditGraph) -> Result<Vec<Subset>, CliError> {
        let n = graph.vertex_count();
        let check = |s: Subset| -> Result<Subset, CliError> {
            if s.is_empty() || s == graph.full_set() {
                return Err(config_err("partition must be a proper nonempty subset"));
            }
            if !s.minus(graph.full_set()).is_empty() {
                return Err(config_err(format!("partition {s} outside the {n}-vertex graph")));
            }
            Ok(s)
        };
        if let Some(lists) = &self.vertex_lists {
            if self.vertices.is_some() || self.len.is_some() || self.lens.is_some() {
                return Err(config_err("partition.vertex_lists excludes other partition fields"));
            }
            return lists
                .iter()
                .map(|vs| {
                    if vs.iter().any(|&v| v >= n) {
                        return Err(config_err("partition vertex out of range"));
                    }
                    check(vs.iter().copied().collect())
                })
                .collect();
        }
        if let Some(lens) = &self.lens {
            if self.vertices.is_some() || self.len.is_some() {
                return Err(config_err("partition.lens excludes len/vertices"));
            }
            let start = self.start.unwrap_or(0);
            return lens
                .iter()
                .map(|&len| check(Subset::interval(start.min(n), (start + len).min(n))))
                .collect();
        }
        if let Some(vertices) = &self.vertices {
            if self.start.is_some() || self.len.is_some() {
                return Err(config_err("partition.vertices excludes start/len"));
            }
            if vertices.iter().any(|&v| v >= n) {
                return Err(config_err("partition vertex out of range"));
            }
            return Ok(vec![check(vertices.iter().copied().collect())?]);
        }
        match (self.start, self.len) {
            (start, Some(len)) => {
                let start = start.unwrap_or(0);
                if start + len > n {
                    return Err(config_err(format!(
                        "partition {start}..{} exceeds {n} vertices",
                        start + len
                    )));
                }
                Ok(vec![check(Subset::interval(start, start + len))?])
            }
            _ => Err(config_err("partition needs start/len, vertices, or lens")),
        }
    }
}

/// Depth: a single k or an explicit sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DepthSpec {
    Single(u32),
    List(Vec<u32>),
}

impl DepthSpec {
    pub fn values(&self) -> Result<Vec<u32>, CliError> {
        match self {
            DepthSpec::Single(k) => Ok(vec![*k]),
            DepthSpec::List(ks) => {
                if ks.is_empty() {
                    return Err(config_err("empty k sweep"));
                }
                Ok(ks.clone())
            }
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingPolicy {
    #[default]
    LeastEntangling,
    Reversed,
    RandomPerStep,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Algebra,
    Montecarlo,
    ClosedForm,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Algebra => "algebra",
            EngineKind::Montecarlo => "montecarlo",
            EngineKind::ClosedForm => "closed-form",
        }
    }
}

/// Tolerance rules are data; checks not covered by a rule are reported but
/// not enforced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Multiplier on the standard error for Monte Carlo comparisons.
    pub stderr_multiplier: f64,
    /// Absolute tolerance for exact-vs-closed-form comparisons.
    pub absolute_exact: f64,
    /// Optional relative rule applied where the closed form is approximate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_rel: Option<f64>,
    /// Optional absolute slack for the saturation-plateau check of k sweeps
    /// on chains (added to the standard-error band).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau_abs: Option<f64>,
    /// Slack for the Jensen inequality check.
    pub jensen_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            stderr_multiplier: 4.0,
            absolute_exact: 1e-9,
            closed_form_rel: None,
            plateau_abs: None,
            jensen_eps: 1e-12,
        }
    }
}

/// The effective experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub graph: GraphSpec,
    pub partition: PartitionSpec,
    pub k: DepthSpec,
    #[serde(default)]
    pub ordering: OrderingPolicy,
    pub engines: Vec<EngineKind>,
    pub samples: u64,
    pub seed: u64,
    pub prune_eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mem_cap_gib: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub dump_poly: bool,
    /// Stream per-sample purities to `samples_*.csv` files.
    #[serde(default)]
    pub dump_samples: bool,
}

/// A partially-specified config as read from a TOML file; any field may be
/// omitted and filled from subcommand defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelKind>,
    pub graph: Option<GraphSpec>,
    pub partition: Option<PartitionSpec>,
    pub k: Option<DepthSpec>,
    pub ordering: Option<OrderingPolicy>,
    pub engines: Option<Vec<EngineKind>>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub prune_eps: Option<f64>,
    pub mem_cap_gib: Option<f64>,
    pub tolerances: Option<Tolerances>,
    pub dump_poly: Option<bool>,
    pub dump_samples: Option<bool>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_err(format!("config parse error: {e}")))
    }

    pub fn load(path: &PathBuf) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Flag-level overrides collected from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub d: Option<u32>,
    pub l: Option<usize>,
    pub k: Option<DepthSpec>,
    pub ordering: Option<OrderingPolicy>,
    pub engines: Option<Vec<EngineKind>>,
    pub prune_eps: Option<f64>,
    pub mem_cap_gib: Option<f64>,
    pub dump_poly: bool,
    pub dump_samples: bool,
    pub partition: Option<PartitionSpec>,
}

pub const SEED_ENV: &str = "TYPENT_SEED";

fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| config_err(format!("{SEED_ENV}={text} is not a valid seed"))),
        Err(_) => Ok(None),
    }
}

/// Merge precedence: CLI flag > config file > TYPENT_SEED (seed only)
/// > subcommand default.
pub fn resolve(
    defaults: ExperimentConfig,
    file: Option<FileConfig>,
    flags: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let file = file.unwrap_or_default();
    let mut cfg = defaults;

    if let Some(model) = file.model {
        cfg.model = model;
    }
    if let Some(graph) = file.graph {
        cfg.graph = graph;
    }
    if let Some(partition) = file.partition {
        cfg.partition = partition;
    }
    if let Some(k) = file.k {
        cfg.k = k;
    }
    if let Some(ordering) = file.ordering {
        cfg.ordering = ordering;
    }
    if let Some(engines) = file.engines {
        cfg.engines = engines;
    }
    if let Some(samples) = file.samples {
        cfg.samples = samples;
    }
    if let Some(prune_eps) = file.prune_eps {
        cfg.prune_eps = prune_eps;
    }
    if file.mem_cap_gib.is_some() {
        cfg.mem_cap_gib = file.mem_cap_gib;
    }
    if let Some(tol) = file.tolerances {
        cfg.tolerances = tol;
    }
    if let Some(dump) = file.dump_poly {
        cfg.dump_poly = dump;
    }
    if let Some(dump) = file.dump_samples {
        cfg.dump_samples = dump;
    }
    cfg.seed = match (flags.seed, file.seed, seed_from_env()?) {
        (Some(s), _, _) => s,
        (None, Some(s), _) => s,
        (None, None, Some(s)) => s,
        (None, None, None) => cfg.seed,
    };

    if let Some(samples) = flags.samples {
        cfg.samples = samples;
    }
    if let Some(d) = flags.d {
        cfg.graph.d = d;
    }
    if let Some(l) = flags.l {
        cfg.graph.l = Some(l);
    }
    if let Some(k) = flags.k.clone() {
        cfg.k = k;
    }
    if let Some(ordering) = flags.ordering {
        cfg.ordering = ordering;
    }
    if let Some(engines) = flags.engines.clone() {
        cfg.engines = engines;
    }
    if let Some(prune_eps) = flags.prune_eps {
        cfg.prune_eps = prune_eps;
    }
    if flags.mem_cap_gib.is_some() {
        cfg.mem_cap_gib = flags.mem_cap_gib;
    }
    if flags.dump_poly {
        cfg.dump_poly = true;
    }
    if flags.dump_samples {
        cfg.dump_samples = true;
    }
    if let Some(partition) = flags.partition.clone() {
        cfg.partition = partition;
    }

    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.engines.is_empty() {
        return Err(config_err("at least one engine must be selected"));
    }
    if cfg.engines.contains(&EngineKind::Montecarlo) && cfg.samples == 0 {
        return Err(config_err("samples must be >= 1 when the montecarlo engine runs"));
    }
    if cfg.prune_eps < 0.0 {
        return Err(config_err("prune_eps must be nonnegative"));
    }
    if cfg.model != ModelKind::Chain && cfg.ordering != OrderingPolicy::default() {
        // orderings only make sense for the chain model
        return Err(config_err("ordering policy is only valid for the chain model"));
    }
    Ok(())
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// FNV-1a hash of the canonical serialized config, for report provenance.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = toml::to_string(cfg).unwrap_or_default();
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    format!("{hash:016x}")
}
