use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use typent_cli::config::{
    DepthSpec, EngineKind, ExperimentConfig, FileConfig, GraphKind, GraphSpec, ModelKind,
    OrderingPolicy, Overrides, PartitionSpec, Tolerances,
};
use typent_cli::report::fmt_f64;
use typent_cli::runner::{run_experiment, run_spectrum, RunOutput};
use typent_cli::suite::{self, SuitePreset};
use typent_cli::CliError;

#[derive(Parser)]
#[command(
    name = "typent",
    version,
    about = "Ensemble-averaged purity of random local quantum circuits: exact subset-permutation algebra, Monte Carlo sampling, and closed-form cross checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One Haar gate on a single edge per tick.
    SingleEdge(RunArgs),
    /// One Haar gate on a randomly drawn edge per tick.
    RandomEdge(RandomEdgeArgs),
    /// A Haar gate on every chain edge per tick, in a chosen order.
    Chain(ChainArgs),
    /// Dump transfer-matrix eigenvalue moduli for the configured model.
    Spectrum(SpectrumArgs),
    /// Run the preset cross-validation suite and report per-criterion results.
    Compare(CompareArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum S2Base {
    /// Natural log (nats).
    E,
    /// Base 2 (bits).
    Two,
    /// Base d (dits).
    D,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; CLI flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (fallback: TYPENT_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    samples: Option<u64>,
    /// Directory for results.csv and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the evolved permutation polynomial per sweep point.
    #[arg(long)]
    dump_poly: bool,
    /// Write per-sample purities per sweep point as sample_index,purity CSV.
    #[arg(long)]
    dump_samples: bool,
    /// Override the state-vector memory cap (GiB).
    #[arg(long)]
    mem_cap_gib: Option<f64>,
    /// Local dimension.
    #[arg(long)]
    d: Option<u32>,
    /// Number of vertices of the generated graph.
    #[arg(long)]
    l: Option<usize>,
    /// Depth sweep: "3", "1,2,3", or "1..5".
    #[arg(long)]
    k: Option<String>,
    /// Comma list of engines: algebra, montecarlo, closed-form.
    #[arg(long)]
    engines: Option<String>,
    /// Coefficient pruning threshold for the algebra engine (0 = exact).
    #[arg(long)]
    prune_eps: Option<f64>,
    /// Partition as "start:len".
    #[arg(long)]
    partition: Option<String>,
    /// Display base for S2 in the console summary.
    #[arg(long, value_enum, default_value_t = S2Base::E)]
    s2_base: S2Base,
}

#[derive(Args)]
struct RandomEdgeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Graph family to generate.
    #[arg(long, value_enum, default_value_t = GraphFamily::Cycle)]
    graph: GraphFamily,
    /// Area-law scan: comma list of prefix-arc lengths, one sweep per length.
    #[arg(long)]
    arc_lens: Option<String>,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Gate ordering policy per tick.
    #[arg(long, value_enum)]
    ordering: Option<OrderingPolicy>,
    /// Left-interval partition size L_A (default L/2).
    #[arg(long)]
    la: Option<usize>,
    /// Enable the saturation-plateau check with this absolute slack.
    #[arg(long)]
    plateau_abs: Option<f64>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Model whose transfer matrix to analyze.
    #[arg(long, value_enum, default_value_t = SpectrumModel::RandomEdge)]
    model: SpectrumModel,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum GraphFamily {
    Chain,
    Cycle,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SpectrumModel {
    SingleEdge,
    RandomEdge,
    Chain,
}

#[derive(Args)]
struct CompareArgs {
    /// Alternative suite preset (TOML); default is the embedded preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the preset seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for criteria.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch() -> Result<bool, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::SingleEdge(args) => run_model(ModelKind::SingleEdge, args, None, None, None),
        Command::RandomEdge(args) => {
            let partition_override = args
                .arc_lens
                .as_deref()
                .map(parse_usize_list)
                .transpose()?
                .map(|lens| PartitionSpec {
                    lens: Some(lens),
                    ..Default::default()
                });
            let family = args.graph;
            run_model(
                ModelKind::RandomEdge,
                args.run,
                Some(family),
                partition_override,
                None,
            )
        }
        Command::Chain(args) => {
            let partition_override = args.la.map(|la| PartitionSpec::interval(0, la));
            let tweaks = ChainTweaks {
                ordering: args.ordering,
                plateau_abs: args.plateau_abs,
            };
            run_model(
                ModelKind::Chain,
                args.run,
                Some(GraphFamily::Chain),
                partition_override,
                Some(tweaks),
            )
        }
        Command::Spectrum(args) => spectrum(args),
        Command::Compare(args) => compare(args),
    }
}

struct ChainTweaks {
    ordering: Option<OrderingPolicy>,
    plateau_abs: Option<f64>,
}

fn defaults_for(model: ModelKind, family: Option<GraphFamily>, l: usize, d: u32) -> ExperimentConfig {
    let (graph_kind, partition, k, samples) = match model {
        ModelKind::SingleEdge => (
            GraphKind::Chain,
            PartitionSpec::interval(0, 1),
            DepthSpec::Single(1),
            100_000,
        ),
        ModelKind::RandomEdge => (
            match family {
                Some(GraphFamily::Chain) => GraphKind::Chain,
                _ => GraphKind::Cycle,
            },
            PartitionSpec::interval(0, (l / 3).max(1)),
            DepthSpec::Single(1),
            10_000,
        ),
        ModelKind::Chain => (
            GraphKind::Chain,
            PartitionSpec::interval(0, (l / 2).max(1)),
            DepthSpec::List(vec![1, 2, 3]),
            10_000,
        ),
    };
    ExperimentConfig {
        model,
        graph: GraphSpec {
            kind: graph_kind,
            l: Some(l),
            d,
            n: None,
            edges: None,
        },
        partition,
        k,
        ordering: OrderingPolicy::default(),
        engines: vec![EngineKind::Algebra, EngineKind::Montecarlo, EngineKind::ClosedForm],
        samples,
        seed: 0,
        prune_eps: 1e-15,
        mem_cap_gib: None,
        tolerances: Tolerances::default(),
        dump_poly: false,
        dump_samples: false,
    }
}

fn resolve_config(
    model: ModelKind,
    args: &RunArgs,
    family: Option<GraphFamily>,
    partition_override: Option<PartitionSpec>,
    tweaks: Option<&ChainTweaks>,
) -> Result<ExperimentConfig, CliError> {
    let file = args.config.as_ref().map(FileConfig::load).transpose()?;
    let default_l = match model {
        ModelKind::SingleEdge => 2,
        ModelKind::RandomEdge => 12,
        ModelKind::Chain => 8,
    };
    // the default partition tracks the effective vertex count
    let effective_l = args
        .l
        .or_else(|| file.as_ref().and_then(|f| f.graph.as_ref()).and_then(|g| g.l))
        .unwrap_or(default_l);
    let effective_d = args
        .d
        .or_else(|| file.as_ref().and_then(|f| f.graph.as_ref()).map(|g| g.d))
        .unwrap_or(2);
    let mut defaults = defaults_for(model, family, effective_l, effective_d);
    defaults.model = model;

    let flags = Overrides {
        seed: args.seed,
        samples: args.samples,
        d: args.d,
        l: args.l,
        k: args.k.as_deref().map(parse_depths).transpose()?,
        ordering: tweaks.and_then(|t| t.ordering),
        engines: args.engines.as_deref().map(parse_engines).transpose()?,
        prune_eps: args.prune_eps,
        mem_cap_gib: args.mem_cap_gib,
        dump_poly: args.dump_poly,
        dump_samples: args.dump_samples,
        partition: match (&args.partition, partition_override) {
            (Some(text), _) => Some(parse_partition(text)?),
            (None, Some(spec)) => Some(spec),
            (None, None) => None,
        },
    };
    let mut cfg = typent_cli::config::resolve(defaults, file, &flags)?;
    if let Some(tweaks) = tweaks {
        if let Some(abs) = tweaks.plateau_abs {
            cfg.tolerances.plateau_abs = Some(abs);
        }
    }
    Ok(cfg)
}

fn run_model(
    model: ModelKind,
    args: RunArgs,
    family: Option<GraphFamily>,
    partition_override: Option<PartitionSpec>,
    tweaks: Option<ChainTweaks>,
) -> Result<bool, CliError> {
    let cfg = resolve_config(model, &args, family, partition_override, tweaks.as_ref())?;
    let RunOutput {
        report,
        dumps,
        sample_dumps,
    } = run_experiment(&cfg)?;

    print_summary(&report, args.s2_base);

    if let Some(dir) = &args.out {
        report.write_files(dir)?;
        for dump in &dumps {
            let name = format!("poly_k{}_la{}.txt", dump.k, dump.part.len());
            std::fs::write(dir.join(&name), &dump.text)
                .map_err(|e| CliError::Resource(format!("write {name}: {e}")))?;
        }
        for dump in &sample_dumps {
            let name = format!("samples_k{}_la{}.csv", dump.k, dump.part.len());
            std::fs::write(dir.join(&name), dump.to_csv_string())
                .map_err(|e| CliError::Resource(format!("write {name}: {e}")))?;
        }
        println!("wrote {}", dir.join("results.csv").display());
        println!("wrote {}", dir.join("report.json").display());
    } else if !dumps.is_empty() {
        for dump in &dumps {
            println!("# polynomial at k={} (L_A={})", dump.k, dump.part.len());
            print!("{}", dump.text);
        }
    }

    let failures = report.collect_failures();
    if failures.is_empty() {
        println!("all checks passed");
    } else {
        for f in &failures {
            println!("CHECK FAILED {}: {}", f.name, f.detail);
        }
    }
    Ok(report.all_pass)
}

fn s2_display(nats: f64, base: S2Base, d: u32) -> f64 {
    match base {
        S2Base::E => nats,
        S2Base::Two => nats / std::f64::consts::LN_2,
        S2Base::D => nats / (d as f64).ln(),
    }
}

fn print_summary(report: &typent_cli::report::ExperimentReport, base: S2Base) {
    let d = report.config.graph.d;
    println!(
        "model={} d={d} seed={} hash={}",
        report.config.model.as_str(),
        report.seed,
        report.config_hash
    );
    for point in &report.points {
        let mut parts = vec![format!(
            "L_A={} k={} q={:.4}{}",
            point.l_a,
            point.k,
            point.q,
            point.regime.map(|r| format!(" [{r}]")).unwrap_or_default()
        )];
        for row in &point.rows {
            let s2 = s2_display(row.mean_s2.unwrap_or(row.s2_of_mean), base, d);
            match row.engine {
                EngineKind::Montecarlo => parts.push(format!(
                    "mc={:.6}+-{:.1e} S2={s2:.4}",
                    row.purity_mean,
                    row.purity_stderr.unwrap_or(0.0)
                )),
                EngineKind::Algebra => parts.push(format!("algebra={:.12}", row.purity_mean)),
                EngineKind::ClosedForm => {
                    parts.push(format!("closed-form={:.12}", row.purity_mean))
                }
            }
        }
        println!("  {}", parts.join("  "));
    }
    if let Some(slope) = report.area_law_slope {
        println!("  fitted S2-vs-|dA| slope: {}", fmt_f64(slope));
    }
    if let Some(check) = &report.plateau_check {
        println!(
            "  plateau check: {} ({})",
            if check.pass { "pass" } else { "FAIL" },
            check.detail
        );
    }
}

fn spectrum(args: SpectrumArgs) -> Result<bool, CliError> {
    let (model, family) = match args.model {
        SpectrumModel::SingleEdge => (ModelKind::SingleEdge, None),
        SpectrumModel::RandomEdge => (ModelKind::RandomEdge, Some(GraphFamily::Chain)),
        SpectrumModel::Chain => (ModelKind::Chain, Some(GraphFamily::Chain)),
    };
    let mut cfg = resolve_config(model, &args.run, family, None, None)?;
    // spectrum needs no Monte Carlo fields
    cfg.engines = vec![EngineKind::Algebra];
    cfg.samples = 1;
    let report = run_spectrum(&cfg)?;
    println!(
        "basis={} leading={} gap={}",
        report.basis_size,
        fmt_f64(report.leading),
        fmt_f64(report.gap)
    );
    for m in &report.moduli {
        println!("{}", fmt_f64(*m));
    }
    if let Some(dir) = &args.run.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Resource(format!("json write: {e}")))?;
        std::fs::write(dir.join("spectrum.json"), json)
            .map_err(|e| CliError::Resource(format!("write spectrum.json: {e}")))?;
        println!("wrote {}", dir.join("spectrum.json").display());
    }
    Ok(true)
}

fn compare(args: CompareArgs) -> Result<bool, CliError> {
    let mut preset = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            SuitePreset::parse(&text)?
        }
        None => SuitePreset::embedded(),
    };
    if let Some(seed) = args.seed {
        preset.seed = seed;
    }
    let outcomes = suite::run_all(&preset)?;
    for outcome in &outcomes {
        println!("{}", outcome.status_line());
    }
    let all_pass = outcomes.iter().all(|o| o.pass);
    println!(
        "{}: {}/{} criteria passed",
        if all_pass { "PASS" } else { "FAIL" },
        outcomes.iter().filter(|o| o.pass).count(),
        outcomes.len()
    );
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        let json = serde_json::to_string_pretty(&outcomes)
            .map_err(|e| CliError::Resource(format!("json write: {e}")))?;
        std::fs::write(dir.join("criteria.json"), json)
            .map_err(|e| CliError::Resource(format!("write criteria.json: {e}")))?;
    }
    Ok(all_pass)
}

fn parse_depths(text: &str) -> Result<DepthSpec, CliError> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = parse_num(lo, "k range start")?;
        let hi: u32 = parse_num(hi, "k range end")?;
        if hi < lo {
            return Err(CliError::Config(format!("empty k range {text}")));
        }
        return Ok(DepthSpec::List((lo..=hi).collect()));
    }
    if text.contains(',') {
        let ks = text
            .split(',')
            .map(|t| parse_num(t, "k"))
            .collect::<Result<Vec<u32>, _>>()?;
        return Ok(DepthSpec::List(ks));
    }
    Ok(DepthSpec::Single(parse_num(text, "k")?))
}

fn parse_engines(text: &str) -> Result<Vec<EngineKind>, CliError> {
    text.split(',')
        .map(|t| match t.trim() {
            "algebra" => Ok(EngineKind::Algebra),
            "montecarlo" | "mc" => Ok(EngineKind::Montecarlo),
            "closed-form" => Ok(EngineKind::ClosedForm),
            other => Err(CliError::Config(format!("unknown engine {other:?}"))),
        })
        .collect()
}

fn parse_partition(text: &str) -> Result<PartitionSpec, CliError> {
    let (start, len) = text
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("partition {text:?} is not start:len")))?;
    Ok(PartitionSpec::interval(
        parse_num(start, "partition start")?,
        parse_num(len, "partition len")?,
    ))
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',').map(|t| parse_num(t, "arc length")).collect()
}

fn parse_num<T: std::str::FromStr>(text: &str, what: &str) -> Result<T, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{what} {text:?} is not a number")))
}
