//! `lart` command-line driver.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lart::bench::{self, Algorithm, BenchSpec};
use lart::synthgen::{generate, Scenario, ScenarioConfig};
use lart::{detect, fowlkes_mallows, nmi, GroundTruth, LartConfig, Multiplex, Partition};
use log::info;

#[derive(Parser, Debug)]
#[command(name = "lart", version, about = "Community detection in multiplex networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic multiplex with planted communities.
    Generate(GenerateArgs),
    /// Detect communities in a multiplex file.
    Detect(DetectArgs),
    /// Compare a predicted partition with a ground truth.
    Evaluate(EvaluateArgs),
    /// Run repeated generate/detect/evaluate rounds.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_scenario)]
    scenario: Scenario,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplex output path.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth output path.
    #[arg(long)]
    truth_out: PathBuf,
    /// Manifest output path (default: `<out>.manifest.json`).
    #[arg(long)]
    manifest_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    p_noise: f64,
}

#[derive(Args, Debug, Clone)]
struct WalkArgs {
    /// Walk length (default: 3 × number of layers).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    t: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
}

impl WalkArgs {
    fn config(&self, fixed_omega: Option<f64>) -> LartConfig {
        LartConfig {
            t: self.t.map(|t| t as usize),
            epsilon: self.eps,
            gamma: self.gamma,
            fixed_omega,
        }
    }
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    walk: WalkArgs,
    /// Use this constant inter-layer weight instead of shared-neighbor counts.
    #[arg(long)]
    fixed_omega: Option<f64>,
    /// Partition output path.
    #[arg(long)]
    out: PathBuf,
    /// JSON report path (default: `<out>.json`).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the t-step transition matrix as CSV.
    #[arg(long)]
    dump_walk: Option<PathBuf>,
    /// Write the dissimilarity matrix as CSV.
    #[arg(long)]
    dump_dissim: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Metric {
    Nmi,
    Fm,
    Both,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Both)]
    metric: Metric,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Scenario name, or `all`.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of `lart,fixed`.
    #[arg(long, default_value = "lart", value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Vec<Algorithm>,
    #[command(flatten)]
    walk: WalkArgs,
    /// Per-run CSV output path.
    #[arg(long)]
    out_csv: PathBuf,
    /// Aggregate summary JSON path.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Fill the runtime_ms column. Makes the CSV differ between executions.
    #[arg(long)]
    timing: bool,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: lart::LartError| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: lart::LartError| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_generate(args: GenerateArgs) -> anyhow::Result<()> {
    let mut cfg = ScenarioConfig::new(args.scenario, args.seed);
    cfg.p_noise = args.p_noise;
    let inst = generate(&cfg)?;
    inst.multiplex.write(&args.out)?;
    inst.truth.write(&args.truth_out)?;
    let manifest = args
        .manifest_out
        .unwrap_or_else(|| with_suffix(&args.out, ".manifest.json"));
    fs::write(&manifest, inst.manifest.to_json()?)
        .with_context(|| format!("writing {}", manifest.display()))?;
    info!(
        "generated {} seed {}: N = {}, {} communities",
        args.scenario,
        args.seed,
        inst.multiplex.num_nodes(),
        inst.manifest.communities.len()
    );
    Ok(())
}

fn cmd_detect(args: DetectArgs) -> anyhow::Result<()> {
    let m = Multiplex::read(&args.input)?;
    let det = detect(&m, &args.walk.config(args.fixed_omega))?;
    det.partition.write(&args.out)?;
    let json = args.json.unwrap_or_else(|| with_suffix(&args.out, ".json"));
    fs::write(&json, serde_json::to_string_pretty(&det.report())?)
        .with_context(|| format!("writing {}", json.display()))?;
    if let Some(path) = &args.dump_walk {
        det.walk.matrix().write_csv(path)?;
    }
    if let Some(path) = &args.dump_dissim {
        det.dissimilarity.values().write_csv(path)?;
    }
    let t = det.timings;
    info!(
        "walk {:.1} ms, dissimilarity {:.1} ms, linkage {:.1} ms",
        t.walk_ms, t.dissimilarity_ms, t.linkage_ms
    );
    println!(
        "communities={} q_m={:.6} t={}",
        det.partition.num_communities(),
        det.q_m,
        det.t
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    let truth = GroundTruth::read(&args.truth)?.to_partition();
    let pred = Partition::read(&args.pred)?;
    let mut json = serde_json::Map::new();
    let mut line = Vec::new();
    if matches!(args.metric, Metric::Nmi | Metric::Both) {
        let v = nmi(&truth, &pred)?;
        line.push(format!("nmi={v:.6}"));
        json.insert("nmi".into(), v.into());
    }
    if matches!(args.metric, Metric::Fm | Metric::Both) {
        let v = fowlkes_mallows(&truth, &pred)?;
        line.push(format!("fm={v:.6}"));
        json.insert("fm".into(), v.into());
    }
    println!("{}", line.join(" "));
    println!("{}", serde_json::Value::Object(json));
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    let scenarios: Vec<Scenario> = if args.scenario.eq_ignore_ascii_case("all") {
        Scenario::ALL.to_vec()
    } else {
        vec![args.scenario.parse()?]
    };
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let mut outcomes = Vec::new();
    for &scenario in &scenarios {
        let spec = BenchSpec {
            scenario,
            runs: args.runs,
            master_seed: args.seed,
            algorithms: args.algorithms.clone(),
            config: args.walk.config(None),
        };
        outcomes.extend(bench::run(&spec)?);
    }
    fs::write(&args.out_csv, bench::to_csv(&outcomes, args.timing))
        .with_context(|| format!("writing {}", args.out_csv.display()))?;

    let summary = bench::aggregate(&outcomes);
    for agg in &summary {
        println!(
            "{} {:<5} runs={} nmi={} fm={} runtime_ms={:.0}",
            agg.scenario, agg.algorithm, agg.runs, agg.nmi, agg.fm, agg.runtime_ms.mean
        );
    }
    if let Some(path) = &args.summary {
        fs::write(path, serde_json::to_string_pretty(&summary)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let failures: Vec<_> = outcomes.iter().filter_map(|o| o.as_ref().err()).collect();
    if let Some(first) = failures.first() {
        bail!(
            "{} run(s) failed; first: {} seed {} {}: {}",
            failures.len(),
            first.scenario,
            first.seed,
            first.algorithm,
            first.message
        );
    }
    Ok(())
}
