use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use projsel::bounds::verify_bounds;
use projsel::curvature::{curvature_report, CurvatureConfig, DEFAULT_SAMPLES};
use projsel::harness::{
    generate, run_sweep, EtaMode, GeneratorConfig, GeneratorKind, NamedExample, SweepOptions,
};
use projsel::matroid::{MatroidKind, MatroidSpec};
use projsel::selectors::{
    brute_force_optimal, forward_regression_with, omp_with, Instance, SelectOptions,
};

const THREADS_ENV: &str = "PROJSEL_THREADS";

#[derive(Parser)]
#[command(
    name = "projsel",
    version,
    about = "Projection-maximizing subset selection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as JSON.
    Gen(GenArgs),
    /// Run a selector on an instance file.
    Select(SelectArgs),
    /// Compute curvatures and the principal angle of an instance.
    Curvature(AnalysisArgs),
    /// Run all selectors and check the approximation bounds.
    Bounds(AnalysisArgs),
    /// Run a batch of generator configs and verify every instance.
    Sweep(SweepArgs),
    /// Check the independence axioms of an instance's matroid.
    ValidateMatroid(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Orthogonal,
    Perturbed,
    Gaussian,
    FrCounterexample,
    NonuniformCounterexample,
}

#[derive(Clone, Copy, ValueEnum)]
enum EtaArg {
    Random,
    InSpan,
}

#[derive(Args)]
struct GenArgs {
    /// Generator config JSON; overrides the other generator flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "orthogonal")]
    kind: GenKind,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rotation budget in radians for `perturbed`.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Parameter of `nonuniform-counterexample`.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "random")]
    eta: EtaArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Fr,
    Omp,
    Opt,
}

#[derive(Args)]
struct SelectArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "fr")]
    algorithm: Algorithm,
    /// OMP residual update `r ← r − P(E)η` instead of `r = η − P(E)η`.
    #[arg(long)]
    literal_residual: bool,
    /// Stop once the best available gain is zero.
    #[arg(long)]
    stop_on_zero_gain: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Args)]
struct CurvatureArgs {
    /// Defaults to the matroid's rank.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Seed for sampled mode.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl CurvatureArgs {
    fn config(&self) -> CurvatureConfig {
        match self.mode {
            Mode::Exact => CurvatureConfig::exact(),
            Mode::Sampled => CurvatureConfig::sampled(self.samples, self.seed),
        }
    }
}

#[derive(Args)]
struct AnalysisArgs {
    instance: PathBuf,
    #[command(flatten)]
    curvature: CurvatureArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON list of generator configs.
    config: PathBuf,
    /// Instances per config.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[command(flatten)]
    curvature: CurvatureArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Leave the `wall_ms` column empty so reruns are byte-identical.
    #[arg(long)]
    no_timings: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Instance JSON, or a matroid object with a `ground_size` field.
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&read(path)?)
        .with_context(|| format!("malformed instance file {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(value)?)
}

fn gen(args: GenArgs) -> Result<()> {
    let config = match &args.config {
        Some(p) => serde_json::from_str::<GeneratorConfig>(&read(p)?)
            .with_context(|| format!("malformed generator config {}", p.display()))?,
        None => {
            let kind = match args.kind {
                GenKind::Orthogonal => GeneratorKind::Orthogonal,
                GenKind::Perturbed => GeneratorKind::Perturbed { delta: args.delta },
                GenKind::Gaussian => GeneratorKind::GaussianDictionary,
                GenKind::FrCounterexample => GeneratorKind::NamedExample {
                    name: NamedExample::FrCounterexample,
                    epsilon: None,
                },
                GenKind::NonuniformCounterexample => GeneratorKind::NamedExample {
                    name: NamedExample::NonuniformCounterexample,
                    epsilon: Some(args.epsilon),
                },
            };
            let eta = match args.eta {
                EtaArg::Random => EtaMode::RandomUnit,
                EtaArg::InSpan => EtaMode::InSpan,
            };
            GeneratorConfig::new(kind, args.dim, args.n, args.k, args.seed).with_eta(eta)
        }
    };
    let inst = generate(&config)?;
    emit(args.out.as_deref(), &inst.to_json())
}

fn select(args: SelectArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let opts = SelectOptions {
        literal_residual: args.literal_residual,
        stop_on_zero_gain: args.stop_on_zero_gain,
    };
    let result = match args.algorithm {
        Algorithm::Fr => forward_regression_with(&inst, &opts),
        Algorithm::Omp => omp_with(&inst, &opts),
        Algorithm::Opt => brute_force_optimal(&inst)?,
    };
    emit_json(args.out.as_deref(), &result)
}

fn curvature(args: AnalysisArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let k = args
        .curvature
        .k
        .unwrap_or_else(|| inst.matroid().rank_cap());
    let report = curvature_report(&inst, k, &args.curvature.config())?;
    emit_json(args.out.as_deref(), &report)
}

fn bounds(args: AnalysisArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let report = verify_bounds(&inst, args.curvature.k, &args.curvature.config())?;
    emit_json(args.out.as_deref(), &report)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let text = read(&args.config)?;
    let configs: Vec<GeneratorConfig> = serde_json::from_str(&text)
        .with_context(|| format!("malformed sweep config {}", args.config.display()))?;
    let opts = SweepOptions {
        reps: args.reps,
        curvature: args.curvature.config(),
    };
    let result = run_sweep(&configs, &opts);
    match args.format {
        Format::Csv => emit(args.out.as_deref(), &result.to_csv(!args.no_timings))?,
        Format::Json => emit(args.out.as_deref(), &result.to_json())?,
    }
    eprintln!(
        "{} rows, {} satisfied, {} errors",
        result.rows.len(),
        result.satisfied_count(),
        result.error_count()
    );
    Ok(())
}

fn validate_matroid(args: ValidateArgs) -> Result<()> {
    let text = read(&args.file)?;
    let value: Value = serde_json::from_str(&text)
        .with_context(|| format!("malformed JSON in {}", args.file.display()))?;
    let spec = if value.get("ground").is_some() {
        load_instance(&args.file)?.matroid().clone()
    } else {
        let n = value
            .get("ground_size")
            .and_then(Value::as_u64)
            .context("matroid file needs an unsigned integer field `ground_size`")?;
        let kind: MatroidKind =
            serde_json::from_value(value).context("invalid field `type` or its parameters")?;
        MatroidSpec::new(kind, n as usize)?
    };
    emit_json(args.out.as_deref(), &spec.validate_axioms()?)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("{THREADS_ENV} must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Select(a) => select(a),
        Command::Curvature(a) => curvature(a),
        Command::Bounds(a) => bounds(a),
        Command::Sweep(a) => sweep(a),
        Command::ValidateMatroid(a) => validate_matroid(a),
    }
}
