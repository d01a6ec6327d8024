//! Command-line front end: stream ingestion, screening and post-screening
//! runs, the replicated simulation experiment, and level comparison.

pub mod csv_io;
pub mod emit;
pub mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use scs_core::confseq::{
    HeavyTailConfig, LambdaSchedule, MissingDataConfig, QuantileConfig, SubGaussianConfig,
};
use scs_core::psi::{build_psi_report, compare_levels, PsiMethod};
use scs_core::screening::{run_scs, BoundConstructor, ScreeningConfig, StopRule};
use scs_core::simharness::{run_experiment, ArmModel, ExperimentConfig};

use crate::csv_io::ingest_csv;
use crate::emit::{
    emit_experiment_csv, emit_json, emit_psi_csv, emit_trace_csv, ExperimentDocument,
    LevelsDocument, OutputFormat, PsiDocument, TraceDocument,
};
use crate::error::{CliError, CliResult};

const DEFAULT_ALPHA: f64 = 0.1;
/// Variance proxy for data bounded in [0, 1].
const DEFAULT_SIGMA2: f64 = 0.25;

#[derive(Parser)]
#[command(
    name = "scs",
    version,
    about = "Anytime-valid top-m screening with FCR-controlled post-screening intervals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated screening experiment on the Bernoulli grid theta_i = 1 - i/k
    Simulate(SimulateArgs),
    /// Run the screening recursion over a CSV stream
    Screen(ScreenArgs),
    /// FCR-adjusted intervals for the arms surviving a CSV stream
    Psi(PsiArgs),
    /// Compare the screening level with the two adjusted levels
    CompareLevels(CompareLevelsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstructorKind {
    Subgaussian,
    HeavyTail,
    Quantile,
    MissingData,
    ModifiedLucb,
}

#[derive(Args, Debug)]
struct ConstructorOpts {
    /// Bound family driving the recursion
    #[arg(long, value_enum)]
    constructor: Option<ConstructorKind>,
    /// Variance proxy for the sub-Gaussian families [default: 0.25]
    #[arg(long)]
    sigma2: Option<f64>,
    /// Fixed weight; required for missing-data, overrides the decaying
    /// schedule elsewhere
    #[arg(long)]
    lambda: Option<f64>,
    /// Moment order in (1, 2] for the heavy-tailed family
    #[arg(long)]
    p: Option<f64>,
    /// Central moment bound for the heavy-tailed family
    #[arg(long)]
    v: Option<f64>,
    /// Target quantile in (0, 1) for the quantile family
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Number of arms
    #[arg(long, default_value_t = 50)]
    k: usize,
    /// Target count
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Global error level
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[command(flatten)]
    constructor: ConstructorOpts,
    /// Replications
    #[arg(long, default_value_t = 200)]
    reps: u64,
    /// Master seed; replication i draws from stream i of this seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Times at which metrics are recorded (the horizon is the largest)
    #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000, 10000])]
    checkpoints: Vec<u64>,
    /// Window for the data-dependent stopping time
    #[arg(long, default_value_t = 50)]
    stable_window: u64,
    /// FCR target for adjusted intervals [default: alpha]
    #[arg(long)]
    fcr_alpha: Option<f64>,
    /// Output file (stdout if omitted); relative paths land in $SCS_OUTPUT_DIR
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct ScreenArgs {
    /// Input CSV with header `t,arm,value`
    #[arg(long)]
    input: PathBuf,
    /// Expected arm count, cross-checked against the file
    #[arg(long)]
    k: Option<usize>,
    /// Target count
    #[arg(long)]
    m: Option<usize>,
    /// Global error level [default: 0.1]
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    constructor: ConstructorOpts,
    /// stream-end | size | at:T | stable:N
    #[arg(long)]
    stop_rule: Option<String>,
    /// Output file (stdout if omitted); relative paths land in $SCS_OUTPUT_DIR
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// TOML file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PsiArgs {
    #[command(flatten)]
    screen: ScreenArgs,
    /// Adjustment rule: psi (selection-proportional) or bonferroni (fixed)
    #[arg(long, value_enum)]
    psi_method: Option<PsiMethodArg>,
    /// FCR target [default: alpha]
    #[arg(long)]
    fcr_alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PsiMethodArg {
    Psi,
    Bonferroni,
}

#[derive(Args, Debug)]
struct CompareLevelsArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: usize,
    /// Size of the selected set [default: m]
    #[arg(long)]
    selected_size: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Optional JSON output file
    #[arg(long)]
    output: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// TOML defaults
// ---------------------------------------------------------------------------

/// Flag defaults loadable from a TOML file; explicit flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDefaults {
    k: Option<usize>,
    m: Option<usize>,
    alpha: Option<f64>,
    constructor: Option<String>,
    sigma2: Option<f64>,
    lambda: Option<f64>,
    p: Option<f64>,
    v: Option<f64>,
    q: Option<f64>,
    stop_rule: Option<String>,
    psi_method: Option<String>,
    fcr_alpha: Option<f64>,
    format: Option<String>,
}

impl FileDefaults {
    fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
    }
}

fn parse_variant<T: ValueEnum + Copy>(name: &str, value: &str) -> CliResult<T> {
    T::from_str(value, true).map_err(|_| CliError::invalid(format!("bad {name}: `{value}`")))
}

fn parse_stop_rule(s: &str) -> CliResult<StopRule> {
    match s {
        "stream-end" => Ok(StopRule::StreamEnd),
        "size" => Ok(StopRule::SizeReached),
        _ => {
            if let Some(t) = s.strip_prefix("at:") {
                let t: u64 = t
                    .parse()
                    .map_err(|e| CliError::invalid(format!("bad stop rule `{s}`: {e}")))?;
                Ok(StopRule::AtTime(t))
            } else if let Some(n) = s.strip_prefix("stable:") {
                let n: u64 = n
                    .parse()
                    .map_err(|e| CliError::invalid(format!("bad stop rule `{s}`: {e}")))?;
                Ok(StopRule::StableFor(n))
            } else {
                Err(CliError::invalid(format!(
                    "bad stop rule `{s}` (expected stream-end, size, at:T, or stable:N)"
                )))
            }
        }
    }
}

fn build_constructor(
    kind: ConstructorKind,
    opts: &ConstructorOpts,
    file: &FileDefaults,
    alpha: f64,
) -> CliResult<BoundConstructor> {
    let sigma2 = opts.sigma2.or(file.sigma2).unwrap_or(DEFAULT_SIGMA2);
    let lambda = opts.lambda.or(file.lambda);
    let schedule = match lambda {
        Some(l) => LambdaSchedule::Constant(l),
        None => LambdaSchedule::SqrtLogRate { alpha },
    };
    let need = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| CliError::invalid(format!("--{name} is required for this constructor")))
    };
    Ok(match kind {
        ConstructorKind::Subgaussian => {
            BoundConstructor::SubGaussian(SubGaussianConfig { sigma2, schedule })
        }
        ConstructorKind::HeavyTail => BoundConstructor::HeavyTail(HeavyTailConfig::new(
            need("p", opts.p.or(file.p))?,
            need("v", opts.v.or(file.v))?,
            schedule,
        )),
        ConstructorKind::Quantile => BoundConstructor::Quantile(QuantileConfig {
            q: need("q", opts.q.or(file.q))?,
        }),
        ConstructorKind::MissingData => BoundConstructor::MissingData(MissingDataConfig {
            sigma2,
            lambda: need("lambda", lambda)?,
        }),
        ConstructorKind::ModifiedLucb => BoundConstructor::ModifiedLucb,
    })
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

struct ScreenSetup {
    cfg: ScreeningConfig,
    stop: StopRule,
    format: OutputFormat,
    labels: Vec<String>,
    stream: scs_core::screening::ObservationStream,
}

fn prepare_screen(args: &ScreenArgs) -> CliResult<ScreenSetup> {
    let file = FileDefaults::load(args.config.as_ref())?;
    let ingested = ingest_csv(&args.input)?;
    let k = ingested.labels.len();
    if let Some(expected) = args.k.or(file.k) {
        if expected != k {
            return Err(CliError::invalid(format!(
                "{} contains {k} arms, but --k says {expected}",
                args.input.display()
            )));
        }
    }
    let m = args
        .m
        .or(file.m)
        .ok_or_else(|| CliError::invalid("--m is required (flag or config file)"))?;
    let alpha = args.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
    let kind = match (&args.constructor.constructor, &file.constructor) {
        (Some(kind), _) => *kind,
        (None, Some(name)) => parse_variant::<ConstructorKind>("constructor", name)?,
        (None, None) => ConstructorKind::Subgaussian,
    };
    let constructor = build_constructor(kind, &args.constructor, &file, alpha)?;
    let cfg = ScreeningConfig {
        k,
        m,
        alpha,
        constructor,
    };
    cfg.validate()?;
    let stop = match args.stop_rule.as_ref().or(file.stop_rule.as_ref()) {
        Some(s) => parse_stop_rule(s)?,
        None => StopRule::StreamEnd,
    };
    let format = match (&args.format, &file.format) {
        (Some(f), _) => *f,
        (None, Some(name)) => parse_variant::<OutputFormat>("format", name)?,
        (None, None) => OutputFormat::Json,
    };
    Ok(ScreenSetup {
        cfg,
        stop,
        format,
        labels: ingested.labels,
        stream: ingested.stream,
    })
}

fn run_screen(args: &ScreenArgs) -> CliResult<()> {
    let setup = prepare_screen(args)?;
    let trace = run_scs(&setup.stream, &setup.cfg, setup.stop)?;
    let state = &trace.final_state;
    let survivors: Vec<&str> = state
        .survivors()
        .into_iter()
        .map(|i| setup.labels[i].as_str())
        .collect();
    eprintln!(
        "screened {} arms over {} steps at working level {:.3e}; {} survive: {}",
        setup.cfg.k,
        state.time(),
        setup.cfg.effective_level(),
        survivors.len(),
        survivors.join(", ")
    );
    let doc = TraceDocument::new(&trace, &setup.cfg, setup.labels.clone(), None);
    match setup.format {
        OutputFormat::Json => emit_json(&doc, args.output.as_deref()),
        OutputFormat::Csv => emit_trace_csv(&doc, args.output.as_deref()),
    }
}

fn run_psi(args: &PsiArgs) -> CliResult<()> {
    let file = FileDefaults::load(args.screen.config.as_ref())?;
    let setup = prepare_screen(&args.screen)?;
    let method = match (&args.psi_method, &file.psi_method) {
        (Some(PsiMethodArg::Psi), _) => PsiMethod::Psi,
        (Some(PsiMethodArg::Bonferroni), _) => PsiMethod::Bonferroni,
        (None, Some(name)) => match parse_variant::<PsiMethodArg>("psi method", name)? {
            PsiMethodArg::Psi => PsiMethod::Psi,
            PsiMethodArg::Bonferroni => PsiMethod::Bonferroni,
        },
        (None, None) => PsiMethod::Psi,
    };
    let fcr_alpha = args.fcr_alpha.or(file.fcr_alpha).unwrap_or(setup.cfg.alpha);
    let trace = run_scs(&setup.stream, &setup.cfg, setup.stop)?;
    let report = build_psi_report(&trace, trace.final_time(), method, &setup.cfg, fcr_alpha)?;
    eprintln!(
        "adjusted intervals for {} arms at tau={} (level {:.3e}, screening level {:.3e})",
        report.entries.len(),
        report.tau,
        report.level,
        report.screening_level
    );
    let doc = PsiDocument {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: setup.cfg.clone(),
        fcr_alpha,
        labels: setup.labels.clone(),
        report,
    };
    match setup.format {
        OutputFormat::Json => emit_json(&doc, args.screen.output.as_deref()),
        OutputFormat::Csv => emit_psi_csv(&doc, args.screen.output.as_deref()),
    }
}

fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let none = FileDefaults::default();
    let kind = args
        .constructor
        .constructor
        .unwrap_or(ConstructorKind::Subgaussian);
    let constructor = build_constructor(kind, &args.constructor, &none, args.alpha)?;
    let mut checkpoints = args.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let t_max = *checkpoints
        .last()
        .ok_or_else(|| CliError::invalid("need at least one checkpoint"))?;
    let cfg = ExperimentConfig {
        screening: ScreeningConfig {
            k: args.k,
            m: args.m,
            alpha: args.alpha,
            constructor,
        },
        model: ArmModel::bernoulli_grid(args.k),
        reps: args.reps,
        t_max,
        checkpoints,
        stable_window: args.stable_window,
        fcr_alpha: args.fcr_alpha,
        seed: args.seed,
    };
    let report = run_experiment(&cfg)?;
    for c in &report.checkpoints {
        eprintln!(
            "T={:>8}: mean survivors {:.2}, estimated FCR {:.4}, identification rate {:.2}",
            c.time, c.mean_survivors, c.fcr_psi, c.identification_rate
        );
    }
    let doc = ExperimentDocument {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: cfg,
        report,
    };
    match args.format {
        OutputFormat::Json => emit_json(&doc, args.output.as_deref()),
        OutputFormat::Csv => emit_experiment_csv(&doc, args.output.as_deref()),
    }
}

fn run_compare_levels(args: &CompareLevelsArgs) -> CliResult<()> {
    let selected = args.selected_size.unwrap_or(args.m);
    let comparison = compare_levels(args.k, args.m, selected, args.alpha)?;
    let ordering = comparison.ordering();
    println!(
        "screening level (k={}, m={}):  {}",
        args.k,
        args.m,
        emit::fmt_sig12(comparison.screening)
    );
    println!(
        "psi level (|S|={selected}):          {}",
        emit::fmt_sig12(comparison.psi)
    );
    println!(
        "bonferroni level:             {}",
        emit::fmt_sig12(comparison.bonferroni)
    );
    println!("regime: {}", serde_variant_name(&comparison.regime)?);
    println!("ordering: {ordering}");
    if args.output.is_some() {
        let doc = LevelsDocument {
            k: args.k,
            m: args.m,
            selected_size: selected,
            alpha: args.alpha,
            comparison,
            ordering,
        };
        emit_json(&doc, args.output.as_deref())?;
    }
    Ok(())
}

fn serde_variant_name<T: serde::Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_value(v)?
        .as_str()
        .map(str::to_owned)
        .unwrap_or_else(|| "unknown".to_owned()))
}

/// Parses arguments and runs the selected subcommand, mapping failures to
/// the exit-code contract (0 success, 1 validation, 2 I/O).
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Screen(args) => run_screen(args),
        Command::Psi(args) => run_psi(args),
        Command::CompareLevels(args) => run_compare_levels(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
