//! One binary for the whole pipeline:
//!
//! ```text
//! entrodiff generate       synthetic corpus + ground truth
//! entrodiff detect         flows → detections JSON-lines (+ series CSV)
//! entrodiff baseline       flows → threshold-framework firings
//! entrodiff eval           detections × truth → report
//! entrodiff export-series  flows → per-window entropy/slope/sigma CSV
//! ```
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 data
//! error (malformed records, out-of-order input, bad detection/truth
//! files). A detect/baseline run that hits malformed lines still writes
//! its outputs and summary, then exits 3.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use entrodiff::detector::CheckMode;
use entrodiff::evaluation::{load_truth_csv, EvalReport};
use entrodiff::ingestion::open_flow_input;
use entrodiff::pipeline::{
    default_q_for_ratio, read_detection_windows, run_baseline, run_detect, BaselineRun,
    PipelineError, RunConfig,
};
use entrodiff::trafficgen::{generate_to, ScenarioSpec};
use entrodiff::EntropyMeasure;

#[derive(Parser)]
#[command(name = "entrodiff", version, about = "Entropy-differential DoS detection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic flow corpus and its ground-truth intervals
    Generate(GenerateArgs),
    /// Run the slope detector over a flow log
    Detect(DetectArgs),
    /// Run the threshold-based baseline over a flow log
    Baseline(DetectArgs),
    /// Score a detection stream against ground truth
    Eval(EvalArgs),
    /// Export the per-window entropy/slope/sigma series as CSV
    ExportSeries(DetectArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario JSON file
    #[arg(long)]
    spec: PathBuf,
    /// Flow CSV output path
    #[arg(long, default_value = "flows.csv")]
    out: PathBuf,
    /// Truth CSV output path
    #[arg(long, default_value = "truth.csv")]
    truth: PathBuf,
    /// Generate single-threaded
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureKind {
    Shannon,
    Renyi,
    Tsallis,
    /// Integer-only scaled Tsallis
    TsallisInt,
}

#[derive(Args)]
struct DetectArgs {
    /// Input flow CSV; `-` for stdin, `.gz` accepted
    #[arg(short, long, default_value = "-")]
    input: String,
    /// Detections (or firings) JSON-lines output; `-` for stdout
    #[arg(short, long, default_value = "-")]
    out: String,
    /// Also write the per-window series CSV here
    #[arg(long)]
    series: Option<String>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Detections JSON-lines file
    #[arg(long)]
    detections: PathBuf,
    /// Ground-truth CSV (start_ms,end_ms,label)
    #[arg(long)]
    truth: PathBuf,
    /// Total unit-time windows of the scored run
    #[arg(long)]
    windows: u64,
    /// Overlap tolerance in windows
    #[arg(long, default_value_t = 1)]
    tolerance: u64,
    #[arg(long, default_value_t = 60_000)]
    unit_ms: u64,
    /// Report JSON output; `-` for stdout
    #[arg(short, long, default_value = "-")]
    out: String,
}

/// Every tunable of a run. Precedence: flags > --config file > defaults.
#[derive(Args)]
struct ConfigArgs {
    /// JSON config file (as emitted by --config-dump); flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Entropy measure
    #[arg(long, value_enum)]
    measure: Option<MeasureKind>,
    /// Tsallis order (default: 5 when sampling, 8 at full rate)
    #[arg(long)]
    q: Option<u32>,
    /// Renyi order
    #[arg(long)]
    alpha: Option<f64>,
    /// Scaled-Tsallis precision multiplier
    #[arg(long)]
    precision: Option<u64>,
    /// Unit-time window length in milliseconds
    #[arg(long)]
    unit_ms: Option<u64>,
    /// Progression length P
    #[arg(long)]
    progression: Option<usize>,
    /// Slopes recorded before signalling may start
    #[arg(long)]
    warmup_min: Option<u64>,
    /// algorithm1 (slope² · count > M2) or listing (slope² > M2)
    #[arg(long)]
    check_mode: Option<String>,
    /// Windows suppressed after each detection (0 = continuous)
    #[arg(long)]
    cooldown: Option<u64>,
    /// Sampling ratio numerator
    #[arg(long)]
    sample_num: Option<u64>,
    /// Sampling ratio denominator
    #[arg(long)]
    sample_den: Option<u64>,
    /// Sampler seed
    #[arg(long)]
    seed: Option<u64>,
    /// Baseline strategy S1..S7
    #[arg(long)]
    strategy: Option<String>,
    /// Windows merged into the baseline long-term entropy
    #[arg(long)]
    long_depth: Option<usize>,
    /// Evaluate window chunks single-threaded
    #[arg(long)]
    sequential: bool,
    /// Print the fully-resolved configuration as JSON and exit
    #[arg(long)]
    config_dump: bool,
}

enum CliError {
    Io(io::Error),
    Config(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Config(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Io(e) => CliError::Io(e),
            PipelineError::Ingest(_) => CliError::Data(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let file = File::open(path)?;
                serde_json::from_reader(BufReader::new(file))
                    .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.unit_ms {
            cfg.unit_ms = v;
        }
        if let Some(v) = self.progression {
            cfg.progression = v;
            // Warm-up follows the progression unless set explicitly.
            if self.warmup_min.is_none() {
                cfg.warmup_min = v as u64;
            }
        }
        if let Some(v) = self.warmup_min {
            cfg.warmup_min = v;
        }
        if let Some(v) = &self.check_mode {
            cfg.check_mode = v.parse::<CheckMode>().map_err(CliError::Config)?;
        }
        if let Some(v) = self.cooldown {
            cfg.cooldown_windows = v;
        }
        if let Some(v) = self.sample_num {
            cfg.sample_num = v;
        }
        if let Some(v) = self.sample_den {
            cfg.sample_den = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.strategy {
            cfg.strategy = v.parse().map_err(CliError::Config)?;
        }
        if let Some(v) = self.long_depth {
            cfg.long_depth = v;
        }
        if self.sequential {
            cfg.parallel = false;
        }
        cfg.measure = self.resolve_measure(&cfg)?;
        cfg.validate().map_err(CliError::from)?;
        Ok(cfg)
    }

    fn resolve_measure(&self, cfg: &RunConfig) -> Result<EntropyMeasure, CliError> {
        // Parameters count as pre-set only when they come from a config
        // file; the built-in default measure must not pin q, or the
        // ratio-dependent q default (8 unsampled, 5 sampled) could never
        // apply.
        let from_file = self.config.is_some();
        let (base_kind, base_q, base_alpha, base_precision) = match cfg.measure {
            EntropyMeasure::Shannon => (MeasureKind::Shannon, None, None, None),
            EntropyMeasure::Renyi { alpha } => (MeasureKind::Renyi, None, Some(alpha), None),
            EntropyMeasure::Tsallis { q } => (MeasureKind::Tsallis, Some(q), None, None),
            EntropyMeasure::TsallisIntScaled { q, precision } => {
                (MeasureKind::TsallisInt, Some(q), None, Some(precision))
            }
        };
        let (base_q, base_alpha, base_precision) = if from_file {
            (base_q, base_alpha, base_precision)
        } else {
            (None, None, None)
        };
        let kind = self.measure.unwrap_or(base_kind);
        let inherited = kind == base_kind;
        let q = self
            .q
            .or(if inherited { base_q } else { None })
            .unwrap_or_else(|| default_q_for_ratio(cfg.sample_num, cfg.sample_den));
        let alpha = self
            .alpha
            .or(if inherited { base_alpha } else { None })
            .unwrap_or(0.0);
        let precision = self
            .precision
            .or(if inherited { base_precision } else { None })
            .unwrap_or(1_000_000);
        match kind {
            MeasureKind::Shannon => Ok(EntropyMeasure::Shannon),
            MeasureKind::Renyi => EntropyMeasure::renyi(alpha),
            MeasureKind::Tsallis => EntropyMeasure::tsallis(q),
            MeasureKind::TsallisInt => EntropyMeasure::tsallis_int_scaled(q, precision),
        }
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

fn open_output(path: &str) -> io::Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Detect(args) => cmd_detect(args, Emit::Detections),
        Command::ExportSeries(args) => cmd_detect(args, Emit::SeriesOnly),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let spec: ScenarioSpec = {
        let file = File::open(&args.spec)?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| CliError::Config(format!("spec {}: {e}", args.spec.display())))?
    };
    let mut flows = BufWriter::new(File::create(&args.out)?);
    let mut truth = BufWriter::new(File::create(&args.truth)?);
    let stats = generate_to(&spec, &mut flows, &mut truth, !args.sequential)
        .map_err(|e| CliError::Config(e.to_string()))?;
    flows.flush()?;
    truth.flush()?;
    eprintln!(
        "generated {} records ({} benign, {} attack), {} attacks -> {} / {}",
        stats.total(),
        stats.benign_records,
        stats.attack_records,
        spec.attacks.len(),
        args.out.display(),
        args.truth.display()
    );
    Ok(())
}

enum Emit {
    Detections,
    SeriesOnly,
}

fn cmd_detect(args: DetectArgs, emit: Emit) -> Result<(), CliError> {
    let cfg = args.config.resolve()?;
    if args.config.config_dump {
        return dump_config(&cfg);
    }
    let input = open_flow_input(&args.input)?;
    let run = run_detect(&cfg, input)?;
    match emit {
        Emit::Detections => {
            let mut out = open_output(&args.out)?;
            run.write_detections_jsonl(&mut out)?;
            out.flush()?;
            if let Some(series_path) = &args.series {
                let mut s = open_output(series_path)?;
                run.write_series_csv(&mut s)?;
                s.flush()?;
            }
        }
        Emit::SeriesOnly => {
            let mut out = open_output(&args.out)?;
            run.write_series_csv(&mut out)?;
            out.flush()?;
        }
    }
    let summary = run.summary();
    eprintln!("{}", summary.render());
    fail_on_parse_errors(summary.parse_errors, &summary.parse_error_samples)
}

fn cmd_baseline(args: DetectArgs) -> Result<(), CliError> {
    let cfg = args.config.resolve()?;
    if args.config.config_dump {
        return dump_config(&cfg);
    }
    let input = open_flow_input(&args.input)?;
    let run: BaselineRun = run_baseline(&cfg, input)?;
    let mut out = open_output(&args.out)?;
    run.write_firings_jsonl(&mut out)?;
    out.flush()?;
    let summary = run.summary();
    eprintln!("[{}] {}", cfg.strategy, summary.render());
    fail_on_parse_errors(summary.parse_errors, &summary.parse_error_samples)
}

fn fail_on_parse_errors(count: u64, samples: &[String]) -> Result<(), CliError> {
    if count == 0 {
        return Ok(());
    }
    for s in samples {
        eprintln!("parse error: {s}");
    }
    Err(CliError::Data(format!("{count} malformed record(s)")))
}

fn dump_config(cfg: &RunConfig) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(cfg).map_err(|e| CliError::Config(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let detections = {
        let file = File::open(&args.detections)?;
        read_detection_windows(BufReader::new(file)).map_err(|e| CliError::Data(e.to_string()))?
    };
    let truth = {
        let file = File::open(&args.truth)?;
        load_truth_csv(BufReader::new(file)).map_err(|e| CliError::Data(e.to_string()))?
    };
    let report = EvalReport::build(&detections, &truth, args.windows, args.unit_ms, args.tolerance)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let mut out = open_output(&args.out)?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
    out.write_all(b"\n")?;
    out.flush()?;
    eprint!("{}", report.render_table());
    Ok(())
}
