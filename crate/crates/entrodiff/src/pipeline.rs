//! End-to-end runs: flow input → sampling → windows → entropy → detector
//! (or baseline), with serializable outputs.
//!
//! The ingest loop is strictly sequential (record order is semantic), but
//! window entropies are pure functions of their tables, so completed
//! windows are evaluated in chunks — in parallel under the `parallel`
//! feature when [`RunConfig::parallel`] is set — and then fed to the
//! detector in window order. Outputs are identical either way.
//!
//! Sampling rejects a record before its line is parsed: the Bernoulli
//! decision does not depend on record content, and not decoding dropped
//! records is where the sampling cost reduction comes from. Parse errors on
//! accepted lines are counted and surfaced in the summary, never silently
//! dropped.

use std::io::{self, BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::{BaselineError, BaselineState, Strategy};
use crate::detector::{CheckMode, Detection, Detector, DetectorConfig, DetectorError, WindowStep};
use crate::entropy::{EntropyError, EntropyMeasure, FrequencyTable};
use crate::ingestion::{
    parse_flow_line, FlowRecord, IngestError, Sampler, SamplerConfig, WindowAccumulator,
    Windowizer,
};
use crate::scalar::Scalar;

/// Windows per entropy-evaluation chunk.
const WINDOW_CHUNK: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// Full configuration of a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub measure: EntropyMeasure,
    /// Unit-time window length in milliseconds.
    pub unit_ms: u64,
    /// Progression length P.
    pub progression: usize,
    /// Minimum recorded slopes before the detector may signal.
    pub warmup_min: u64,
    pub check_mode: CheckMode,
    /// Post-detection suppression in windows; 0 = continuous operation.
    pub cooldown_windows: u64,
    /// Sampling ratio numerator/denominator.
    pub sample_num: u64,
    pub sample_den: u64,
    pub seed: u64,
    /// Baseline decision strategy.
    pub strategy: Strategy,
    /// Windows merged into the baseline's long-term entropy.
    pub long_depth: usize,
    /// Evaluate window chunks with rayon (requires the `parallel` feature;
    /// ignored otherwise).
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            measure: EntropyMeasure::TsallisIntScaled {
                q: 5,
                precision: 1_000_000,
            },
            unit_ms: 60_000,
            progression: 5,
            warmup_min: 5,
            check_mode: CheckMode::Variance,
            cooldown_windows: 0,
            sample_num: 1,
            sample_den: 20,
            seed: 42,
            strategy: Strategy::S1,
            long_depth: 10,
            parallel: true,
        }
    }
}

/// Default Tsallis order: 5 when sampling dilutes the window, 8 at full
/// rate. Sampling thins the per-window distribution, so a smaller order
/// already amplifies concentration enough.
pub fn default_q_for_ratio(sample_num: u64, sample_den: u64) -> u32 {
    if sample_num == sample_den {
        8
    } else {
        5
    }
}

impl RunConfig {
    /// Re-validate every constraint owned by the underlying modules.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let err = |m: String| Err(PipelineError::Config(m));
        self.measure
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.unit_ms == 0 {
            return err("unit_ms must be >= 1".into());
        }
        if self.progression < 2 {
            return err(format!(
                "progression must be >= 2, got {}",
                self.progression
            ));
        }
        // Truncated integer means make xs = 0..P−1 collapse the fit
        // denominator for P ∈ {2, 3}.
        if self.measure.is_integer() && self.progression < 4 {
            return err(format!(
                "integer-mode progression must be >= 4 (truncation degenerates the fit), got {}",
                self.progression
            ));
        }
        if self.warmup_min == 0 {
            return err("warmup_min must be >= 1".into());
        }
        SamplerConfig::new(self.sample_num, self.sample_den, self.seed)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.long_depth == 0 {
            return err("long_depth must be >= 1".into());
        }
        Ok(())
    }

    fn detector_config(&self) -> DetectorConfig {
        DetectorConfig {
            progression_len: self.progression,
            warmup_min: self.warmup_min,
            check_mode: self.check_mode,
            cooldown_windows: self.cooldown_windows,
        }
    }

    fn sampler(&self) -> Sampler {
        Sampler::new(
            SamplerConfig::new(self.sample_num, self.sample_den, self.seed)
                .expect("validated ratio"),
        )
    }

    fn use_parallel(&self) -> bool {
        cfg!(feature = "parallel") && self.parallel
    }
}

/// Ingest and run counters.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub windows: u64,
    pub empty_windows: u64,
    pub detections: u64,
    pub records_read: u64,
    pub records_accepted: u64,
    pub parse_errors: u64,
    /// First few parse errors, for diagnostics.
    pub parse_error_samples: Vec<String>,
    pub elapsed_ms: u64,
    pub records_per_sec: f64,
}

impl RunSummary {
    pub fn render(&self) -> String {
        format!(
            "windows {} ({} empty) | detections {} | records read {} accepted {} | \
             parse errors {} | {} ms | {:.0} records/s",
            self.windows,
            self.empty_windows,
            self.detections,
            self.records_read,
            self.records_accepted,
            self.parse_errors,
            self.elapsed_ms,
            self.records_per_sec
        )
    }
}

/// One series row per window: entropy, slope and sigma as they evolved.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesRow<S> {
    pub window_index: u64,
    pub window_start_ms: u64,
    pub entropy: Option<S>,
    pub slope: Option<S>,
    /// √(M2/count), as a float in both modes (display only).
    pub sigma: Option<f64>,
}

impl<S: Scalar> SeriesRow<S> {
    fn from_step(step: &WindowStep<S>) -> Self {
        SeriesRow {
            window_index: step.window_index,
            window_start_ms: step.window_start_ms,
            entropy: step.entropy,
            slope: step.slope,
            sigma: step
                .variance
                .map(|(m2, count)| (m2.to_f64() / count as f64).sqrt()),
        }
    }
}

/// Detector-run output for one scalar mode.
#[derive(Debug, Clone)]
pub struct DetectOutput<S> {
    pub detections: Vec<Detection<S>>,
    pub series: Vec<SeriesRow<S>>,
    pub summary: RunSummary,
    pub measure: EntropyMeasure,
}

/// A detector run, integer or floating-point depending on the measure.
#[derive(Debug, Clone)]
pub enum DetectRun {
    Float(DetectOutput<f64>),
    Scaled(DetectOutput<i128>),
}

impl DetectRun {
    pub fn summary(&self) -> &RunSummary {
        match self {
            DetectRun::Float(o) => &o.summary,
            DetectRun::Scaled(o) => &o.summary,
        }
    }

    /// Window indices of the detections, in order.
    pub fn detection_windows(&self) -> Vec<u64> {
        match self {
            DetectRun::Float(o) => o.detections.iter().map(|d| d.window_index).collect(),
            DetectRun::Scaled(o) => o.detections.iter().map(|d| d.window_index).collect(),
        }
    }

    pub fn write_detections_jsonl(&self, out: &mut impl Write) -> io::Result<()> {
        match self {
            DetectRun::Float(o) => {
                write_detections_jsonl(out, &o.detections, &o.measure.to_string(), "detector")
            }
            DetectRun::Scaled(o) => {
                write_detections_jsonl(out, &o.detections, &o.measure.to_string(), "detector")
            }
        }
    }

    pub fn write_series_csv(&self, out: &mut impl Write) -> io::Result<()> {
        match self {
            DetectRun::Float(o) => write_series_csv(out, &o.series),
            DetectRun::Scaled(o) => write_series_csv(out, &o.series),
        }
    }
}

/// Detection wire record (JSON-lines).
#[derive(Serialize)]
struct WireRecord<'a, S> {
    window_index: u64,
    window_start_ms: u64,
    slope: S,
    variance_num: S,
    variance_den: u64,
    entropy: S,
    measure: &'a str,
    source: &'a str,
}

pub fn write_detections_jsonl<S: Scalar>(
    out: &mut impl Write,
    detections: &[Detection<S>],
    measure: &str,
    source: &str,
) -> io::Result<()> {
    for d in detections {
        let rec = WireRecord {
            window_index: d.window_index,
            window_start_ms: d.window_start_ms,
            slope: d.slope,
            variance_num: d.variance_num,
            variance_den: d.variance_den,
            entropy: d.entropy,
            measure,
            source,
        };
        serde_json::to_writer(&mut *out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_series_csv<S: Scalar>(
    out: &mut impl Write,
    series: &[SeriesRow<S>],
) -> io::Result<()> {
    writeln!(out, "window_index,window_start_ms,entropy,slope,sigma")?;
    for row in series {
        let opt = |v: Option<String>| v.unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            row.window_index,
            row.window_start_ms,
            opt(row.entropy.map(|v| v.to_string())),
            opt(row.slope.map(|v| v.to_string())),
            opt(row.sigma.map(|v| format!("{v:.6}")))
        )?;
    }
    Ok(())
}

/// Parse detection windows back out of a JSON-lines detection file.
pub fn read_detection_windows(reader: impl BufRead) -> Result<Vec<u64>, PipelineError> {
    #[derive(Deserialize)]
    struct Line {
        window_index: u64,
    }
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| {
            PipelineError::Config(format!("detections line {}: {e}", i + 1))
        })?;
        out.push(parsed.window_index);
    }
    Ok(out)
}

// ─── ingest loop ────────────────────────────────────────────────

struct IngestCounters {
    records_read: u64,
    records_accepted: u64,
    parse_errors: u64,
    parse_error_samples: Vec<String>,
}

impl IngestCounters {
    fn new() -> Self {
        IngestCounters {
            records_read: 0,
            records_accepted: 0,
            parse_errors: 0,
            parse_error_samples: Vec::new(),
        }
    }

    fn note_parse_error(&mut self, line_no: u64, kind: impl std::fmt::Display) {
        self.parse_errors += 1;
        if self.parse_error_samples.len() < 5 {
            self.parse_error_samples.push(format!("line {line_no}: {kind}"));
        }
    }
}

/// Drive the sampler + windowizer over a byte reader. The sampling
/// decision is drawn per non-blank line *before* parsing; rejected lines
/// are never decoded. Lines are scanned in place over large blocks, so a
/// rejected record costs one newline search and one RNG draw — dropping
/// before decoding is where the sampling cost reduction comes from.
fn ingest_reader(
    mut input: impl BufRead,
    sampler: &mut Sampler,
    windowizer: &mut Windowizer,
    counters: &mut IngestCounters,
    mut on_window: impl FnMut(WindowAccumulator) -> Result<(), PipelineError>,
) -> Result<(), PipelineError> {
    const BLOCK: usize = 1 << 20;
    let mut buf = vec![0u8; BLOCK];
    let mut start = 0usize;
    let mut end = 0usize;
    let mut eof = false;
    let mut line_no: u64 = 0;
    let mut pending: Vec<WindowAccumulator> = Vec::new();

    macro_rules! process_line {
        ($line:expr) => {{
            let line: &[u8] = $line;
            line_no += 1;
            if !(line.is_empty() || line == b"\r") {
                counters.records_read += 1;
                if sampler.accept_next() {
                    match parse_flow_line(line) {
                        Ok(rec) => {
                            counters.records_accepted += 1;
                            windowizer.push(rec.timestamp_ms, rec.src, rec.dst, line_no, |w| {
                                pending.push(w)
                            })?;
                            for w in pending.drain(..) {
                                on_window(w)?;
                            }
                        }
                        Err(kind) => counters.note_parse_error(line_no, kind),
                    }
                }
            }
        }};
    }

    loop {
        // Consume every complete line currently buffered in one batched
        // newline scan.
        {
            let hay = &buf[..end];
            let mut line_start = start;
            for nl in memchr::memchr_iter(b'\n', &hay[start..]) {
                let abs = start + nl;
                process_line!(&hay[line_start..abs]);
                line_start = abs + 1;
            }
            start = line_start;
        }
        if eof {
            if start < end {
                process_line!(&buf[start..end]);
            }
            break;
        }
        buf.copy_within(start..end, 0);
        end -= start;
        start = 0;
        if end == buf.len() {
            // A single line longer than the block: grow and keep reading.
            buf.resize(buf.len() * 2, 0);
        }
        let n = input.read(&mut buf[end..])?;
        if n == 0 {
            eof = true;
        } else {
            end += n;
        }
    }
    windowizer.finish(|w| pending.push(w));
    for w in pending.drain(..) {
        on_window(w)?;
    }
    Ok(())
}

/// Same loop over already-parsed records (in-memory corpora). Sampling
/// draws in the same order as the reader path, so both paths accept the
/// same records for a given seed.
fn ingest_records(
    records: &[FlowRecord],
    sampler: &mut Sampler,
    windowizer: &mut Windowizer,
    counters: &mut IngestCounters,
    mut on_window: impl FnMut(WindowAccumulator) -> Result<(), PipelineError>,
) -> Result<(), PipelineError> {
    let mut pending: Vec<WindowAccumulator> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        counters.records_read += 1;
        if !sampler.accept_next() {
            continue;
        }
        counters.records_accepted += 1;
        windowizer.push(r.timestamp_ms, &r.src, &r.dst, i as u64 + 1, |w| {
            pending.push(w)
        })?;
        for w in pending.drain(..) {
            on_window(w)?;
        }
    }
    windowizer.finish(|w| pending.push(w));
    for w in pending.drain(..) {
        on_window(w)?;
    }
    Ok(())
}

// ─── detector run ───────────────────────────────────────────────

struct DetectCtx<S: Scalar, F> {
    eval: F,
    detector: Detector<S>,
    parallel: bool,
    pending: Vec<WindowAccumulator>,
    detections: Vec<Detection<S>>,
    series: Vec<SeriesRow<S>>,
    windows: u64,
    empty_windows: u64,
}

impl<S, F> DetectCtx<S, F>
where
    S: Scalar,
    F: Fn(&FrequencyTable) -> Result<S, EntropyError> + Sync,
{
    fn new(cfg: &RunConfig, eval: F) -> Result<Self, PipelineError> {
        Ok(DetectCtx {
            eval,
            detector: Detector::new(cfg.detector_config())?,
            parallel: cfg.use_parallel(),
            pending: Vec::with_capacity(WINDOW_CHUNK),
            detections: Vec::new(),
            series: Vec::new(),
            windows: 0,
            empty_windows: 0,
        })
    }

    fn on_window(&mut self, w: WindowAccumulator) -> Result<(), PipelineError> {
        self.pending.push(w);
        if self.pending.len() >= WINDOW_CHUNK {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<(), PipelineError> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let entropies = eval_windows(&self.pending, &self.eval, self.parallel)?;
        for (w, e) in self.pending.iter().zip(entropies) {
            self.windows += 1;
            if w.is_empty() {
                self.empty_windows += 1;
            }
            let step = self
                .detector
                .process_window(w.window_index, w.window_start_ms(), e)?;
            self.series.push(SeriesRow::from_step(&step));
            if let Some(d) = step.detection {
                self.detections.push(d);
            }
        }
        self.pending.clear();
        Ok(())
    }

    fn finish(mut self, measure: EntropyMeasure) -> Result<DetectOutput<S>, PipelineError> {
        self.flush()?;
        let summary = RunSummary {
            windows: self.windows,
            empty_windows: self.empty_windows,
            detections: self.detections.len() as u64,
            ..RunSummary::default()
        };
        Ok(DetectOutput {
            detections: self.detections,
            series: self.series,
            summary,
            measure,
        })
    }
}

/// Evaluate the entropies of a window chunk; empty windows yield `None`.
fn eval_windows<S, F>(
    windows: &[WindowAccumulator],
    eval: &F,
    parallel: bool,
) -> Result<Vec<Option<S>>, EntropyError>
where
    S: Scalar,
    F: Fn(&FrequencyTable) -> Result<S, EntropyError> + Sync,
{
    let one = |w: &WindowAccumulator| -> Result<Option<S>, EntropyError> {
        if w.is_empty() {
            Ok(None)
        } else {
            eval(&w.dst_table).map(Some)
        }
    };
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return windows.par_iter().map(one).collect();
    }
    let _ = parallel;
    windows.iter().map(one).collect()
}

enum RecordSource<'a, R> {
    Reader(R),
    Records(&'a [FlowRecord]),
}

fn run_detect_impl<R: BufRead>(
    cfg: &RunConfig,
    source: RecordSource<'_, R>,
) -> Result<DetectRun, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut sampler = cfg.sampler();
    let mut windowizer = Windowizer::new(cfg.unit_ms)?;
    let mut counters = IngestCounters::new();
    let measure = cfg.measure;

    let finish_summary = |summary: &mut RunSummary, counters: IngestCounters| {
        summary.records_read = counters.records_read;
        summary.records_accepted = counters.records_accepted;
        summary.parse_errors = counters.parse_errors;
        summary.parse_error_samples = counters.parse_error_samples;
        let elapsed = started.elapsed();
        summary.elapsed_ms = elapsed.as_millis() as u64;
        summary.records_per_sec = if elapsed.as_secs_f64() > 0.0 {
            summary.records_read as f64 / elapsed.as_secs_f64()
        } else {
            0.0
        };
    };

    if measure.is_integer() {
        let mut ctx = DetectCtx::new(cfg, move |ft: &FrequencyTable| {
            measure.evaluate_scaled(ft).map(|v| v as i128)
        })?;
        match source {
            RecordSource::Reader(input) => ingest_reader(
                input,
                &mut sampler,
                &mut windowizer,
                &mut counters,
                |w| ctx.on_window(w),
            )?,
            RecordSource::Records(records) => ingest_records(
                records,
                &mut sampler,
                &mut windowizer,
                &mut counters,
                |w| ctx.on_window(w),
            )?,
        }
        let mut out = ctx.finish(measure)?;
        finish_summary(&mut out.summary, counters);
        Ok(DetectRun::Scaled(out))
    } else {
        let mut ctx = DetectCtx::new(cfg, move |ft: &FrequencyTable| measure.evaluate_f64(ft))?;
        match source {
            RecordSource::Reader(input) => ingest_reader(
                input,
                &mut sampler,
                &mut windowizer,
                &mut counters,
                |w| ctx.on_window(w),
            )?,
            RecordSource::Records(records) => ingest_records(
                records,
                &mut sampler,
                &mut windowizer,
                &mut counters,
                |w| ctx.on_window(w),
            )?,
        }
        let mut out = ctx.finish(measure)?;
        finish_summary(&mut out.summary, counters);
        Ok(DetectRun::Float(out))
    }
}

/// Run the detector over a flow-CSV reader.
pub fn run_detect(cfg: &RunConfig, input: impl BufRead) -> Result<DetectRun, PipelineError> {
    run_detect_impl(cfg, RecordSource::<_>::Reader(input))
}

/// Run the detector over in-memory records (sampling still applies).
pub fn run_detect_records(
    cfg: &RunConfig,
    records: &[FlowRecord],
) -> Result<DetectRun, PipelineError> {
    run_detect_impl(cfg, RecordSource::<&[u8]>::Records(records))
}

// ─── baseline run ───────────────────────────────────────────────

/// One baseline firing (wire-compatible with detections; slope and
/// variance carry zeros since the baseline has no fit).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BaselineFiring<S> {
    pub window_index: u64,
    pub window_start_ms: u64,
    /// Short-term destination entropy at firing time.
    pub entropy: S,
}

#[derive(Debug, Clone)]
pub struct BaselineOutput<S> {
    pub firings: Vec<BaselineFiring<S>>,
    pub summary: RunSummary,
    pub measure: EntropyMeasure,
    pub strategy: Strategy,
}

#[derive(Debug, Clone)]
pub enum BaselineRun {
    Float(BaselineOutput<f64>),
    Scaled(BaselineOutput<i128>),
}

impl BaselineRun {
    pub fn summary(&self) -> &RunSummary {
        match self {
            BaselineRun::Float(o) => &o.summary,
            BaselineRun::Scaled(o) => &o.summary,
        }
    }

    pub fn firing_windows(&self) -> Vec<u64> {
        match self {
            BaselineRun::Float(o) => o.firings.iter().map(|f| f.window_index).collect(),
            BaselineRun::Scaled(o) => o.firings.iter().map(|f| f.window_index).collect(),
        }
    }

    pub fn write_firings_jsonl(&self, out: &mut impl Write) -> io::Result<()> {
        fn write<S: Scalar>(
            out: &mut impl Write,
            firings: &[BaselineFiring<S>],
            measure: &str,
        ) -> io::Result<()> {
            for f in firings {
                let rec = WireRecord {
                    window_index: f.window_index,
                    window_start_ms: f.window_start_ms,
                    slope: S::ZERO,
                    variance_num: S::ZERO,
                    variance_den: 0,
                    entropy: f.entropy,
                    measure,
                    source: "baseline",
                };
                serde_json::to_writer(&mut *out, &rec)?;
                out.write_all(b"\n")?;
            }
            Ok(())
        }
        match self {
            BaselineRun::Float(o) => write(out, &o.firings, &o.measure.to_string()),
            BaselineRun::Scaled(o) => write(out, &o.firings, &o.measure.to_string()),
        }
    }
}

fn run_baseline_impl<R: BufRead>(
    cfg: &RunConfig,
    source: RecordSource<'_, R>,
) -> Result<BaselineRun, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut sampler = cfg.sampler();
    let mut windowizer = Windowizer::new(cfg.unit_ms)?;
    let mut counters = IngestCounters::new();
    let measure = cfg.measure;

    fn drive<S: Scalar, R: BufRead>(
        cfg: &RunConfig,
        source: RecordSource<'_, R>,
        sampler: &mut Sampler,
        windowizer: &mut Windowizer,
        counters: &mut IngestCounters,
        eval: impl Fn(&FrequencyTable) -> Result<S, EntropyError> + Send + Sync + 'static,
    ) -> Result<(Vec<BaselineFiring<S>>, u64, u64), PipelineError> {
        let mut state = BaselineState::new(cfg.strategy, cfg.long_depth, eval)?;
        let mut firings = Vec::new();
        let mut windows = 0u64;
        let mut empty_windows = 0u64;
        let mut on_window = |w: WindowAccumulator| -> Result<(), PipelineError> {
            windows += 1;
            if w.is_empty() {
                empty_windows += 1;
            }
            let step = state.update(&w)?;
            if step.fired {
                firings.push(BaselineFiring {
                    window_index: step.window_index,
                    window_start_ms: step.window_start_ms,
                    entropy: step.entropies.expect("fired implies entropies").dst_ste,
                });
            }
            Ok(())
        };
        match source {
            RecordSource::Reader(input) => {
                ingest_reader(input, sampler, windowizer, counters, &mut on_window)?
            }
            RecordSource::Records(records) => {
                ingest_records(records, sampler, windowizer, counters, &mut on_window)?
            }
        }
        Ok((firings, windows, empty_windows))
    }

    let mut summary = RunSummary::default();
    let run = if measure.is_integer() {
        let (firings, windows, empty) = drive(
            cfg,
            source,
            &mut sampler,
            &mut windowizer,
            &mut counters,
            move |ft| measure.evaluate_scaled(ft).map(|v| v as i128),
        )?;
        summary.windows = windows;
        summary.empty_windows = empty;
        summary.detections = firings.len() as u64;
        BaselineRun::Scaled(BaselineOutput {
            firings,
            summary: RunSummary::default(),
            measure,
            strategy: cfg.strategy,
        })
    } else {
        let (firings, windows, empty) = drive(
            cfg,
            source,
            &mut sampler,
            &mut windowizer,
            &mut counters,
            move |ft| measure.evaluate_f64(ft),
        )?;
        summary.windows = windows;
        summary.empty_windows = empty;
        summary.detections = firings.len() as u64;
        BaselineRun::Float(BaselineOutput {
            firings,
            summary: RunSummary::default(),
            measure,
            strategy: cfg.strategy,
        })
    };

    summary.records_read = counters.records_read;
    summary.records_accepted = counters.records_accepted;
    summary.parse_errors = counters.parse_errors;
    summary.parse_error_samples = counters.parse_error_samples;
    let elapsed = started.elapsed();
    summary.elapsed_ms = elapsed.as_millis() as u64;
    summary.records_per_sec = if elapsed.as_secs_f64() > 0.0 {
        summary.records_read as f64 / elapsed.as_secs_f64()
    } else {
        0.0
    };
    Ok(match run {
        BaselineRun::Float(mut o) => {
            o.summary = summary;
            BaselineRun::Float(o)
        }
        BaselineRun::Scaled(mut o) => {
            o.summary = summary;
            BaselineRun::Scaled(o)
        }
    })
}

/// Run the baseline framework over a flow-CSV reader.
pub fn run_baseline(cfg: &RunConfig, input: impl BufRead) -> Result<BaselineRun, PipelineError> {
    run_baseline_impl(cfg, RecordSource::<_>::Reader(input))
}

/// Run the baseline framework over in-memory records.
pub fn run_baseline_records(
    cfg: &RunConfig,
    records: &[FlowRecord],
) -> Result<BaselineRun, PipelineError> {
    run_baseline_impl(cfg, RecordSource::<&[u8]>::Records(records))
}
