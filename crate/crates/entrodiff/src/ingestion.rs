//! Flow-record ingestion: CSV parsing, Bernoulli sampling, and unit-time
//! windowing into per-window frequency tables.
//!
//! Input is a minimal flow log, one record per line:
//!
//! ```text
//! timestamp_ms,src,dst[,extra,columns,ignored]
//! ```
//!
//! sorted by timestamp (nondecreasing). Sampling decides accept/reject per
//! record with an exact rational Bernoulli draw from a seeded generator, so
//! a given (seed, stream) always accepts the same records. Windowing
//! assigns each accepted record to the half-open window
//! `[k·unit_ms, (k+1)·unit_ms)` and emits explicit empty windows for gaps,
//! so the detector clock never skips.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entropy::FrequencyTable;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {kind}")]
    Parse { line: u64, kind: ParseErrorKind },
    #[error(
        "out-of-order timestamp at line {line}: {timestamp_ms} ms after {previous_ms} ms \
         (records must be nondecreasing in time)"
    )]
    OutOfOrder {
        line: u64,
        timestamp_ms: u64,
        previous_ms: u64,
    },
    #[error("invalid sampler ratio {num}/{den}: must satisfy 0 < num <= den")]
    InvalidRatio { num: u64, den: u64 },
    #[error("unit_ms must be >= 1")]
    InvalidUnit,
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("missing field: expected timestamp_ms,src,dst")]
    MissingField,
    #[error("invalid timestamp {0:?}")]
    InvalidTimestamp(String),
    #[error("empty address field")]
    EmptyAddress,
    #[error("invalid utf-8 in record")]
    InvalidUtf8,
}

/// One flow record: when it happened and which addresses it connects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowRecord {
    pub timestamp_ms: u64,
    pub src: String,
    pub dst: String,
}

/// Borrowed view of a parsed line; owns nothing so the hot path can reject
/// records without allocating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowRecordRef<'a> {
    pub timestamp_ms: u64,
    pub src: &'a str,
    pub dst: &'a str,
}

impl FlowRecordRef<'_> {
    pub fn to_owned(self) -> FlowRecord {
        FlowRecord {
            timestamp_ms: self.timestamp_ms,
            src: self.src.to_owned(),
            dst: self.dst.to_owned(),
        }
    }
}

/// Parse one CSV line. Extra columns beyond the third are ignored; a
/// trailing `\r` is tolerated.
pub fn parse_flow_line(line: &[u8]) -> Result<FlowRecordRef<'_>, ParseErrorKind> {
    let line = match line {
        [rest @ .., b'\r'] => rest,
        _ => line,
    };
    let mut fields = line.splitn(4, |&b| b == b',');
    let ts = fields.next().ok_or(ParseErrorKind::MissingField)?;
    let src = fields.next().ok_or(ParseErrorKind::MissingField)?;
    let dst = fields.next().ok_or(ParseErrorKind::MissingField)?;
    let timestamp_ms = parse_u64(ts).ok_or_else(|| {
        ParseErrorKind::InvalidTimestamp(String::from_utf8_lossy(ts).into_owned())
    })?;
    if src.is_empty() || dst.is_empty() {
        return Err(ParseErrorKind::EmptyAddress);
    }
    let src = std::str::from_utf8(src).map_err(|_| ParseErrorKind::InvalidUtf8)?;
    let dst = std::str::from_utf8(dst).map_err(|_| ParseErrorKind::InvalidUtf8)?;
    Ok(FlowRecordRef {
        timestamp_ms,
        src,
        dst,
    })
}

/// Owned-record convenience over [`parse_flow_line`], reporting the carried
/// line number on error.
pub fn parse_flow_csv(line: &str, line_no: u64) -> Result<FlowRecord, IngestError> {
    parse_flow_line(line.as_bytes())
        .map(FlowRecordRef::to_owned)
        .map_err(|kind| IngestError::Parse { line: line_no, kind })
}

fn parse_u64(bytes: &[u8]) -> Option<u64> {
    if bytes.is_empty() || bytes.len() > 19 {
        return None;
    }
    let mut v: u64 = 0;
    for &b in bytes {
        if !b.is_ascii_digit() {
            return None;
        }
        v = v * 10 + (b - b'0') as u64;
    }
    Some(v)
}

/// Sampling ratio and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub ratio_num: u64,
    pub ratio_den: u64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(ratio_num: u64, ratio_den: u64, seed: u64) -> Result<Self, IngestError> {
        if ratio_num == 0 || ratio_den == 0 || ratio_num > ratio_den {
            return Err(IngestError::InvalidRatio {
                num: ratio_num,
                den: ratio_den,
            });
        }
        Ok(Self {
            ratio_num,
            ratio_den,
            seed,
        })
    }

    pub fn is_full(&self) -> bool {
        self.ratio_num == self.ratio_den
    }
}

/// Per-record Bernoulli sampler. The accept decision is an exact rational
/// draw (`u < num` with `u` uniform in `0..den`), independent of record
/// content, so the accept set is a pure function of (seed, record index).
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    num: u64,
    den: u64,
}

impl Sampler {
    pub fn new(config: SamplerConfig) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            num: config.ratio_num,
            den: config.ratio_den,
        }
    }

    /// Decide the next record in the stream. With ratio 1 no randomness is
    /// consumed and everything is accepted, reproducing the unsampled
    /// pipeline exactly.
    pub fn accept_next(&mut self) -> bool {
        if self.num == self.den {
            return true;
        }
        self.rng.random_range(0..self.den) < self.num
    }

    /// Record-shaped wrapper: the decision does not depend on the record.
    pub fn sample(&mut self, _record: &FlowRecord) -> bool {
        self.accept_next()
    }
}

/// Frequency tables for one unit-time window, destination- and source-keyed.
#[derive(Debug, Clone, Default)]
pub struct WindowAccumulator {
    pub window_index: u64,
    pub unit_ms: u64,
    pub dst_table: FrequencyTable,
    pub src_table: FrequencyTable,
}

impl WindowAccumulator {
    pub fn new(window_index: u64, unit_ms: u64) -> Self {
        Self {
            window_index,
            unit_ms,
            dst_table: FrequencyTable::new(),
            src_table: FrequencyTable::new(),
        }
    }

    pub fn window_start_ms(&self) -> u64 {
        self.window_index * self.unit_ms
    }

    pub fn is_empty(&self) -> bool {
        self.dst_table.is_empty()
    }

    pub fn records(&self) -> u64 {
        self.dst_table.total()
    }

    fn push(&mut self, src: &str, dst: &str) {
        self.dst_table.increment(dst);
        self.src_table.increment(src);
    }
}

/// Assigns accepted records to unit-time windows and emits completed
/// windows in order, including explicit empty ones for index gaps.
#[derive(Debug)]
pub struct Windowizer {
    unit_ms: u64,
    current: Option<WindowAccumulator>,
    previous_ms: Option<u64>,
}

impl Windowizer {
    pub fn new(unit_ms: u64) -> Result<Self, IngestError> {
        if unit_ms == 0 {
            return Err(IngestError::InvalidUnit);
        }
        Ok(Self {
            unit_ms,
            current: None,
            previous_ms: None,
        })
    }

    /// Feed one accepted record. Completed windows (possibly several, when
    /// the stream jumps over empty windows) are handed to `sink` oldest
    /// first. `line` is carried for error reporting only.
    pub fn push(
        &mut self,
        timestamp_ms: u64,
        src: &str,
        dst: &str,
        line: u64,
        mut sink: impl FnMut(WindowAccumulator),
    ) -> Result<(), IngestError> {
        if let Some(prev) = self.previous_ms {
            if timestamp_ms < prev {
                return Err(IngestError::OutOfOrder {
                    line,
                    timestamp_ms,
                    previous_ms: prev,
                });
            }
        }
        self.previous_ms = Some(timestamp_ms);
        let index = timestamp_ms / self.unit_ms;
        match &mut self.current {
            Some(w) if w.window_index == index => w.push(src, dst),
            Some(w) => {
                let done = std::mem::replace(w, WindowAccumulator::new(index, self.unit_ms));
                let gap_start = done.window_index + 1;
                sink(done);
                for gap in gap_start..index {
                    sink(WindowAccumulator::new(gap, self.unit_ms));
                }
                self.current.as_mut().unwrap().push(src, dst);
            }
            None => {
                let mut w = WindowAccumulator::new(index, self.unit_ms);
                w.push(src, dst);
                self.current = Some(w);
            }
        }
        Ok(())
    }

    /// Flush the trailing window at end of stream.
    pub fn finish(&mut self, mut sink: impl FnMut(WindowAccumulator)) {
        if let Some(w) = self.current.take() {
            sink(w);
        }
    }
}

/// Open a flow input: a plain file, a `.gz` file, or `-` for stdin.
pub fn open_flow_input(path: &str) -> io::Result<Box<dyn BufRead + Send>> {
    // A generous buffer: the reader is the hot loop of the whole pipeline.
    const BUF: usize = 1 << 16;
    if path == "-" {
        return Ok(Box::new(BufReader::with_capacity(BUF, io::stdin())));
    }
    let file = File::open(Path::new(path))?;
    if path.ends_with(".gz") {
        Ok(Box::new(BufReader::with_capacity(
            BUF,
            flate2::read::GzDecoder::new(file),
        )))
    } else {
        Ok(Box::new(BufReader::with_capacity(BUF, file)))
    }
}
