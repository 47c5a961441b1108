//! Scoring detection streams against ground-truth attack intervals.
//!
//! Two complementary views:
//!
//! - raw counts: `detections − actual` (reported as-is, may be negative);
//! - timeline overlap: a detection window, widened by ± a tolerance of unit
//!   windows, either overlaps an attack interval or is a false positive;
//!   an attack no detection overlaps is a false negative.
//!
//! The time-based false-positive rate is
//! `max(0, detections − actual) / total_windows` — clamped at zero since a
//! rate cannot be negative.

use std::io::BufRead;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("attack interval {start_ms}..{end_ms} is empty or inverted")]
    BadInterval { start_ms: u64, end_ms: u64 },
    #[error("detections must be sorted by window index")]
    UnsortedDetections,
    #[error("attacks must be sorted by start time")]
    UnsortedAttacks,
    #[error("total windows must be >= 1")]
    NoWindows,
    #[error("truth line {line}: expected start_ms,end_ms,label")]
    TruthParse { line: u64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Ground-truth attack: half-open interval `[start_ms, end_ms)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttackInterval {
    pub start_ms: u64,
    pub end_ms: u64,
    pub label: String,
}

impl AttackInterval {
    pub fn new(start_ms: u64, end_ms: u64, label: impl Into<String>) -> Result<Self, EvalError> {
        if start_ms >= end_ms {
            return Err(EvalError::BadInterval { start_ms, end_ms });
        }
        Ok(Self {
            start_ms,
            end_ms,
            label: label.into(),
        })
    }
}

/// Read a truth CSV (`start_ms,end_ms,label` per line, no header).
pub fn load_truth_csv(reader: impl BufRead) -> Result<Vec<AttackInterval>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut f = line.splitn(3, ',');
        let (start, end, label) = match (f.next(), f.next(), f.next()) {
            (Some(s), Some(e), Some(l)) => (s, e, l),
            _ => return Err(EvalError::TruthParse { line: line_no }),
        };
        let start_ms: u64 = start
            .parse()
            .map_err(|_| EvalError::TruthParse { line: line_no })?;
        let end_ms: u64 = end
            .parse()
            .map_err(|_| EvalError::TruthParse { line: line_no })?;
        out.push(AttackInterval::new(start_ms, end_ms, label)?);
    }
    Ok(out)
}

/// Timeline-overlap classification result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TimelineCounts {
    /// Attacks overlapped by at least one detection (each attack counts
    /// once, however many detections land on it).
    pub true_positives: u64,
    /// Detections overlapping no attack.
    pub false_positives: u64,
    /// Attacks overlapped by no detection.
    pub false_negatives: u64,
}

/// Classify detection windows against attack intervals.
///
/// A detection in window `w` covers `[w·unit, (w+1)·unit)`, widened by
/// `tolerance_windows` whole windows on both sides — the default of 1
/// absorbs the one-window granularity of both the detections and the
/// ground-truth timing.
pub fn classify_timeline(
    detection_windows: &[u64],
    attacks: &[AttackInterval],
    unit_ms: u64,
    tolerance_windows: u64,
) -> Result<TimelineCounts, EvalError> {
    if detection_windows.windows(2).any(|p| p[0] > p[1]) {
        return Err(EvalError::UnsortedDetections);
    }
    if attacks.windows(2).any(|p| p[0].start_ms > p[1].start_ms) {
        return Err(EvalError::UnsortedAttacks);
    }
    let widened = |w: u64| {
        let lo = w.saturating_sub(tolerance_windows) * unit_ms;
        let hi = (w + 1 + tolerance_windows) * unit_ms;
        (lo, hi)
    };
    let overlaps =
        |(lo, hi): (u64, u64), a: &AttackInterval| lo < a.end_ms && a.start_ms < hi;

    let mut counts = TimelineCounts::default();
    let mut attack_hit = vec![false; attacks.len()];
    for &w in detection_windows {
        let span = widened(w);
        let mut any = false;
        for (i, a) in attacks.iter().enumerate() {
            if overlaps(span, a) {
                attack_hit[i] = true;
                any = true;
            }
        }
        if !any {
            counts.false_positives += 1;
        }
    }
    counts.true_positives = attack_hit.iter().filter(|&&h| h).count() as u64;
    counts.false_negatives = attacks.len() as u64 - counts.true_positives;
    Ok(counts)
}

/// Raw false-positive count: `detections − actual`, reported as a signed
/// difference.
pub fn raw_fp(detections: u64, actual: u64) -> i64 {
    detections as i64 - actual as i64
}

/// Exact rational for the time-based FPR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimeFpr {
    pub num: u64,
    pub den: u64,
}

impl TimeFpr {
    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn as_percent(&self) -> f64 {
        100.0 * self.as_f64()
    }
}

/// Time-based false-positive rate: `max(0, detections − actual) / windows`.
pub fn time_based_fpr(detections: u64, actual: u64, windows: u64) -> Result<TimeFpr, EvalError> {
    if windows == 0 {
        return Err(EvalError::NoWindows);
    }
    Ok(TimeFpr {
        num: detections.saturating_sub(actual),
        den: windows,
    })
}

/// Full evaluation of one detection stream.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub total_windows: u64,
    pub detections: u64,
    pub actual_attacks: u64,
    pub raw_fp: i64,
    pub timeline_tp: u64,
    pub timeline_fp: u64,
    pub timeline_fn: u64,
    pub time_based_fpr: TimeFpr,
    pub time_based_fpr_percent: f64,
    pub tolerance_windows: u64,
    pub unit_ms: u64,
}

impl EvalReport {
    pub fn build(
        detection_windows: &[u64],
        attacks: &[AttackInterval],
        total_windows: u64,
        unit_ms: u64,
        tolerance_windows: u64,
    ) -> Result<Self, EvalError> {
        let detections = detection_windows.len() as u64;
        let actual = attacks.len() as u64;
        let timeline = classify_timeline(detection_windows, attacks, unit_ms, tolerance_windows)?;
        let fpr = time_based_fpr(detections, actual, total_windows)?;
        Ok(EvalReport {
            total_windows,
            detections,
            actual_attacks: actual,
            raw_fp: raw_fp(detections, actual),
            timeline_tp: timeline.true_positives,
            timeline_fp: timeline.false_positives,
            timeline_fn: timeline.false_negatives,
            time_based_fpr: fpr,
            time_based_fpr_percent: fpr.as_percent(),
            tolerance_windows,
            unit_ms,
        })
    }

    /// Human-readable two-column table.
    pub fn render_table(&self) -> String {
        let rows = [
            ("total windows", self.total_windows.to_string()),
            ("detections", self.detections.to_string()),
            ("actual attacks", self.actual_attacks.to_string()),
            ("raw FP (det − actual)", self.raw_fp.to_string()),
            ("timeline TP", self.timeline_tp.to_string()),
            ("timeline FP", self.timeline_fp.to_string()),
            ("timeline FN", self.timeline_fn.to_string()),
            (
                "time-based FPR",
                format!(
                    "{}/{} = {:.4}%",
                    self.time_based_fpr.num,
                    self.time_based_fpr.den,
                    self.time_based_fpr_percent
                ),
            ),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<width$}  {v}\n"));
        }
        out
    }
}
