//! Differential detector: slope of the entropy progression vs. the running
//! deviation of past slopes.
//!
//! Per window the detector pushes the window's entropy into a fixed-length
//! FIFO (the progression), fits a least-squares line over it, folds the
//! slope into Welford-tracked statistics, and signals an attack when the
//! slope is *outstandingly negative* — more negative than the running
//! standard deviation of all slopes seen so far. Squaring both sides keeps
//! the check free of square roots:
//!
//! ```text
//! m < −σ   ⟺   m < 0  ∧  m²·count > Σ(mᵢ−μ)²
//! ```
//!
//! No threshold parameter exists; the deviation estimate adapts to the
//! stream.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum DetectorError {
    #[error("degenerate fit: x values are all equal")]
    DegenerateFit,
    #[error("fit needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("fit inputs differ in length: {xs} xs vs {ys} ys")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("no slope history yet; signal needs at least one recorded slope")]
    InsufficientHistory,
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
}

/// How the slope is compared against its own history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    /// `m < 0 ∧ m²·count > M2` — compares the slope against the running
    /// standard deviation σ = √(M2/count). CLI name: `algorithm1`.
    #[serde(rename = "algorithm1")]
    Variance,
    /// `m < 0 ∧ m² > M2` — compares against the raw (unnormalized) sum of
    /// squared deviations, which keeps growing with history and so gets
    /// stricter over time. CLI name: `listing`.
    #[serde(rename = "listing")]
    SumOfSquares,
}

impl CheckMode {
    pub fn cli_name(self) -> &'static str {
        match self {
            CheckMode::Variance => "algorithm1",
            CheckMode::SumOfSquares => "listing",
        }
    }
}

impl std::str::FromStr for CheckMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "algorithm1" | "variance" => Ok(CheckMode::Variance),
            "listing" | "sum-of-squares" => Ok(CheckMode::SumOfSquares),
            other => Err(format!(
                "unknown check mode {other:?} (expected algorithm1 or listing)"
            )),
        }
    }
}

impl std::fmt::Display for CheckMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.cli_name())
    }
}

/// Least-squares line through `(xs[i], ys[i])`, computed mean-first:
/// `m = (mean_x·mean_y − mean_xy) / (mean_x² − mean_xx)`.
///
/// In integer mode every mean and the final quotient truncate toward zero,
/// in exactly this operation order, so results are reproducible on any
/// platform with pure integer arithmetic.
pub fn best_fit_line<S: Scalar>(xs: &[S], ys: &[S]) -> Result<(S, S), DetectorError> {
    if xs.len() != ys.len() {
        return Err(DetectorError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(DetectorError::TooFewPoints(xs.len()));
    }
    let n = xs.len() as u64;
    let mut sum_x = S::ZERO;
    let mut sum_y = S::ZERO;
    let mut sum_xy = S::ZERO;
    let mut sum_xx = S::ZERO;
    for (&x, &y) in xs.iter().zip(ys) {
        sum_x = sum_x + x;
        sum_y = sum_y + y;
        sum_xy = sum_xy + x * y;
        sum_xx = sum_xx + x * x;
    }
    let mean_x = sum_x.div_count(n);
    let mean_y = sum_y.div_count(n);
    let mean_xy = sum_xy.div_count(n);
    let mean_xx = sum_xx.div_count(n);
    let denom = mean_x * mean_x - mean_xx;
    if denom == S::ZERO {
        return Err(DetectorError::DegenerateFit);
    }
    let m = div_scalar(mean_x * mean_y - mean_xy, denom);
    let b = mean_y - m * mean_x;
    Ok((m, b))
}

/// Slope of the best-fit line; see [`best_fit_line`].
pub fn best_fit_slope<S: Scalar>(xs: &[S], ys: &[S]) -> Result<S, DetectorError> {
    best_fit_line(xs, ys).map(|(m, _)| m)
}

// Scalar/scalar division with the mode's semantics: truncating for i128,
// exact for f64. Kept out of the Scalar trait since only the fit divides two
// scalars.
fn div_scalar<S: Scalar>(num: S, den: S) -> S {
    S::div_pair(num, den)
}

/// Fixed-capacity FIFO of the most recent window entropies, oldest first.
#[derive(Debug, Clone)]
pub struct EntropyProgression<S> {
    values: VecDeque<S>,
    capacity: usize,
}

impl<S: Scalar> EntropyProgression<S> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 2, "progression needs at least 2 entries");
        Self {
            values: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    /// Push a value, evicting the oldest when full.
    pub fn push(&mut self, value: S) {
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(value);
    }

    pub fn is_full(&self) -> bool {
        self.values.len() == self.capacity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &S> {
        self.values.iter()
    }
}

/// Welford aggregate over slopes: running mean, sum of squared deviations
/// (`M2 = count·σ²`) and count. Single-pass and stable — the recurrence
/// never forms `Σx² − N·μ²`, whose cancellation is catastrophic when the
/// mean dwarfs the deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeStats<S> {
    mean: S,
    m2: S,
    count: u64,
}

impl<S: Scalar> Default for SlopeStats<S> {
    fn default() -> Self {
        Self {
            mean: S::ZERO,
            m2: S::ZERO,
            count: 0,
        }
    }
}

impl<S: Scalar> SlopeStats<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fold in one slope. The count increments first so the first sample
    /// divides by 1; `M2` accumulates `(m − mean_curr)(m − mean_prev)`,
    /// which is nonnegative in both modes.
    pub fn update(&mut self, m: S) {
        self.count += 1;
        let mean_prev = self.mean;
        self.mean = mean_prev + (m - mean_prev).div_count(self.count);
        self.m2 = self.m2 + (m - self.mean) * (m - mean_prev);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> S {
        self.mean
    }

    /// Sum of squared deviations (numerator of the variance).
    pub fn m2(&self) -> S {
        self.m2
    }

    /// Population variance `M2 / count`; `None` before any sample.
    pub fn variance(&self) -> Option<S> {
        (self.count >= 1).then(|| self.m2.div_count(self.count))
    }
}

/// Attack check: is the slope outstandingly negative given the history?
pub fn signal<S: Scalar>(
    m: S,
    stats: &SlopeStats<S>,
    mode: CheckMode,
) -> Result<bool, DetectorError> {
    if stats.count() == 0 {
        return Err(DetectorError::InsufficientHistory);
    }
    if !m.is_negative() {
        return Ok(false);
    }
    let m_sq = m * m;
    Ok(match mode {
        CheckMode::Variance => m_sq.mul_count(stats.count()) > stats.m2(),
        CheckMode::SumOfSquares => m_sq > stats.m2(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DetectorConfig {
    /// Progression length P: how many recent entropies the line is fitted
    /// over.
    pub progression_len: usize,
    /// Minimum number of recorded slopes before a signal may fire. Early σ
    /// estimates from one or two slopes carry no information.
    pub warmup_min: u64,
    pub check_mode: CheckMode,
    /// Windows to suppress after a detection; 0 disables suppression and the
    /// detector runs continuously.
    pub cooldown_windows: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            progression_len: 5,
            warmup_min: 5,
            check_mode: CheckMode::Variance,
            cooldown_windows: 0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        if self.progression_len < 2 {
            return Err(DetectorError::InvalidConfig(format!(
                "progression length must be >= 2, got {}",
                self.progression_len
            )));
        }
        if self.warmup_min == 0 {
            return Err(DetectorError::InvalidConfig(
                "warmup_min must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// An emitted attack signal. `slope` is always negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection<S> {
    pub window_index: u64,
    pub window_start_ms: u64,
    pub slope: S,
    /// Sum of squared slope deviations at decision time (variance numerator).
    pub variance_num: S,
    /// Slope count at decision time (variance denominator).
    pub variance_den: u64,
    pub entropy: S,
    /// Intercept of the fitted line; computed by the fit but unused by the
    /// decision, kept as a diagnostic.
    #[serde(skip)]
    pub intercept: S,
}

/// Everything that happened in one detector step, for series export and
/// diagnostics. `detection` is the attack signal, if any.
#[derive(Debug, Clone, Copy)]
pub struct WindowStep<S> {
    pub window_index: u64,
    pub window_start_ms: u64,
    /// Entropy value pushed this window (the previous value for an empty
    /// window); `None` when an empty window arrives before any entropy
    /// exists.
    pub entropy: Option<S>,
    /// Slope of the fit, present once the progression is full.
    pub slope: Option<S>,
    /// (M2, count) after the Welford update, when a slope was recorded.
    pub variance: Option<(S, u64)>,
    pub detection: Option<Detection<S>>,
}

/// Sequential per-stream detector. Single-owner: the progression and slope
/// statistics are order-dependent. Independent streams run their own
/// detectors with no coordination.
#[derive(Debug, Clone)]
pub struct Detector<S> {
    config: DetectorConfig,
    progression: EntropyProgression<S>,
    stats: SlopeStats<S>,
    xs: Vec<S>,
    ys_buf: Vec<S>,
    last_entropy: Option<S>,
    cooldown_left: u64,
}

impl<S: Scalar> Detector<S> {
    pub fn new(config: DetectorConfig) -> Result<Self, DetectorError> {
        config.validate()?;
        // x-coordinates are window offsets 0..P−1; unit-time windows are
        // equispaced by construction.
        let xs = (0..config.progression_len).map(S::from_index).collect();
        Ok(Self {
            progression: EntropyProgression::new(config.progression_len),
            stats: SlopeStats::new(),
            xs,
            ys_buf: Vec::with_capacity(config.progression_len),
            last_entropy: None,
            cooldown_left: 0,
            config,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn stats(&self) -> &SlopeStats<S> {
        &self.stats
    }

    /// Advance the detector by one unit-time window.
    ///
    /// `entropy` is `None` for a window with no sampled records; the
    /// previous entropy is repeated so an idle stretch does not look like an
    /// entropy collapse. Returns what happened; `WindowStep::detection` is
    /// set iff the slope check fired.
    pub fn process_window(
        &mut self,
        window_index: u64,
        window_start_ms: u64,
        entropy: Option<S>,
    ) -> Result<WindowStep<S>, DetectorError> {
        let mut step = WindowStep {
            window_index,
            window_start_ms,
            entropy: None,
            slope: None,
            variance: None,
            detection: None,
        };
        let value = match entropy.or(self.last_entropy) {
            Some(v) => v,
            // Empty window before any entropy exists: nothing to repeat,
            // the progression clock has not started.
            None => return Ok(step),
        };
        self.last_entropy = Some(value);
        self.progression.push(value);
        step.entropy = Some(value);
        if !self.progression.is_full() {
            return Ok(step);
        }

        self.ys_buf.clear();
        self.ys_buf.extend(self.progression.iter().copied());
        let (m, b) = best_fit_line(&self.xs, &self.ys_buf)?;
        // The slope joins the statistics before being tested, so it is
        // compared against a deviation that includes itself.
        self.stats.update(m);
        step.slope = Some(m);
        step.variance = Some((self.stats.m2(), self.stats.count()));

        if self.cooldown_left > 0 {
            self.cooldown_left -= 1;
            return Ok(step);
        }
        if self.stats.count() < self.config.warmup_min {
            return Ok(step);
        }
        if signal(m, &self.stats, self.config.check_mode)? {
            step.detection = Some(Detection {
                window_index,
                window_start_ms,
                slope: m,
                variance_num: self.stats.m2(),
                variance_den: self.stats.count(),
                entropy: value,
                intercept: b,
            });
            self.cooldown_left = self.config.cooldown_windows;
        }
        Ok(step)
    }
}
