//! Threshold-based comparison framework: bidirectional short/long-term
//! entropies checked against dynamic running-mean thresholds.
//!
//! Per direction (source and destination) the framework tracks a
//! short-term entropy (the current window) and a long-term entropy (the
//! merged frequency tables of the last `L` windows before the current
//! one). Each of the four entropies has a dynamic threshold: the running
//! mean of all its past values. A decision strategy is a boolean over
//! "entropy < its threshold" comparisons:
//!
//! ```text
//! S1 = dst_ste < dst_stthr  ∧  dst_lte < dst_ltthr
//! S2 = src_ste < src_stthr  ∧  src_lte < src_ltthr
//! S3 = dst_ste < dst_stthr  ∧  src_lte < src_ltthr
//! S4 = dst_ste < dst_stthr
//! S5 = src_ste < src_stthr
//! S6 = dst_lte < dst_ltthr
//! S7 = src_lte < src_ltthr
//! ```
//!
//! Thresholds are evaluated before the current window's entropies are
//! folded in, so a window is never compared against itself.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::entropy::{EntropyError, FrequencyTable};
use crate::ingestion::WindowAccumulator;
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("threshold not ready: no past values ingested yet")]
    NotReady,
    #[error("invalid baseline config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// The seven decision strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::S1,
        Strategy::S2,
        Strategy::S3,
        Strategy::S4,
        Strategy::S5,
        Strategy::S6,
        Strategy::S7,
    ];
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Strategy::S1),
            "S2" => Ok(Strategy::S2),
            "S3" => Ok(Strategy::S3),
            "S4" => Ok(Strategy::S4),
            "S5" => Ok(Strategy::S5),
            "S6" => Ok(Strategy::S6),
            "S7" => Ok(Strategy::S7),
            other => Err(format!("unknown strategy {other:?} (expected S1..S7)")),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S{}", *self as u8 + 1)
    }
}

/// Running mean of all past values (the `k = ∞` moving average).
///
/// The below-threshold comparison is done as `value·count < sum`, which is
/// exact in integer mode and division-free in both.
#[derive(Debug, Clone, Copy)]
pub struct RunningMeanThreshold<S> {
    sum: S,
    count: u64,
}

impl<S: Scalar> Default for RunningMeanThreshold<S> {
    fn default() -> Self {
        Self {
            sum: S::ZERO,
            count: 0,
        }
    }
}

impl<S: Scalar> RunningMeanThreshold<S> {
    pub fn ingest(&mut self, value: S) {
        self.sum = self.sum + value;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> S {
        self.sum
    }

    /// Current threshold `sum / count`; truncates in integer mode, so
    /// prefer [`RunningMeanThreshold::is_below`] for decisions.
    pub fn current(&self) -> Option<S> {
        (self.count >= 1).then(|| self.sum.div_count(self.count))
    }

    /// Exact strict comparison `value < sum / count`.
    pub fn is_below(&self, value: S) -> Result<bool, BaselineError> {
        if self.count == 0 {
            return Err(BaselineError::NotReady);
        }
        Ok(value.mul_count(self.count) < self.sum)
    }
}

/// The four entropies of one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionalEntropies<S> {
    pub dst_ste: S,
    pub dst_lte: S,
    pub src_ste: S,
    pub src_lte: S,
}

/// The four running-mean thresholds.
#[derive(Debug, Clone)]
pub struct Thresholds<S> {
    pub dst_st: RunningMeanThreshold<S>,
    pub dst_lt: RunningMeanThreshold<S>,
    pub src_st: RunningMeanThreshold<S>,
    pub src_lt: RunningMeanThreshold<S>,
}

impl<S: Scalar> Default for Thresholds<S> {
    fn default() -> Self {
        Thresholds {
            dst_st: RunningMeanThreshold::default(),
            dst_lt: RunningMeanThreshold::default(),
            src_st: RunningMeanThreshold::default(),
            src_lt: RunningMeanThreshold::default(),
        }
    }
}

impl<S: Scalar> Thresholds<S> {
    fn ingest(&mut self, e: &DirectionalEntropies<S>) {
        self.dst_st.ingest(e.dst_ste);
        self.dst_lt.ingest(e.dst_lte);
        self.src_st.ingest(e.src_ste);
        self.src_lt.ingest(e.src_lte);
    }

    fn all_ready(&self) -> bool {
        self.dst_st.count() >= 1
            && self.dst_lt.count() >= 1
            && self.src_st.count() >= 1
            && self.src_lt.count() >= 1
    }
}

/// Evaluate one strategy. Only the thresholds the strategy references need
/// to be ready; an undefined referenced threshold is `NotReady`.
pub fn evaluate_strategy<S: Scalar>(
    strategy: Strategy,
    entropies: &DirectionalEntropies<S>,
    thresholds: &Thresholds<S>,
) -> Result<bool, BaselineError> {
    let dst_st = || thresholds.dst_st.is_below(entropies.dst_ste);
    let dst_lt = || thresholds.dst_lt.is_below(entropies.dst_lte);
    let src_st = || thresholds.src_st.is_below(entropies.src_ste);
    let src_lt = || thresholds.src_lt.is_below(entropies.src_lte);
    Ok(match strategy {
        Strategy::S1 => dst_st()? && dst_lt()?,
        Strategy::S2 => src_st()? && src_lt()?,
        Strategy::S3 => dst_st()? && src_lt()?,
        Strategy::S4 => dst_st()?,
        Strategy::S5 => src_st()?,
        Strategy::S6 => dst_lt()?,
        Strategy::S7 => src_lt()?,
    })
}

/// What one baseline step produced.
#[derive(Debug, Clone, Copy)]
pub struct BaselineStep<S> {
    pub window_index: u64,
    pub window_start_ms: u64,
    /// `None` while warming up (thresholds or history not ready).
    pub entropies: Option<DirectionalEntropies<S>>,
    pub fired: bool,
}

/// Per-stream baseline state: history FIFOs and the four thresholds.
///
/// Sequential and single-owner, same contract as the detector.
pub struct BaselineState<S> {
    strategy: Strategy,
    long_depth: usize,
    eval: Box<dyn Fn(&FrequencyTable) -> Result<S, EntropyError> + Send + Sync>,
    dst_history: VecDeque<FrequencyTable>,
    src_history: VecDeque<FrequencyTable>,
    thresholds: Thresholds<S>,
}

impl<S: Scalar> BaselineState<S> {
    /// `eval` computes the configured entropy of a table; `long_depth` is
    /// the number of past windows merged into the long-term entropy.
    pub fn new(
        strategy: Strategy,
        long_depth: usize,
        eval: impl Fn(&FrequencyTable) -> Result<S, EntropyError> + Send + Sync + 'static,
    ) -> Result<Self, BaselineError> {
        if long_depth == 0 {
            return Err(BaselineError::InvalidConfig(
                "long-term depth must be >= 1".into(),
            ));
        }
        Ok(Self {
            strategy,
            long_depth,
            eval: Box::new(eval),
            dst_history: VecDeque::new(),
            src_history: VecDeque::new(),
            thresholds: Thresholds::default(),
        })
    }

    pub fn thresholds(&self) -> &Thresholds<S> {
        &self.thresholds
    }

    /// Advance by one window.
    ///
    /// Empty windows are skipped entirely: with no records there is no
    /// distribution, so neither entropies nor thresholds move.
    ///
    /// Order within a step: compute short-term entropies of the current
    /// window and long-term entropies over the previous `L` windows;
    /// evaluate the strategy against the thresholds as they were before
    /// this window; then ingest the four entropies and push the window
    /// into the history.
    pub fn update(&mut self, window: &WindowAccumulator) -> Result<BaselineStep<S>, BaselineError> {
        let mut step = BaselineStep {
            window_index: window.window_index,
            window_start_ms: window.window_start_ms(),
            entropies: None,
            fired: false,
        };
        if window.is_empty() {
            return Ok(step);
        }
        let dst_ste = (self.eval)(&window.dst_table)?;
        let src_ste = (self.eval)(&window.src_table)?;
        let long = |hist: &VecDeque<FrequencyTable>| -> Result<Option<S>, EntropyError> {
            if hist.is_empty() {
                return Ok(None);
            }
            (self.eval)(&FrequencyTable::merged(hist)).map(Some)
        };
        let dst_lte = long(&self.dst_history)?;
        let src_lte = long(&self.src_history)?;

        if let (Some(dst_lte), Some(src_lte)) = (dst_lte, src_lte) {
            let entropies = DirectionalEntropies {
                dst_ste,
                dst_lte,
                src_ste,
                src_lte,
            };
            // Warm-up gate: every threshold has history and the long-term
            // FIFO is populated before anything may fire.
            if self.thresholds.all_ready() {
                step.fired = evaluate_strategy(self.strategy, &entropies, &self.thresholds)?;
                step.entropies = Some(entropies);
            }
            self.thresholds.ingest(&entropies);
        }

        self.dst_history.push_back(window.dst_table.clone());
        self.src_history.push_back(window.src_table.clone());
        if self.dst_history.len() > self.long_depth {
            self.dst_history.pop_front();
            self.src_history.pop_front();
        }
        Ok(step)
    }
}
