//! Streaming DoS-attack detection from the differential of a generalized
//! entropy progression.
//!
//! A flood concentrates traffic on few destinations, which collapses the
//! entropy of the per-window destination distribution. Instead of comparing
//! entropies against tuned thresholds, this library fits a line to the last
//! few window entropies and signals an attack when the slope is more
//! negative than the running standard deviation of all slopes — a
//! threshold-free, constant-memory check that works on integer-only
//! arithmetic and on a small sample of the flow.
//!
//! The pieces, bottom up:
//!
//! - [`entropy`]: Shannon / Renyi / Tsallis over per-window frequency
//!   tables, plus the integer-only scaled Tsallis.
//! - [`detector`]: entropy progression, best-fit slope, Welford slope
//!   statistics, and the attack check.
//! - [`ingestion`]: flow-CSV parsing, Bernoulli sampling, unit-time
//!   windowing.
//! - [`baseline`]: the bidirectional short/long-term entropy comparison
//!   framework with running-mean thresholds and strategies S1–S7.
//! - [`evaluation`]: scoring detections against ground-truth attack
//!   intervals (raw counts, timeline overlap, time-based FPR).
//! - [`trafficgen`]: deterministic synthetic corpora with ground truth.
//! - [`pipeline`]: end-to-end runs wiring the above together.
//!
//! Built with the `parallel` feature (default), batch entropy evaluation,
//! corpus generation and multi-run sweeps use rayon; without it everything
//! runs sequentially. Results are identical either way.

pub mod baseline;
pub mod detector;
pub mod entropy;
pub mod evaluation;
pub mod ingestion;
pub mod pipeline;
pub mod scalar;
pub mod trafficgen;

pub use detector::{
    best_fit_line, best_fit_slope, CheckMode, Detection, Detector, DetectorConfig, DetectorError,
    EntropyProgression, SlopeStats,
};
pub use entropy::{
    renyi, shannon, tsallis, tsallis_int_scaled, EntropyError, EntropyMeasure, FrequencyTable,
};
pub use scalar::Scalar;
