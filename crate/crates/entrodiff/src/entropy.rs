//! Generalized entropy measures over per-window frequency tables.
//!
//! A window's traffic is reduced to a [`FrequencyTable`]: counts `f_i` per
//! flow key (an address string) with `n = Σ f_i`. Probabilities are
//! `p_i = f_i / n`. Three measures are supported in floating point
//! (Shannon, Renyi of order `α`, Tsallis of order `q`) plus an
//! integer-only scaled Tsallis that avoids floating point entirely:
//!
//! ```text
//! scaled = floor( precision · (n^q − Σ f_i^q) / ((q−1) · n^q) )
//! ```
//!
//! which is `floor(precision · S_q)` with `S_q = (1 − Σ p_i^q) / (q − 1)`.
//! The `(q−1)` divisor keeps the value nonnegative for `q > 1`, so a flood
//! concentrating traffic on one destination drives the value toward zero.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// Per-window counts of flow-key occurrences.
///
/// Zero-count keys are never stored, so the number of keys is the support
/// size of the empirical distribution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one occurrence of `key`.
    pub fn increment(&mut self, key: &str) {
        self.add(key, 1);
    }

    /// Record `by` occurrences of `key`. A zero increment is a no-op so the
    /// no-zero-counts invariant holds.
    pub fn add(&mut self, key: &str, by: u64) {
        if by == 0 {
            return;
        }
        if let Some(c) = self.counts.get_mut(key) {
            *c += by;
        } else {
            self.counts.insert(key.to_owned(), by);
        }
        self.total += by;
    }

    /// Fold another table's counts into this one.
    pub fn merge_from(&mut self, other: &FrequencyTable) {
        for (key, &count) in &other.counts {
            self.add(key, count);
        }
    }

    /// Union of several tables (used for long-horizon entropies).
    pub fn merged<'a>(tables: impl IntoIterator<Item = &'a FrequencyTable>) -> FrequencyTable {
        let mut out = FrequencyTable::new();
        for t in tables {
            out.merge_from(t);
        }
        out
    }

    /// Total observations `n`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct keys (support size).
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Counts in ascending order. Entropy only depends on the multiset of
    /// counts, and summing in sorted order makes the floating-point results
    /// independent of hash-map iteration order.
    pub fn sorted_counts(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.counts.values().copied().collect();
        v.sort_unstable();
        v
    }
}

impl<'a> FromIterator<(&'a str, u64)> for FrequencyTable {
    fn from_iter<I: IntoIterator<Item = (&'a str, u64)>>(iter: I) -> Self {
        let mut t = FrequencyTable::new();
        for (k, c) in iter {
            t.add(k, c);
        }
        t
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum EntropyError {
    /// The window contained no sampled records; there is no distribution to
    /// measure. Callers decide what to do (the detector repeats the previous
    /// value rather than fabricating an entropy of zero).
    #[error("empty window: no records to compute an entropy over")]
    EmptyWindow,
    #[error("invalid entropy parameter: {0}")]
    InvalidParameter(String),
    /// Fixed-width scaled Tsallis overflowed. The wide (big-integer) path
    /// never reports this.
    #[error("integer overflow in fixed-width scaled Tsallis (n={n}, q={q})")]
    Overflow { n: u64, q: u32 },
}

/// Shannon entropy `−Σ p_i ln p_i` in natural-log units.
pub fn shannon(ft: &FrequencyTable) -> Result<f64, EntropyError> {
    if ft.is_empty() {
        return Err(EntropyError::EmptyWindow);
    }
    let n = ft.total() as f64;
    let mut acc = 0.0_f64;
    for c in ft.sorted_counts() {
        let p = c as f64 / n;
        acc -= p * p.ln();
    }
    // A point mass produces an exact 0; tiny negative rounding is clamped so
    // the 0 ≤ H ≤ ln(distinct) contract holds.
    Ok(acc.max(0.0))
}

/// Renyi entropy of order `α`: `(1/(1−α)) ln Σ p_i^α`, `α ≥ 0`, `α ≠ 1`.
///
/// For `α = 0` only stored (nonzero-probability) keys contribute, so the
/// value is `ln(distinct)` — Hartley entropy of the support.
pub fn renyi(ft: &FrequencyTable, alpha: f64) -> Result<f64, EntropyError> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(EntropyError::InvalidParameter(format!(
            "Renyi alpha must be finite and >= 0, got {alpha}"
        )));
    }
    if alpha == 1.0 {
        return Err(EntropyError::InvalidParameter(
            "Renyi alpha must not equal 1".into(),
        ));
    }
    if ft.is_empty() {
        return Err(EntropyError::EmptyWindow);
    }
    let n = ft.total() as f64;
    let mut sum = 0.0_f64;
    for c in ft.sorted_counts() {
        let p = c as f64 / n;
        sum += p.powf(alpha);
    }
    Ok(sum.ln() / (1.0 - alpha))
}

/// Tsallis entropy `(1 − Σ p_i^q) / (q − 1)`, `q ≠ 1`.
///
/// The divisor is `(q − 1)`, not `(1 − q)`, so the value is nonnegative for
/// `q > 1` and decreases as traffic concentrates on one key.
pub fn tsallis(ft: &FrequencyTable, q: f64) -> Result<f64, EntropyError> {
    if !q.is_finite() {
        return Err(EntropyError::InvalidParameter(format!(
            "Tsallis q must be finite, got {q}"
        )));
    }
    if q == 1.0 {
        return Err(EntropyError::InvalidParameter(
            "Tsallis q must not equal 1".into(),
        ));
    }
    if ft.is_empty() {
        return Err(EntropyError::EmptyWindow);
    }
    let n = ft.total() as f64;
    let mut sum = 0.0_f64;
    for c in ft.sorted_counts() {
        let p = c as f64 / n;
        sum += p.powf(q);
    }
    Ok((1.0 - sum) / (q - 1.0))
}

/// Integer-only scaled Tsallis entropy:
/// `floor(precision · (n^q − Σ f_i^q) / ((q−1) · n^q))`.
///
/// All arithmetic is exact. A 128-bit fast path is used while every
/// intermediate fits; otherwise the computation falls back to big integers,
/// so this function never overflows. The result is at most
/// `precision / (q − 1)` and fits comfortably in `u64`.
pub fn tsallis_int_scaled(ft: &FrequencyTable, q: u32, precision: u64) -> Result<u64, EntropyError> {
    validate_scaled_params(q, precision)?;
    if ft.is_empty() {
        return Err(EntropyError::EmptyWindow);
    }
    match scaled_u128(ft, q, precision) {
        Some(v) => Ok(v),
        None => Ok(scaled_big(ft, q, precision)),
    }
}

/// Fixed-width variant of [`tsallis_int_scaled`].
///
/// Computes in checked 128-bit arithmetic and reports
/// [`EntropyError::Overflow`] instead of falling back to big integers.
/// Valid whenever `precision · n^q` fits in 128 bits; with the default
/// `precision = 10^6` that covers `n` up to roughly `10^6` for `q = 5` and
/// `10^4` for `q = 8`.
pub fn tsallis_int_scaled_fixed(
    ft: &FrequencyTable,
    q: u32,
    precision: u64,
) -> Result<u64, EntropyError> {
    validate_scaled_params(q, precision)?;
    if ft.is_empty() {
        return Err(EntropyError::EmptyWindow);
    }
    scaled_u128(ft, q, precision).ok_or(EntropyError::Overflow { n: ft.total(), q })
}

fn validate_scaled_params(q: u32, precision: u64) -> Result<(), EntropyError> {
    if q < 2 {
        return Err(EntropyError::InvalidParameter(format!(
            "scaled Tsallis q must be an integer >= 2, got {q}"
        )));
    }
    if precision == 0 {
        return Err(EntropyError::InvalidParameter(
            "precision must be >= 1".into(),
        ));
    }
    Ok(())
}

fn scaled_u128(ft: &FrequencyTable, q: u32, precision: u64) -> Option<u64> {
    let n = ft.total() as u128;
    let nq = checked_pow_u128(n, q)?;
    let mut sum: u128 = 0;
    for (_, c) in ft.iter() {
        sum = sum.checked_add(checked_pow_u128(c as u128, q)?)?;
    }
    // Σ f_i^q ≤ (Σ f_i)^q, so the subtraction cannot underflow.
    let num = (precision as u128).checked_mul(nq - sum)?;
    let den = (q as u128 - 1).checked_mul(nq)?;
    Some((num / den) as u64)
}

fn scaled_big(ft: &FrequencyTable, q: u32, precision: u64) -> u64 {
    let nq = BigUint::from(ft.total()).pow(q);
    let mut sum = BigUint::default();
    for (_, c) in ft.iter() {
        sum += BigUint::from(c).pow(q);
    }
    let num = BigUint::from(precision) * (&nq - &sum);
    let den = BigUint::from(q as u64 - 1) * &nq;
    let v = num / den;
    // Bounded by precision / (q − 1).
    v.try_into().expect("scaled entropy exceeds u64")
}

fn checked_pow_u128(base: u128, exp: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// The entropy measure a pipeline runs with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EntropyMeasure {
    Shannon,
    Renyi { alpha: f64 },
    Tsallis { q: u32 },
    TsallisIntScaled { q: u32, precision: u64 },
}

impl EntropyMeasure {
    pub fn shannon() -> Self {
        EntropyMeasure::Shannon
    }

    pub fn renyi(alpha: f64) -> Result<Self, EntropyError> {
        if !alpha.is_finite() || alpha < 0.0 || alpha == 1.0 {
            return Err(EntropyError::InvalidParameter(format!(
                "Renyi alpha must be >= 0 and != 1, got {alpha}"
            )));
        }
        Ok(EntropyMeasure::Renyi { alpha })
    }

    pub fn tsallis(q: u32) -> Result<Self, EntropyError> {
        if q < 2 {
            return Err(EntropyError::InvalidParameter(format!(
                "Tsallis q must be an integer >= 2, got {q}"
            )));
        }
        Ok(EntropyMeasure::Tsallis { q })
    }

    pub fn tsallis_int_scaled(q: u32, precision: u64) -> Result<Self, EntropyError> {
        validate_scaled_params(q, precision)?;
        Ok(EntropyMeasure::TsallisIntScaled { q, precision })
    }

    /// True for the integer-only measure; such pipelines run entirely on
    /// integer arithmetic.
    pub fn is_integer(&self) -> bool {
        matches!(self, EntropyMeasure::TsallisIntScaled { .. })
    }

    pub fn validate(&self) -> Result<(), EntropyError> {
        match *self {
            EntropyMeasure::Shannon => Ok(()),
            EntropyMeasure::Renyi { alpha } => Self::renyi(alpha).map(|_| ()),
            EntropyMeasure::Tsallis { q } => Self::tsallis(q).map(|_| ()),
            EntropyMeasure::TsallisIntScaled { q, precision } => {
                validate_scaled_params(q, precision)
            }
        }
    }

    /// Evaluate a floating-point measure. The integer-only measure is
    /// rejected here; use [`EntropyMeasure::evaluate_scaled`] for it.
    pub fn evaluate_f64(&self, ft: &FrequencyTable) -> Result<f64, EntropyError> {
        match *self {
            EntropyMeasure::Shannon => shannon(ft),
            EntropyMeasure::Renyi { alpha } => renyi(ft, alpha),
            EntropyMeasure::Tsallis { q } => tsallis(ft, q as f64),
            EntropyMeasure::TsallisIntScaled { .. } => Err(EntropyError::InvalidParameter(
                "integer-scaled measure has no floating-point evaluation".into(),
            )),
        }
    }

    /// Evaluate the integer-only measure.
    pub fn evaluate_scaled(&self, ft: &FrequencyTable) -> Result<u64, EntropyError> {
        match *self {
            EntropyMeasure::TsallisIntScaled { q, precision } => {
                tsallis_int_scaled(ft, q, precision)
            }
            _ => Err(EntropyError::InvalidParameter(
                "only the integer-scaled measure evaluates to a scaled integer".into(),
            )),
        }
    }
}

impl fmt::Display for EntropyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropyMeasure::Shannon => write!(f, "shannon"),
            EntropyMeasure::Renyi { alpha } => write!(f, "renyi({alpha})"),
            EntropyMeasure::Tsallis { q } => write!(f, "tsallis({q})"),
            EntropyMeasure::TsallisIntScaled { q, precision } => {
                write!(f, "tsallis-int({q},{precision})")
            }
        }
    }
}

/// Evaluate a floating-point measure over many tables.
///
/// With the `parallel` feature the tables are mapped with rayon; each table
/// is pure and independent, so the output is identical either way.
pub fn batch_f64(
    measure: EntropyMeasure,
    tables: &[FrequencyTable],
    parallel: bool,
) -> Result<Vec<f64>, EntropyError> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return tables.par_iter().map(|t| measure.evaluate_f64(t)).collect();
    }
    let _ = parallel;
    tables.iter().map(|t| measure.evaluate_f64(t)).collect()
}

/// Scaled-integer counterpart of [`batch_f64`].
pub fn batch_scaled(
    measure: EntropyMeasure,
    tables: &[FrequencyTable],
    parallel: bool,
) -> Result<Vec<u64>, EntropyError> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return tables
            .par_iter()
            .map(|t| measure.evaluate_scaled(t))
            .collect();
    }
    let _ = parallel;
    tables.iter().map(|t| measure.evaluate_scaled(t)).collect()
}
