//! Arithmetic abstraction letting the detector and baseline run either on
//! `f64` (floating-point entropies) or on `i128` (integer-only scaled
//! entropies, where every division truncates toward zero).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::Serialize;

pub trait Scalar:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + fmt::Debug
    + fmt::Display
    + Serialize
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;

    /// Division by a positive count. Truncates toward zero in integer mode,
    /// matching `int(a / b)` semantics of the integer-only formulation.
    fn div_count(self, count: u64) -> Self;

    /// Multiplication by a count.
    fn mul_count(self, count: u64) -> Self;

    /// Scalar-by-scalar division; truncates toward zero in integer mode.
    /// The caller guarantees a nonzero divisor.
    fn div_pair(num: Self, den: Self) -> Self;

    fn from_index(i: usize) -> Self;

    /// Lossy view for human-facing output (sigma columns and summaries).
    fn to_f64(self) -> f64;

    fn is_negative(self) -> bool {
        self < Self::ZERO
    }
}

impl Scalar for f64 {
    const ZERO: f64 = 0.0;

    fn div_count(self, count: u64) -> f64 {
        self / count as f64
    }

    fn mul_count(self, count: u64) -> f64 {
        self * count as f64
    }

    fn div_pair(num: f64, den: f64) -> f64 {
        num / den
    }

    fn from_index(i: usize) -> f64 {
        i as f64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for i128 {
    const ZERO: i128 = 0;

    fn div_count(self, count: u64) -> i128 {
        // Rust integer division truncates toward zero, same as int().
        self / count as i128
    }

    fn mul_count(self, count: u64) -> i128 {
        self * count as i128
    }

    fn div_pair(num: i128, den: i128) -> i128 {
        num / den
    }

    fn from_index(i: usize) -> i128 {
        i as i128
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}
