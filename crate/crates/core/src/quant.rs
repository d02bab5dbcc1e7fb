//! Additive quantization noise model (AQNM) for the DAC/ADC chains.
//!
//! A `b`-bit uniform quantizer is linearized as `Q(x) ≈ δ·x + ε` with
//! `δ(b) = sqrt(1 − κ·2^{−2b})`, `κ = π√3/2`, and per-chain noise variance
//! `δ²(1 − δ²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `π√3/2`, the constant of the Gaussian-input quantizer distortion fit.
pub const KAPPA: f64 = std::f64::consts::PI * 1.732_050_807_568_877_2 / 2.0;

/// Tolerance used when deciding whether a δ lies inside `[m, M]`.
const RANGE_SLACK: f64 = 1e-12;

/// Admissible integer resolutions `[min_bits, max_bits]` and their δ images `[m, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitRange {
    pub min_bits: u32,
    pub max_bits: u32,
}

impl Default for BitRange {
    fn default() -> Self {
        Self { min_bits: 1, max_bits: 8 }
    }
}

impl BitRange {
    pub fn new(min_bits: u32, max_bits: u32) -> Result<Self> {
        if min_bits < 1 || max_bits < min_bits {
            return Err(Error::InvalidBitRange { min: min_bits, max: max_bits });
        }
        Ok(Self { min_bits, max_bits })
    }

    /// Lower distortion bound `m = δ(min_bits)`.
    pub fn lower(&self) -> f64 {
        delta_of_bits_unchecked(self.min_bits as f64)
    }

    /// Upper distortion bound `M = δ(max_bits)`.
    pub fn upper(&self) -> f64 {
        delta_of_bits_unchecked(self.max_bits as f64)
    }

    /// Number of integer resolutions in the range.
    pub fn count(&self) -> u32 {
        self.max_bits - self.min_bits + 1
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.min_bits..=self.max_bits
    }
}

fn delta_of_bits_unchecked(b: f64) -> f64 {
    (1.0 - KAPPA * (-2.0 * b).exp2()).sqrt()
}

/// Multiplicative distortion `δ(b)`; rejects `b < 1`.
pub fn delta_of_bits(b: f64) -> Result<f64> {
    if !(b >= 1.0) {
        return Err(Error::BitsOutOfDomain(b));
    }
    Ok(delta_of_bits_unchecked(b))
}

/// Exact inverse of [`delta_of_bits`]: `b = −½·log2(2(1−d²)/(π√3))`.
pub fn bits_of_delta(d: f64, range: &BitRange) -> Result<f64> {
    let (lo, hi) = (range.lower(), range.upper());
    if !(d >= lo - RANGE_SLACK && d <= hi + RANGE_SLACK) {
        return Err(Error::DeltaOutOfRange { value: d, lower: lo, upper: hi });
    }
    Ok(bits_of_delta_unchecked(d))
}

fn bits_of_delta_unchecked(d: f64) -> f64 {
    -0.5 * ((1.0 - d * d) / KAPPA).log2()
}

/// Rounds continuous distortion entries to integer resolutions, half-up, clamped to the range.
///
/// A `1e-9` nudge makes exact half-way points (which the δ round trip only
/// reproduces to ~1e-15) land on the upper integer.
pub fn quantize_bits(deltas: &[f64], range: &BitRange) -> Vec<u32> {
    let (lo, hi) = (range.lower(), range.upper());
    deltas
        .iter()
        .map(|&d| {
            let b = bits_of_delta_unchecked(d.clamp(lo, hi));
            let rounded = (b + 0.5 + 1e-9).floor();
            (rounded as i64).clamp(range.min_bits as i64, range.max_bits as i64) as u32
        })
        .collect()
}

/// Distortion diagonal `δ(b_i)` for integer resolutions.
pub fn deltas_of_bits(bits: &[u32]) -> Vec<f64> {
    bits.iter().map(|&b| delta_of_bits_unchecked(b.max(1) as f64)).collect()
}

/// Quantization-noise covariance diagonal `(1 − κ4^{−b})·κ4^{−b}` for integer resolutions.
pub fn noise_cov(bits: &[u32]) -> Vec<f64> {
    bits.iter()
        .map(|&b| {
            let t = KAPPA * (-2.0 * b as f64).exp2();
            (1.0 - t) * t
        })
        .collect()
}

/// Same covariance expressed through δ: `δ²(1 − δ²)`.
pub fn noise_cov_from_delta(deltas: &[f64]) -> Vec<f64> {
    deltas.iter().map(|&d| d * d * (1.0 - d * d)).collect()
}

/// `2^b` recovered from δ, i.e. `sqrt(π√3 / (2(1 − δ²)))`; `None` when `δ ≥ 1`.
pub fn two_pow_bits_of_delta(d: f64) -> Option<f64> {
    let gap = 1.0 - d * d;
    (gap > 0.0).then(|| (KAPPA / gap).sqrt())
}
