//! Three-factor beamformers `RF · Δ · BB` with their converter resolutions.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::power::{self, Architecture, PowerModel};
use crate::quant;

/// Analog matrix, distortion diagonal, baseband matrix and the integer
/// resolutions behind the diagonal.
///
/// The same type serves as precoder (`F_RF Δ_TX F_BB`) and combiner
/// (`W_RF Δ_RX W_BB`).
#[derive(Debug, Clone, PartialEq)]
pub struct HybridFactors {
    pub rf: CMat,
    pub delta: Vec<f64>,
    pub bb: CMat,
    pub bits: Vec<u32>,
    pub arch: Architecture,
}

pub type HybridPrecoder = HybridFactors;
pub type HybridCombiner = HybridFactors;

impl HybridFactors {
    pub fn new(rf: CMat, bits: Vec<u32>, bb: CMat) -> Result<Self> {
        let delta = quant::deltas_of_bits(&bits);
        let out = Self { rf, delta, bb, bits, arch: Architecture::Hybrid };
        out.check()?;
        Ok(out)
    }

    /// Fully digital beamformer: identity "analog" stage, one converter per
    /// antenna at `bits` resolution, `BB = target / δ` so the product equals `target`.
    pub fn fully_digital(target: &CMat, bits: u32) -> Self {
        let n = target.nrows();
        let d = quant::deltas_of_bits(&[bits])[0];
        Self {
            rf: CMat::identity(n, n),
            delta: vec![d; n],
            bb: target.unscale(d),
            bits: vec![bits; n],
            arch: Architecture::FullyDigital,
        }
    }

    pub fn check(&self) -> Result<()> {
        let l = self.delta.len();
        if self.rf.ncols() != l || self.bb.nrows() != l || self.bits.len() != l {
            return Err(Error::Dimension(format!(
                "RF {}x{}, Δ {}, BB {}x{}, bits {}",
                self.rf.nrows(),
                self.rf.ncols(),
                l,
                self.bb.nrows(),
                self.bb.ncols(),
                self.bits.len()
            )));
        }
        Ok(())
    }

    /// `RF · Δ · BB`.
    pub fn product(&self) -> CMat {
        linalg::triple_product(&self.rf, &self.delta, &self.bb)
    }

    pub fn n_antennas(&self) -> usize {
        self.rf.nrows()
    }

    pub fn n_chains(&self) -> usize {
        self.delta.len()
    }

    pub fn n_streams(&self) -> usize {
        self.bb.ncols()
    }

    /// Quantization noise covariance diagonal of the converters.
    pub fn noise_cov(&self) -> Vec<f64> {
        quant::noise_cov_from_delta(&self.delta)
    }

    pub fn tx_power(&self, model: &PowerModel) -> Result<f64> {
        let trace = linalg::frob_sq(&self.product());
        power::tx_power(model, self.arch, self.n_antennas(), &self.delta, trace)
    }

    pub fn rx_power(&self, model: &PowerModel) -> Result<f64> {
        power::rx_power(model, self.arch, self.n_antennas(), &self.delta)
    }

    /// Mean converter resolution.
    pub fn mean_bits(&self) -> f64 {
        self.bits.iter().map(|&b| b as f64).sum::<f64>() / self.bits.len().max(1) as f64
    }
}
