//! Transmitter and receiver power-consumption model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quant;

/// Power constants in watts. Defaults are the typical mmWave values used
/// throughout the experiments (100 mW per converter bit step, 10 W circuit
/// power, 10 mW per phase shifter, 100 mW per antenna element).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerModel {
    pub p_dac: f64,
    pub p_adc: f64,
    pub p_ct: f64,
    pub p_cr: f64,
    pub p_pt: f64,
    pub p_pr: f64,
    pub p_t: f64,
    pub p_r: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self { p_dac: 0.1, p_adc: 0.1, p_ct: 10.0, p_cr: 10.0, p_pt: 0.01, p_pr: 0.01, p_t: 0.1, p_r: 0.1 }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_dac", self.p_dac),
            ("p_adc", self.p_adc),
            ("p_ct", self.p_ct),
            ("p_cr", self.p_cr),
            ("p_pt", self.p_pt),
            ("p_pr", self.p_pr),
            ("p_t", self.p_t),
            ("p_r", self.p_r),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("power.{name} must be strictly positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Beamforming architecture, which decides whether the phase-shifter network draws power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    /// Analog phase-shifter network plus `L` RF chains.
    Hybrid,
    /// One RF chain per antenna, no analog network.
    FullyDigital,
}

/// `Σ per_bit · 2^{b_i}` for integer resolutions.
pub fn converter_power_bits(bits: &[u32], per_bit: f64) -> f64 {
    bits.iter().map(|&b| per_bit * (b as f64).exp2()).sum()
}

/// Converter power from continuous δ entries through `2^b = sqrt(π√3 / (2(1 − δ²)))`.
pub fn converter_power_delta(deltas: &[f64], per_bit: f64) -> Result<f64> {
    deltas.iter().try_fold(0.0, |acc, &d| {
        let two_b =
            quant::two_pow_bits_of_delta(d).ok_or(Error::DeltaOutOfRange { value: d, lower: 0.0, upper: 1.0 })?;
        Ok(acc + per_bit * two_b)
    })
}

/// Transmit power: `tr(FF^H) + P_DT(Δ) + N·P_T + N·L·P_PT + P_CT`.
///
/// `deltas` has one entry per RF chain (`L = deltas.len()`); the phase-shifter
/// term is dropped for the fully digital architecture.
pub fn tx_power(
    model: &PowerModel,
    arch: Architecture,
    n_antennas: usize,
    deltas: &[f64],
    precoder_trace: f64,
) -> Result<f64> {
    let n = n_antennas as f64;
    let l = deltas.len() as f64;
    let shifters = match arch {
        Architecture::Hybrid => n * l * model.p_pt,
        Architecture::FullyDigital => 0.0,
    };
    Ok(precoder_trace + converter_power_delta(deltas, model.p_dac)? + n * model.p_t + shifters + model.p_ct)
}

/// Receive power: `P_DR(Δ) + N·P_R + N·L·P_PR + P_CR`.
pub fn rx_power(model: &PowerModel, arch: Architecture, n_antennas: usize, deltas: &[f64]) -> Result<f64> {
    let n = n_antennas as f64;
    let l = deltas.len() as f64;
    let shifters = match arch {
        Architecture::Hybrid => n * l * model.p_pr,
        Architecture::FullyDigital => 0.0,
    };
    Ok(converter_power_delta(deltas, model.p_adc)? + n * model.p_r + shifters + model.p_cr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quant::deltas_of_bits;

    fn close(a: f64, b: f64) -> bool {
        ((a - b) / b.abs().max(1.0)).abs() < 1e-9
    }

    #[test]
    fn converter_examples() {
        assert!(close(converter_power_bits(&[1; 5], 0.1), 1.0));
        assert!(close(converter_power_bits(&[8; 5], 0.1), 128.0));
        assert_eq!(converter_power_bits(&[], 0.1), 0.0);
        assert!(converter_power_delta(&[1.0], 0.1).is_err());
    }

    #[test]
    fn tx_examples() {
        let m = PowerModel::default();
        let p8 = tx_power(&m, Architecture::Hybrid, 32, &deltas_of_bits(&[8; 5]), 5.0).unwrap();
        assert!(close(p8, 147.8), "{p8}");
        let p1 = tx_power(&m, Architecture::Hybrid, 32, &deltas_of_bits(&[1; 5]), 5.0).unwrap();
        assert!(close(p1, 20.8), "{p1}");
        let p0 = tx_power(&m, Architecture::Hybrid, 32, &deltas_of_bits(&[1; 5]), 0.0).unwrap();
        assert!(close(p0, 15.8), "{p0}");
    }

    #[test]
    fn rx_examples() {
        let m = PowerModel::default();
        let p8 = rx_power(&m, Architecture::Hybrid, 5, &deltas_of_bits(&[8; 5])).unwrap();
        assert!(close(p8, 138.75), "{p8}");
        let p1 = rx_power(&m, Architecture::Hybrid, 5, &deltas_of_bits(&[1; 5])).unwrap();
        assert!(close(p1, 11.75), "{p1}");
    }

    #[test]
    fn digital_drops_phase_shifters() {
        let m = PowerModel::default();
        let d = deltas_of_bits(&[8; 32]);
        let p = tx_power(&m, Architecture::FullyDigital, 32, &d, 5.0).unwrap();
        // 819.2 W of DACs dominates
        assert!(close(p, 5.0 + 819.2 + 3.2 + 10.0), "{p}");
    }

    #[test]
    fn validate_rejects_nonpositive() {
        assert!(PowerModel { p_cr: 0.0, ..Default::default() }.validate().is_err());
        assert!(PowerModel { p_dac: f64::NAN, ..Default::default() }.validate().is_err());
        assert!(PowerModel::default().validate().is_ok());
    }
}
