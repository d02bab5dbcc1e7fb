//! Transmit side: factor `F_DBF ≈ F_RF · Δ_TX · F_BB` under the DAC power
//! penalty plus the radiated-power term `tr(FF^H)`.

use rand::Rng;

use super::{factorize, AdmmConfig, DeltaMode, Design};
use crate::boxsolve::Penalty;
use crate::linalg::CMat;
use crate::power::PowerModel;
use crate::quant::BitRange;

/// Penalty used by the transmit Δ-step.
pub fn tx_penalty(model: &PowerModel) -> Penalty {
    Penalty { per_bit: model.p_dac, include_trace: true }
}

/// Joint DAC bit allocation and hybrid precoder design for `f_dbf` with `n_chains` RF chains.
pub fn design_tx(
    f_dbf: &CMat,
    n_chains: usize,
    gamma: f64,
    range: &BitRange,
    model: &PowerModel,
    cfg: &AdmmConfig,
    rng: &mut impl Rng,
) -> Design {
    let mode = DeltaMode::Optimize { gamma, penalty: tx_penalty(model) };
    factorize(f_dbf, n_chains, range, &mode, cfg, rng)
}

/// Precoder design with every DAC frozen at `bits` resolution.
pub fn design_tx_frozen(f_dbf: &CMat, bits: &[u32], range: &BitRange, cfg: &AdmmConfig, rng: &mut impl Rng) -> Design {
    factorize(f_dbf, bits.len(), range, &DeltaMode::Frozen(bits.to_vec()), cfg, rng)
}
