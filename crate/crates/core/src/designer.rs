//! The proposed scheme end to end: digital reference → transmit ADMM →
//! effective channel → receive ADMM → link metrics.

use serde::{Deserialize, Serialize};

use crate::admm::{self, rx, tx, AdmmConfig, Design};
use crate::beamformer::HybridFactors;
use crate::channel::{self, ChannelRealization};
use crate::error::{Error, Result};
use crate::metrics::{self, LinkMetrics};
use crate::power::PowerModel;
use crate::quant::BitRange;
use crate::seed;

/// Antenna, RF-chain and stream counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDims {
    pub n_t: usize,
    pub n_r: usize,
    pub l_t: usize,
    pub l_r: usize,
    pub n_s: usize,
}

impl Default for SystemDims {
    fn default() -> Self {
        Self { n_t: 32, n_r: 5, l_t: 5, l_r: 5, n_s: 5 }
    }
}

impl SystemDims {
    /// `1 ≤ N_s ≤ L ≤ N` on both sides.
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_s >= 1
            && self.n_s <= self.l_t
            && self.l_t <= self.n_t
            && self.n_s <= self.l_r
            && self.l_r <= self.n_r;
        if !ok {
            return Err(Error::Config(format!("dimensions must satisfy 1 ≤ N_s ≤ L ≤ N on both sides, got {self:?}")));
        }
        Ok(())
    }
}

/// Everything a single link evaluation needs besides the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSetup {
    pub dims: SystemDims,
    pub noise_var: f64,
    pub range: BitRange,
    pub power: PowerModel,
    pub admm: AdmmConfig,
    pub gamma_t: f64,
    pub gamma_r: f64,
}

impl LinkSetup {
    /// Default system at the given SNR with `γ_T = 0.001`, `γ_R = 0.5`.
    pub fn defaults(snr_db: f64) -> Self {
        Self {
            dims: SystemDims::default(),
            noise_var: metrics::noise_var_of_snr_db(snr_db),
            range: BitRange::default(),
            power: PowerModel::default(),
            admm: AdmmConfig::default(),
            gamma_t: 0.001,
            gamma_r: 0.5,
        }
    }
}

/// Precoder, combiner and their diagnostics.
#[derive(Debug, Clone)]
pub struct LinkDesign {
    pub tx: Design,
    pub rx: Design,
    pub metrics: LinkMetrics,
}

/// Final precoder/combiner pair of any scheme with its link metrics.
#[derive(Debug, Clone)]
pub struct LinkResult {
    pub precoder: HybridFactors,
    pub combiner: HybridFactors,
    pub metrics: LinkMetrics,
    /// ADMM sweeps used on each side; zero for schemes without a factorization.
    pub iterations: (usize, usize),
}

impl From<LinkDesign> for LinkResult {
    fn from(d: LinkDesign) -> Self {
        Self {
            iterations: (d.tx.iterations, d.rx.iterations),
            precoder: d.tx.factors,
            combiner: d.rx.factors,
            metrics: d.metrics,
        }
    }
}

/// Transmit then receive ADMM without evaluating the link.
///
/// Seeds for the two ADMM initializations are derived from `design_seed`.
pub fn design_sides(ch: &ChannelRealization, setup: &LinkSetup, design_seed: u64) -> Result<(Design, Design)> {
    let d = setup.dims;
    let reference = channel::digital_references(ch, d.n_s, setup.noise_var, d.n_s as f64)?;
    let mut rng_t = seed::rng(seed::child(design_seed, "tx", &[]));
    let tx = tx::design_tx(&reference.f_dbf, d.l_t, setup.gamma_t, &setup.range, &setup.power, &setup.admm, &mut rng_t);

    let eff = rx::effective_channel(&ch.h, &tx.factors.product());
    let w_dbf = rx::digital_combiner(&eff, d.n_s, setup.noise_var)?;
    let mut rng_r = seed::rng(seed::child(design_seed, "rx", &[]));
    let rx = rx::design_rx(&w_dbf, d.l_r, setup.gamma_r, &setup.range, &setup.power, &setup.admm, &mut rng_r);
    Ok((tx, rx))
}

/// Proposed design: ADMM on both sides with the γ-weighted power penalties.
pub fn design_link(ch: &ChannelRealization, setup: &LinkSetup, design_seed: u64) -> Result<LinkDesign> {
    let (tx, rx) = design_sides(ch, setup, design_seed)?;
    let metrics =
        metrics::evaluate_link(&tx.factors, &rx.factors, &ch.h, setup.noise_var, setup.dims.n_s, &setup.power)?;
    Ok(LinkDesign { tx, rx, metrics })
}

/// Fully digital target for the receive side given a finished precoder.
pub fn combiner_target(
    ch: &ChannelRealization,
    precoder: &admm::Design,
    setup: &LinkSetup,
) -> Result<crate::linalg::CMat> {
    let eff = rx::effective_channel(&ch.h, &precoder.factors.product());
    rx::digital_combiner(&eff, setup.dims.n_s, setup.noise_var)
}
