//! Link-level figures of merit: effective noise covariance, spectral
//! efficiency, transmit-side mutual information and energy efficiency.

use serde::Serialize;

use crate::beamformer::HybridFactors;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::power::PowerModel;

/// Combiner columns whose norm falls below this fraction of the largest are treated as switched off.
const DEAD_STREAM_TOL: f64 = 1e-12;
const INDEPENDENCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkMetrics {
    /// bits/s/Hz
    pub se: f64,
    pub p_tx: f64,
    pub p_rx: f64,
    /// `p_tx + p_rx`, W
    pub power: f64,
    /// bits/Hz/J
    pub ee: f64,
    /// Condition number of the (column-normalized) noise covariance.
    pub r_eta_cond: f64,
}

/// Covariance of the post-combiner noise bundle
/// `R_η = W^H H F_RF C_T F_RF^H H^H W + W_BB^H C_R W_BB + σ² W^H W`.
pub fn r_eta(w: &HybridFactors, f_rf: &CMat, c_tx: &[f64], c_rx: &[f64], h: &CMat, noise_var: f64) -> Result<CMat> {
    let wmat = w.product();
    let gram = wmat.adjoint() * &wmat;
    let eig = linalg::hermitian_eigenvalues(&gram);
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    if !(hi > 0.0) || lo <= 1e-13 * hi {
        return Err(Error::DegenerateCombiner);
    }
    let a = wmat.adjoint() * h * f_rf;
    let tx_term = linalg::scale_columns(&a, c_tx) * a.adjoint();
    let rx_term = w.bb.adjoint() * linalg::scale_rows(&w.bb, c_rx);
    Ok(linalg::hermitize(&(tx_term + rx_term + gram.scale(noise_var))))
}

/// Drops dead streams and rescales every remaining combiner column to unit
/// norm. Columns are visited strongest first; one is kept only if it keeps a
/// sine of at least `INDEPENDENCE_TOL` against the span of those already
/// kept. The rate is invariant to per-stream combiner scaling, and a stream
/// whose combiner is negligible or collinear with stronger ones is one the
/// digital target left unpowered.
fn normalized_combiner(w: &HybridFactors) -> Result<HybridFactors> {
    let wmat = w.product();
    let norms: Vec<f64> = wmat.column_iter().map(|c| c.norm()).collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::DegenerateCombiner);
    }
    let mut order: Vec<usize> = (0..norms.len()).filter(|&k| norms[k] > DEAD_STREAM_TOL * max).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let mut basis: Vec<linalg::CVec> = Vec::new();
    let mut keep = Vec::new();
    for k in order {
        let mut r = wmat.column(k).unscale(norms[k]);
        for q in &basis {
            let proj = q.dotc(&r);
            r -= q * proj;
        }
        let s = r.norm();
        if s >= INDEPENDENCE_TOL {
            basis.push(r.unscale(s));
            keep.push(k);
        }
    }
    keep.sort_unstable();
    let mut bb = CMat::zeros(w.bb.nrows(), keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        bb.set_column(dst, &w.bb.column(k).unscale(norms[k]));
    }
    Ok(HybridFactors { bb, ..w.clone() })
}

fn rate_with_cond(
    f: &HybridFactors,
    w: &HybridFactors,
    h: &CMat,
    noise_var: f64,
    n_streams: usize,
) -> Result<(f64, f64)> {
    let w = normalized_combiner(w)?;
    let r = r_eta(&w, &f.rf, &f.noise_cov(), &w.noise_cov(), h, noise_var)?;
    let g = w.product().adjoint() * h * f.product();
    let x = linalg::hpd_solve(&r, &g).ok_or(Error::DegenerateCombiner)?;
    let m = (g.adjoint() * x).unscale(n_streams as f64);
    let se = linalg::log2_det_identity_plus(&m)?.max(0.0);
    let eig = linalg::hermitian_eigenvalues(&r);
    Ok((se, eig[eig.len() - 1] / eig[0]))
}

/// `log2 |I + R_η^{-1} W^H H F F^H H^H W / N_s|`.
pub fn spectral_efficiency(
    f: &HybridFactors,
    w: &HybridFactors,
    h: &CMat,
    noise_var: f64,
    n_streams: usize,
) -> Result<f64> {
    rate_with_cond(f, w, h, noise_var, n_streams).map(|(se, _)| se)
}

/// Transmit-side mutual information `log2 |I + Q^{-1} H F F^H H^H / N_s|`
/// with `Q = H F_RF C_T F_RF^H H^H + σ² I`. The DAC distortion reaches the
/// receive antennas through the channel.
pub fn mutual_information(f: &HybridFactors, h: &CMat, noise_var: f64, n_streams: usize) -> Result<f64> {
    let n_r = h.nrows();
    let hrf = h * &f.rf;
    let q = linalg::hermitize(
        &(linalg::scale_columns(&hrf, &f.noise_cov()) * hrf.adjoint() + CMat::identity(n_r, n_r).scale(noise_var)),
    );
    let hf = h * f.product();
    let x = linalg::hpd_solve(&q, &hf).ok_or(Error::DegenerateCombiner)?;
    let m = (hf.adjoint() * x).unscale(n_streams as f64);
    Ok(linalg::log2_det_identity_plus(&m)?.max(0.0))
}

pub fn energy_efficiency(se: f64, p_tx: f64, p_rx: f64) -> f64 {
    se / (p_tx + p_rx)
}

/// Rate, power and EE of a complete precoder/combiner pair.
pub fn evaluate_link(
    f: &HybridFactors,
    w: &HybridFactors,
    h: &CMat,
    noise_var: f64,
    n_streams: usize,
    model: &PowerModel,
) -> Result<LinkMetrics> {
    let (se, r_eta_cond) = rate_with_cond(f, w, h, noise_var, n_streams)?;
    let p_tx = f.tx_power(model)?;
    let p_rx = w.rx_power(model)?;
    Ok(LinkMetrics { se, p_tx, p_rx, power: p_tx + p_rx, ee: energy_efficiency(se, p_tx, p_rx), r_eta_cond })
}

/// Noise variance for an SNR in dB: `σ² = 1 / SNR`.
pub fn noise_var_of_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}
