//! Per-iteration NMSE of the proposed ADMM designs for several array sizes.
//!
//! Transmit curves use the `sweep.n_t` values (receive side at `system.n_r`);
//! receive curves use `sweep.n_r` (transmit side at `system.n_t`). SNR and
//! trade-off weights are the first values of their sweep lists. Runs that
//! stop early hold their final NMSE for the remaining iterations.

use rayon::prelude::*;
use serde::Serialize;

use super::{design_seed, trial_channel, trial_seed, ExperimentConfig, SweepPoint};
use crate::designer::{self, SystemDims};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Tx,
    Rx,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub side: Side,
    pub n_antennas: usize,
    pub iteration: usize,
    /// Mean linear NMSE over trials, in dB.
    pub nmse_db: f64,
    pub nmse_mean: f64,
    pub primal_residual_mean: f64,
    pub trials: usize,
}

/// NMSE and primal residual per iteration, padded to `len` with the last value.
fn padded(history: &[crate::admm::IterationRecord], len: usize) -> Vec<(f64, f64)> {
    let last = history.last().map(|r| (r.nmse, r.primal_residual)).unwrap_or((f64::NAN, f64::NAN));
    (0..len).map(|k| history.get(k).map(|r| (r.nmse, r.primal_residual)).unwrap_or(last)).collect()
}

fn variant(cfg: &ExperimentConfig, side: Side, n: usize) -> Result<Vec<TraceRow>> {
    let sw = &cfg.sweep;
    let mut dims = cfg.system;
    match side {
        Side::Tx => dims.n_t = n,
        Side::Rx => dims.n_r = n,
    }
    let point = SweepPoint { snr_db: sw.snr_db[0], gamma_t: sw.gamma_t[0], gamma_r: sw.gamma_r[0], dims };
    let setup = cfg.setup(&point)?;
    let len = cfg.admm.max_iters;
    let runs: Vec<Option<Vec<(f64, f64)>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(cfg.base_seed, &point, t);
            let ch = trial_channel(cfg, &point, ts);
            match designer::design_sides(&ch, &setup, design_seed(ts)) {
                Ok((tx, rx)) => Some(padded(if side == Side::Tx { &tx.history } else { &rx.history }, len)),
                Err(e) => {
                    log::warn!("trace {side:?} n={n} trial {t}: {e}");
                    None
                }
            }
        })
        .collect();
    let ok: Vec<&Vec<(f64, f64)>> = runs.iter().flatten().collect();
    let count = ok.len().max(1) as f64;
    Ok((0..len)
        .map(|k| {
            let nmse_mean = ok.iter().map(|r| r[k].0).sum::<f64>() / count;
            let primal_residual_mean = ok.iter().map(|r| r[k].1).sum::<f64>() / count;
            TraceRow {
                side,
                n_antennas: n,
                iteration: k + 1,
                nmse_db: 10.0 * nmse_mean.log10(),
                nmse_mean,
                primal_residual_mean,
                trials: ok.len(),
            }
        })
        .collect())
}

/// Convergence curves for every configured antenna count, transmit side first.
pub fn convergence_trace(cfg: &ExperimentConfig) -> Result<Vec<TraceRow>> {
    cfg.validate()?;
    let or = |v: &Vec<usize>, d: usize| if v.is_empty() { vec![d] } else { v.clone() };
    let mut rows = Vec::new();
    for n in or(&cfg.sweep.n_t, cfg.system.n_t) {
        check(cfg.system, Side::Tx, n)?;
        rows.extend(variant(cfg, Side::Tx, n)?);
    }
    for n in or(&cfg.sweep.n_r, cfg.system.n_r) {
        check(cfg.system, Side::Rx, n)?;
        rows.extend(variant(cfg, Side::Rx, n)?);
    }
    Ok(rows)
}

fn check(mut dims: SystemDims, side: Side, n: usize) -> Result<()> {
    match side {
        Side::Tx => dims.n_t = n,
        Side::Rx => dims.n_r = n,
    }
    dims.validate()
}
