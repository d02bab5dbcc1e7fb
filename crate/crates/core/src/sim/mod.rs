//! Seeded Monte-Carlo engine.
//!
//! Every trial draws one channel and evaluates every enabled scheme on it,
//! so scheme comparisons are paired. The trial seed is a hash of the base
//! seed, the sweep coordinates and the trial index; adding sweep points or
//! changing the thread count never changes existing records.

pub mod config;
pub mod trace;
pub mod versus;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines;
use crate::channel::{self, ChannelRealization};
use crate::designer::{self, LinkResult, LinkSetup};
use crate::error::Result;
use crate::seed;

pub use config::{ExperimentConfig, Scheme, SweepPoint};

/// Seed of trial `trial` at `point`.
pub fn trial_seed(base_seed: u64, point: &SweepPoint, trial: u64) -> u64 {
    let mut words = point.seed_words().to_vec();
    words.push(trial);
    seed::derive(base_seed, &words)
}

/// Channel shared by all schemes of one trial.
pub fn trial_channel(cfg: &ExperimentConfig, point: &SweepPoint, trial_seed: u64) -> ChannelRealization {
    let mut rng = seed::rng(seed::child(trial_seed, "channel", &[]));
    let d = point.dims;
    channel::draw_channel(&mut rng, &cfg.channel.geometry(d.n_t), &cfg.channel.geometry(d.n_r), &cfg.channel.clusters())
}

/// Design seed shared by all schemes of one trial.
pub fn design_seed(trial_seed: u64) -> u64 {
    seed::child(trial_seed, "design", &[])
}

/// One scheme evaluated on one trial. Failed evaluations keep their row
/// with `error` set and the numeric columns NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub point: usize,
    pub snr_db: f64,
    pub gamma_t: f64,
    pub gamma_r: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub l_t: usize,
    pub l_r: usize,
    pub n_s: usize,
    pub trial: u64,
    pub seed: u64,
    pub channel: String,
    pub scheme: Scheme,
    pub se: f64,
    pub p_tx: f64,
    pub p_rx: f64,
    pub power: f64,
    pub ee: f64,
    pub mean_bits_t: f64,
    pub mean_bits_r: f64,
    pub bits_t: String,
    pub bits_r: String,
    pub iterations_t: usize,
    pub iterations_r: usize,
    pub error: String,
}

fn join_bits(bits: &[u32]) -> String {
    bits.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

/// Runs one scheme on a prepared trial.
pub fn evaluate_scheme(
    scheme: Scheme,
    ch: &ChannelRealization,
    setup: &LinkSetup,
    cfg: &ExperimentConfig,
    design_seed: u64,
) -> Result<LinkResult> {
    match scheme {
        Scheme::Proposed => designer::design_link(ch, setup, design_seed).map(LinkResult::from),
        Scheme::HybridFixed(b) => baselines::hybrid_fixedbit(ch, setup, b, design_seed),
        Scheme::Digital => baselines::digital_fullbit(ch, setup),
        Scheme::BruteForce => baselines::brute_force(ch, setup, &cfg.bruteforce, design_seed).map(|o| o.result),
    }
}

/// Evaluates every enabled scheme at `point` on trial `trial`.
pub fn run_point(
    cfg: &ExperimentConfig,
    point_index: usize,
    point: &SweepPoint,
    trial: u64,
) -> Result<Vec<TrialRecord>> {
    let setup = cfg.setup(point)?;
    let ts = trial_seed(cfg.base_seed, point, trial);
    let ch = trial_channel(cfg, point, ts);
    let fingerprint = format!("{:016x}", ch.fingerprint());
    let ds = design_seed(ts);
    let d = point.dims;
    let records = cfg
        .schemes
        .iter()
        .map(|&scheme| {
            let mut rec = TrialRecord {
                point: point_index,
                snr_db: point.snr_db,
                gamma_t: point.gamma_t,
                gamma_r: point.gamma_r,
                n_t: d.n_t,
                n_r: d.n_r,
                l_t: d.l_t,
                l_r: d.l_r,
                n_s: d.n_s,
                trial,
                seed: ts,
                channel: fingerprint.clone(),
                scheme,
                se: f64::NAN,
                p_tx: f64::NAN,
                p_rx: f64::NAN,
                power: f64::NAN,
                ee: f64::NAN,
                mean_bits_t: f64::NAN,
                mean_bits_r: f64::NAN,
                bits_t: String::new(),
                bits_r: String::new(),
                iterations_t: 0,
                iterations_r: 0,
                error: String::new(),
            };
            match evaluate_scheme(scheme, &ch, &setup, cfg, ds) {
                Ok(r) => {
                    let m = r.metrics;
                    rec.se = m.se;
                    rec.p_tx = m.p_tx;
                    rec.p_rx = m.p_rx;
                    rec.power = m.power;
                    rec.ee = m.ee;
                    rec.mean_bits_t = r.precoder.mean_bits();
                    rec.mean_bits_r = r.combiner.mean_bits();
                    rec.bits_t = join_bits(&r.precoder.bits);
                    rec.bits_r = join_bits(&r.combiner.bits);
                    (rec.iterations_t, rec.iterations_r) = r.iterations;
                }
                Err(e) => {
                    log::warn!("point {point_index} trial {trial} scheme {scheme}: {e}");
                    rec.error = e.to_string();
                }
            }
            rec
        })
        .collect();
    Ok(records)
}

/// Runs the full grid. Records come back ordered by point, trial and the
/// configured scheme order regardless of scheduling.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let points = cfg.points();
    let jobs: Vec<(usize, u64)> = (0..points.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let chunks: Vec<Vec<TrialRecord>> =
        jobs.par_iter().map(|&(p, t)| run_point(cfg, p, &points[p], t)).collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Sample mean and standard error; the values are sorted first so the
/// result does not depend on record order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
    dev.sort_by(f64::total_cmp);
    let var = dev.iter().sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-(point, scheme) statistics over successful trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub point: usize,
    pub snr_db: f64,
    pub gamma_t: f64,
    pub gamma_r: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub l_t: usize,
    pub l_r: usize,
    pub n_s: usize,
    pub scheme: Scheme,
    pub trials: usize,
    pub failures: usize,
    pub se_mean: f64,
    pub se_stderr: f64,
    pub ee_mean: f64,
    pub ee_stderr: f64,
    pub p_tx_mean: f64,
    pub p_rx_mean: f64,
    pub power_mean: f64,
    pub power_stderr: f64,
    pub bits_t_mean: f64,
    pub bits_t_stderr: f64,
    pub bits_r_mean: f64,
    pub bits_r_stderr: f64,
}

/// Groups records by (point, scheme). Groups without a single successful
/// trial are dropped with a warning.
pub fn aggregate(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, Scheme), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.point, r.scheme)).or_default().push(r);
    }
    let mut rows = Vec::new();
    for ((point, scheme), group) in groups {
        let ok: Vec<&TrialRecord> = group.iter().copied().filter(|r| r.error.is_empty()).collect();
        if ok.is_empty() {
            log::warn!("point {point} scheme {scheme}: every trial failed, omitted from the summary");
            continue;
        }
        let col = |f: fn(&TrialRecord) -> f64| mean_stderr(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
        let first = ok[0];
        let (se_mean, se_stderr) = col(|r| r.se);
        let (ee_mean, ee_stderr) = col(|r| r.ee);
        let (power_mean, power_stderr) = col(|r| r.power);
        let (bits_t_mean, bits_t_stderr) = col(|r| r.mean_bits_t);
        let (bits_r_mean, bits_r_stderr) = col(|r| r.mean_bits_r);
        rows.push(SummaryRow {
            point,
            snr_db: first.snr_db,
            gamma_t: first.gamma_t,
            gamma_r: first.gamma_r,
            n_t: first.n_t,
            n_r: first.n_r,
            l_t: first.l_t,
            l_r: first.l_r,
            n_s: first.n_s,
            scheme,
            trials: ok.len(),
            failures: group.len() - ok.len(),
            se_mean,
            se_stderr,
            ee_mean,
            ee_stderr,
            p_tx_mean: col(|r| r.p_tx).0,
            p_rx_mean: col(|r| r.p_rx).0,
            power_mean,
            power_stderr,
            bits_t_mean,
            bits_t_stderr,
            bits_r_mean,
            bits_r_stderr,
        });
    }
    rows
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Same as [`write_csv`] into any writer.
pub fn write_csv_to<T: Serialize, W: Write>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
