//! Paired comparison of the proposed design against the exhaustive search.

use rayon::prelude::*;
use serde::Serialize;

use super::{design_seed, mean_stderr, trial_channel, trial_seed, ExperimentConfig};
use crate::baselines::{self, BruteForceSource};
use crate::designer::{self, LinkResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VersusTrial {
    pub point: usize,
    pub trial: u64,
    pub seed: u64,
    pub ee_proposed: f64,
    pub ee_bruteforce: f64,
    /// Best EE among the uniform-resolution hybrid designs.
    pub ee_uniform_best: f64,
    /// `ee_bruteforce − ee_proposed`
    pub gap: f64,
    pub bruteforce_source: String,
    pub bits_t: String,
    pub bits_r: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VersusSummary {
    pub point: usize,
    pub snr_db: f64,
    pub gamma_t: f64,
    pub gamma_r: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub l_t: usize,
    pub l_r: usize,
    pub trials: usize,
    pub ee_proposed_mean: f64,
    pub ee_bruteforce_mean: f64,
    pub gap_mean: f64,
    pub gap_stderr: f64,
    /// `gap_mean / ee_bruteforce_mean`
    pub relative_gap: f64,
}

fn bits(r: &LinkResult) -> (String, String) {
    let j = |b: &[u32]| b.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
    (j(&r.precoder.bits), j(&r.combiner.bits))
}

/// Runs the proposed design, the brute force and every uniform hybrid on
/// each trial of each sweep point.
pub fn compare(cfg: &ExperimentConfig) -> Result<(Vec<VersusTrial>, Vec<VersusSummary>)> {
    cfg.validate()?;
    let points = cfg.points();
    let range = cfg.range()?;
    let mut trials = Vec::new();
    let mut summary = Vec::new();
    for (pi, point) in points.iter().enumerate() {
        let setup = cfg.setup(point)?;
        for chains in [point.dims.l_t, point.dims.l_r] {
            let n = baselines::combo_count(&range, chains);
            let limit = cfg.bruteforce.combo_limit as u128;
            if n > limit {
                return Err(Error::TooManyCombinations { combos: n, limit });
            }
        }
        let rows: Vec<Option<VersusTrial>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| -> Result<Option<VersusTrial>> {
                let ts = trial_seed(cfg.base_seed, point, t);
                let ch = trial_channel(cfg, point, ts);
                let ds = design_seed(ts);
                let (bf, proposed) = match (
                    baselines::brute_force(&ch, &setup, &cfg.bruteforce, ds),
                    designer::design_link(&ch, &setup, ds),
                ) {
                    (Ok(bf), Ok(p)) => (bf, p),
                    (Err(e), _) | (_, Err(e)) => {
                        log::warn!("point {pi} trial {t}: {e}");
                        return Ok(None);
                    }
                };
                let ee_uniform_best = range
                    .iter()
                    .filter_map(|b| baselines::hybrid_fixedbit(&ch, &setup, b, ds).ok())
                    .map(|r| r.metrics.ee)
                    .fold(f64::NEG_INFINITY, f64::max);
                let (bits_t, bits_r) = bits(&bf.result);
                let source = match bf.source {
                    BruteForceSource::Search => "search".to_string(),
                    BruteForceSource::Uniform(b) => format!("uniform-{b}bit"),
                };
                Ok(Some(VersusTrial {
                    point: pi,
                    trial: t,
                    seed: ts,
                    ee_proposed: proposed.metrics.ee,
                    ee_bruteforce: bf.result.metrics.ee,
                    ee_uniform_best,
                    gap: bf.result.metrics.ee - proposed.metrics.ee,
                    bruteforce_source: source,
                    bits_t,
                    bits_r,
                }))
            })
            .collect::<Result<_>>()?;
        let ok: Vec<VersusTrial> = rows.into_iter().flatten().collect();
        let col = |f: fn(&VersusTrial) -> f64| mean_stderr(&ok.iter().map(f).collect::<Vec<_>>());
        let (ee_proposed_mean, _) = col(|r| r.ee_proposed);
        let (ee_bruteforce_mean, _) = col(|r| r.ee_bruteforce);
        let (gap_mean, gap_stderr) = col(|r| r.gap);
        let d = point.dims;
        summary.push(VersusSummary {
            point: pi,
            snr_db: point.snr_db,
            gamma_t: point.gamma_t,
            gamma_r: point.gamma_r,
            n_t: d.n_t,
            n_r: d.n_r,
            l_t: d.l_t,
            l_r: d.l_r,
            trials: ok.len(),
            ee_proposed_mean,
            ee_bruteforce_mean,
            gap_mean,
            gap_stderr,
            relative_gap: gap_mean / ee_bruteforce_mean,
        });
        trials.extend(ok);
    }
    Ok((trials, summary))
}
