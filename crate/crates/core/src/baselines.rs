//! Comparison schemes: the fully digital array at full resolution, hybrid
//! arrays with every converter frozen at one resolution, and an exhaustive
//! search over per-converter resolutions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{rx, tx, AdmmConfig};
use crate::beamformer::HybridFactors;
use crate::channel::{self, ChannelRealization};
use crate::designer::{LinkResult, LinkSetup};
use crate::error::{Error, Result};
use crate::metrics;
use crate::power::{self, Architecture};
use crate::quant::{self, BitRange};
use crate::seed;

/// Fully digital transceiver (`L = N`) with every converter at the top of the range.
pub fn digital_fullbit(ch: &ChannelRealization, setup: &LinkSetup) -> Result<LinkResult> {
    let d = setup.dims;
    let bits = setup.range.max_bits;
    let reference = channel::digital_references(ch, d.n_s, setup.noise_var, d.n_s as f64)?;
    let precoder = HybridFactors::fully_digital(&reference.f_dbf, bits);
    let eff = rx::effective_channel(&ch.h, &reference.f_dbf);
    let w_dbf = rx::digital_combiner(&eff, d.n_s, setup.noise_var)?;
    let combiner = HybridFactors::fully_digital(&w_dbf, bits);
    let metrics = metrics::evaluate_link(&precoder, &combiner, &ch.h, setup.noise_var, d.n_s, &setup.power)?;
    Ok(LinkResult { precoder, combiner, metrics, iterations: (0, 0) })
}

fn check_bits(bits: u32, range: &BitRange) -> Result<()> {
    if bits < range.min_bits || bits > range.max_bits {
        return Err(Error::Config(format!(
            "fixed resolution {bits} lies outside [{}, {}]",
            range.min_bits, range.max_bits
        )));
    }
    Ok(())
}

/// Hybrid transceiver with all DACs and ADCs frozen at `bits`.
pub fn hybrid_fixedbit(ch: &ChannelRealization, setup: &LinkSetup, bits: u32, design_seed: u64) -> Result<LinkResult> {
    check_bits(bits, &setup.range)?;
    let d = setup.dims;
    fixed_link(ch, setup, &vec![bits; d.l_t], &vec![bits; d.l_r], &setup.admm, design_seed)
}

/// Frozen-Δ design on both sides with the given per-chain resolutions.
fn fixed_link(
    ch: &ChannelRealization,
    setup: &LinkSetup,
    bits_t: &[u32],
    bits_r: &[u32],
    cfg: &AdmmConfig,
    design_seed: u64,
) -> Result<LinkResult> {
    let d = setup.dims;
    let reference = channel::digital_references(ch, d.n_s, setup.noise_var, d.n_s as f64)?;
    let mut rng_t = seed::rng(seed::child(design_seed, "tx", &[]));
    let txd = tx::design_tx_frozen(&reference.f_dbf, bits_t, &setup.range, cfg, &mut rng_t);
    let eff = rx::effective_channel(&ch.h, &txd.factors.product());
    let w_dbf = rx::digital_combiner(&eff, d.n_s, setup.noise_var)?;
    let mut rng_r = seed::rng(seed::child(design_seed, "rx", &[]));
    let rxd = rx::design_rx_frozen(&w_dbf, bits_r, &setup.range, cfg, &mut rng_r);
    let metrics = metrics::evaluate_link(&txd.factors, &rxd.factors, &ch.h, setup.noise_var, d.n_s, &setup.power)?;
    Ok(LinkResult {
        precoder: txd.factors,
        combiner: rxd.factors,
        metrics,
        iterations: (txd.iterations, rxd.iterations),
    })
}

/// Knobs of the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BruteForceConfig {
    /// ADMM sweeps per candidate (the Δ-step is skipped).
    pub max_iters: usize,
    /// Refuse searches with more candidates than this on either side.
    pub combo_limit: u64,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self { max_iters: 10, combo_limit: 1_000_000 }
    }
}

/// Where the brute-force winner came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BruteForceSource {
    /// The decoupled TX-then-RX search.
    Search,
    /// A uniform-resolution hybrid design that beat the decoupled search.
    Uniform(u32),
}

#[derive(Debug, Clone)]
pub struct BruteForceOutcome {
    pub result: LinkResult,
    pub source: BruteForceSource,
    /// Candidates evaluated per side.
    pub combos: (u64, u64),
}

/// Number of per-chain resolution vectors for `chains` converters.
pub fn combo_count(range: &BitRange, chains: usize) -> u128 {
    (range.count() as u128).saturating_pow(chains as u32)
}

/// Combination `index` in lexicographic order, first chain most significant.
pub fn combo(range: &BitRange, chains: usize, mut index: u64) -> Vec<u32> {
    let base = range.count() as u64;
    let mut bits = vec![range.min_bits; chains];
    for slot in bits.iter_mut().rev() {
        *slot = range.min_bits + (index % base) as u32;
        index /= base;
    }
    bits
}

fn guarded_count(range: &BitRange, chains: usize, limit: u64) -> Result<u64> {
    let n = combo_count(range, chains);
    if n > limit as u128 {
        return Err(Error::TooManyCombinations { combos: n, limit: limit as u128 });
    }
    Ok(n as u64)
}

/// Index of the best finite score; ties go to the smallest index.
fn argmax(scores: impl ParallelIterator<Item = (u64, f64)>) -> Option<(u64, f64)> {
    scores.filter(|(_, s)| s.is_finite()).reduce_with(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
}

/// Exhaustive search over DAC resolutions, then over ADC resolutions on the
/// resulting effective channel.
///
/// Each transmit candidate is scored by `I(F) / (P_TX + P_RX⁰)` where `P_RX⁰`
/// is the receive power with every ADC at the bottom of the range; each
/// receive candidate is scored by the link EE. Every candidate gets its own
/// frozen-Δ factorization with `bf.max_iters` sweeps from the same seed. The
/// uniform hybrid designs of [`hybrid_fixedbit`] are also candidates, so the
/// returned EE is never below any of them.
pub fn brute_force(
    ch: &ChannelRealization,
    setup: &LinkSetup,
    bf: &BruteForceConfig,
    design_seed: u64,
) -> Result<BruteForceOutcome> {
    let d = setup.dims;
    let range = setup.range;
    let n_tx = guarded_count(&range, d.l_t, bf.combo_limit)?;
    let n_rx = guarded_count(&range, d.l_r, bf.combo_limit)?;
    let cfg = AdmmConfig { max_iters: bf.max_iters, ..setup.admm };
    let reference = channel::digital_references(ch, d.n_s, setup.noise_var, d.n_s as f64)?;
    let seed_t = seed::child(design_seed, "tx", &[]);
    let seed_r = seed::child(design_seed, "rx", &[]);

    let floor = quant::deltas_of_bits(&vec![range.min_bits; d.l_r]);
    let p_rx_nominal = power::rx_power(&setup.power, Architecture::Hybrid, d.n_r, &floor)?;
    let design_t = |bits: &[u32]| {
        let mut rng = seed::rng(seed_t);
        tx::design_tx_frozen(&reference.f_dbf, bits, &range, &cfg, &mut rng)
    };
    let score_t = |f: &HybridFactors| -> Result<f64> {
        let mi = metrics::mutual_information(f, &ch.h, setup.noise_var, d.n_s)?;
        Ok(mi / (f.tx_power(&setup.power)? + p_rx_nominal))
    };
    let (best_t, _) = argmax((0..n_tx).into_par_iter().map(|i| {
        let f = design_t(&combo(&range, d.l_t, i)).factors;
        (i, score_t(&f).unwrap_or(f64::NEG_INFINITY))
    }))
    .ok_or(Error::DegenerateCombiner)?;
    let txd = design_t(&combo(&range, d.l_t, best_t));
    let precoder = txd.factors;

    let eff = rx::effective_channel(&ch.h, &precoder.product());
    let w_dbf = rx::digital_combiner(&eff, d.n_s, setup.noise_var)?;
    let design_r = |bits: &[u32]| -> (HybridFactors, usize) {
        let mut rng = seed::rng(seed_r);
        let r = rx::design_rx_frozen(&w_dbf, bits, &range, &cfg, &mut rng);
        (r.factors, r.iterations)
    };
    let evaluate =
        |w: &HybridFactors| metrics::evaluate_link(&precoder, w, &ch.h, setup.noise_var, d.n_s, &setup.power);
    let (best_r, _) = argmax((0..n_rx).into_par_iter().map(|i| {
        let (w, _) = design_r(&combo(&range, d.l_r, i));
        (i, evaluate(&w).map(|m| m.ee).unwrap_or(f64::NEG_INFINITY))
    }))
    .ok_or(Error::DegenerateCombiner)?;
    let (combiner, rx_iterations) = design_r(&combo(&range, d.l_r, best_r));
    let metrics = evaluate(&combiner)?;
    let mut best = BruteForceOutcome {
        result: LinkResult { precoder, combiner, metrics, iterations: (txd.iterations, rx_iterations) },
        source: BruteForceSource::Search,
        combos: (n_tx, n_rx),
    };

    for b in range.iter() {
        if let Ok(r) = hybrid_fixedbit(ch, setup, b, design_seed) {
            if r.metrics.ee > best.result.metrics.ee {
                best.result = r;
                best.source = BruteForceSource::Uniform(b);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ArrayGeometry, ClusterParams};
    use crate::designer::{self, SystemDims};
    use crate::linalg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn channel(dims: &SystemDims, seed: u64) -> ChannelRealization {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        channel::draw_channel(
            &mut rng,
            &ArrayGeometry::ula(dims.n_t),
            &ArrayGeometry::ula(dims.n_r),
            &ClusterParams::default(),
        )
    }

    fn toy() -> LinkSetup {
        let mut s = LinkSetup::defaults(10.0);
        s.dims = SystemDims { n_t: 8, n_r: 4, l_t: 2, l_r: 2, n_s: 2 };
        s.range = BitRange::new(1, 3).unwrap();
        s
    }

    /// First trial seed whose channel supports the requested streams.
    fn usable(setup: &LinkSetup, from: u64) -> (u64, ChannelRealization) {
        (from..)
            .map(|s| (s, channel(&setup.dims, s)))
            .find(|(_, ch)| ch.svd.rank(channel::RANK_TOL) >= setup.dims.n_s)
            .unwrap()
    }

    #[test]
    fn digital_power_is_dominated_by_converters() {
        let setup = LinkSetup::defaults(10.0);
        let (_, ch) = usable(&setup, 0);
        let r = digital_fullbit(&ch, &setup).unwrap();
        let trace = linalg::frob_sq(&r.precoder.product());
        assert!((trace - 5.0).abs() < 1e-9);
        // 32 DACs at 256·0.1 W, no phase shifters.
        let converters = r.metrics.p_tx - trace - 32.0 * 0.1 - 10.0;
        assert!((converters - 819.2).abs() < 1e-9, "{converters}");
        assert!((r.metrics.p_rx - (5.0 * 25.6 + 5.0 * 0.1 + 10.0)).abs() < 1e-9);
    }

    #[test]
    fn digital_rate_is_close_to_waterfilling_capacity() {
        let setup = LinkSetup::defaults(10.0);
        let (_, ch) = usable(&setup, 0);
        let r = digital_fullbit(&ch, &setup).unwrap();
        let reference = channel::digital_references(&ch, 5, setup.noise_var, 5.0).unwrap();
        let capacity: f64 = ch.svd.singular_values[..5]
            .iter()
            .zip(&reference.waterfill_powers)
            .map(|(s, p)| (1.0 + s * s * p / (setup.noise_var * 5.0)).log2())
            .sum();
        // Ideal converters reproduce the capacity exactly.
        let ideal = |f: &HybridFactors| HybridFactors {
            delta: vec![1.0; f.delta.len()],
            bb: linalg::scale_rows(&f.bb, &f.delta),
            ..f.clone()
        };
        let exact =
            metrics::spectral_efficiency(&ideal(&r.precoder), &ideal(&r.combiner), &ch.h, setup.noise_var, 5).unwrap();
        assert!((exact - capacity).abs() <= 1e-9 * capacity, "{exact} vs {capacity}");
        // 8-bit distortion costs a little, never gains.
        let loss = (capacity - r.metrics.se) / capacity;
        assert!((0.0..1e-2).contains(&loss), "{} vs {capacity}", r.metrics.se);
    }

    #[test]
    fn fixed_bits_are_frozen() {
        let setup = LinkSetup::defaults(10.0);
        let (s, ch) = usable(&setup, 0);
        for b in [1, 4, 8] {
            let r = hybrid_fixedbit(&ch, &setup, b, s).unwrap();
            assert_eq!(r.precoder.bits, vec![b; 5]);
            assert_eq!(r.combiner.bits, vec![b; 5]);
            let d = quant::deltas_of_bits(&[b])[0];
            assert!(r.precoder.delta.iter().chain(&r.combiner.delta).all(|&x| x == d));
        }
        assert!(hybrid_fixedbit(&ch, &setup, 9, s).is_err());
        assert!(hybrid_fixedbit(&ch, &setup, 0, s).is_err());
    }

    #[test]
    fn one_bit_converters_draw_one_watt() {
        let setup = LinkSetup::defaults(10.0);
        let (s, ch) = usable(&setup, 0);
        let r = hybrid_fixedbit(&ch, &setup, 1, s).unwrap();
        let trace = linalg::frob_sq(&r.precoder.product());
        let converters = r.metrics.p_tx - trace - 32.0 * 0.1 - 32.0 * 5.0 * 0.01 - 10.0;
        assert!((converters - 1.0).abs() < 1e-9);
    }

    #[test]
    fn more_resolution_never_lowers_the_fixed_rate() {
        let setup = LinkSetup::defaults(10.0);
        let mut seed = 0;
        for _ in 0..20 {
            let (s, ch) = usable(&setup, seed);
            seed = s + 1;
            let lo = hybrid_fixedbit(&ch, &setup, 1, s).unwrap().metrics.se;
            let hi = hybrid_fixedbit(&ch, &setup, 8, s).unwrap().metrics.se;
            assert!(hi >= lo, "seed {s}: {hi} < {lo}");
        }
    }

    #[test]
    fn proposed_without_penalty_beats_one_bit_rate() {
        let mut setup = LinkSetup::defaults(10.0);
        setup.gamma_t = 0.0;
        setup.gamma_r = 0.0;
        let mut seed = 0;
        let (mut wins, mut total) = (0, 0);
        let mut sums = (0.0, 0.0);
        for _ in 0..20 {
            let (s, ch) = usable(&setup, seed);
            seed = s + 1;
            let one = hybrid_fixedbit(&ch, &setup, 1, s).unwrap().metrics.se;
            let prop = designer::design_link(&ch, &setup, s).unwrap().metrics.se;
            total += 1;
            wins += usize::from(prop >= one);
            sums.0 += prop;
            sums.1 += one;
        }
        eprintln!("proposed(γ=0) SE ≥ hybrid-1bit SE on {wins}/{total} seeds");
        assert!(sums.0 >= sums.1, "mean SE {} < {}", sums.0 / 20.0, sums.1 / 20.0);
    }

    #[test]
    fn combos_enumerate_lexicographically() {
        let r = BitRange::new(1, 3).unwrap();
        assert_eq!(combo_count(&r, 2), 9);
        let all: Vec<Vec<u32>> = (0..9).map(|i| combo(&r, 2, i)).collect();
        assert_eq!(all[0], vec![1, 1]);
        assert_eq!(all[1], vec![1, 2]);
        assert_eq!(all[3], vec![2, 1]);
        assert_eq!(all[8], vec![3, 3]);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all);
        assert_eq!(combo_count(&BitRange::default(), 5), 32768);
    }

    #[test]
    fn oversized_search_is_refused() {
        let setup = LinkSetup::defaults(10.0);
        let (s, ch) = usable(&setup, 0);
        let bf = BruteForceConfig { combo_limit: 1000, ..Default::default() };
        match brute_force(&ch, &setup, &bf, s) {
            Err(Error::TooManyCombinations { combos, limit }) => assert_eq!((combos, limit), (32768, 1000)),
            other => panic!("expected a guard error, got {:?}", other.map(|o| o.combos)),
        }
    }

    #[test]
    fn ties_go_to_the_smaller_index() {
        let scores = vec![(0u64, 1.0), (1, 3.0), (2, f64::NAN), (3, 3.0), (4, 2.0)];
        assert_eq!(argmax(scores.into_par_iter()), Some((1, 3.0)));
    }

    #[test]
    fn singleton_range_matches_fixed_design() {
        let mut setup = toy();
        setup.range = BitRange::new(1, 1).unwrap();
        let (s, ch) = usable(&setup, 0);
        let bf = brute_force(&ch, &setup, &BruteForceConfig::default(), s).unwrap();
        assert_eq!(bf.combos, (1, 1));
        let fixed = hybrid_fixedbit(&ch, &setup, 1, s).unwrap();
        assert_eq!(bf.result.precoder.bits, vec![1, 1]);
        assert_eq!(bf.result.combiner.bits, vec![1, 1]);
        assert!(bf.result.metrics.ee >= fixed.metrics.ee);
    }

    #[test]
    fn search_dominates_every_uniform_design() {
        let setup = toy();
        let mut seed = 0;
        for _ in 0..10 {
            let (s, ch) = usable(&setup, seed);
            seed = s + 1;
            let bf = brute_force(&ch, &setup, &BruteForceConfig::default(), s).unwrap();
            assert_eq!(bf.combos, (9, 9));
            for b in 1..=3 {
                let u = hybrid_fixedbit(&ch, &setup, b, s).unwrap();
                assert!(bf.result.metrics.ee >= u.metrics.ee, "seed {s} b={b}");
            }
        }
    }
}
