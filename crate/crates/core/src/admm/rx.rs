//! Receive side: the combiner is designed on the effective channel
//! `H̃ = H·F*` left by the transmit design, and factored as
//! `W_DBF ≈ W_RF · Δ_RX · W_BB` under the ADC power penalty.
//!
//! Nothing here looks at the transmit factors except through `H̃`.

use rand::Rng;

use super::{factorize, AdmmConfig, DeltaMode, Design};
use crate::boxsolve::Penalty;
use crate::channel::{self, RANK_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Svd};
use crate::power::PowerModel;
use crate::quant::BitRange;

#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    pub h_tilde: CMat,
    pub svd: Svd,
}

pub fn effective_channel(h: &CMat, f_star: &CMat) -> EffectiveChannel {
    let h_tilde = h * f_star;
    let svd = Svd::new(&h_tilde);
    EffectiveChannel { h_tilde, svd }
}

/// `W_DBF = Ũ_{:,1:N_s} · P̃^{1/2}` with `P̃` water-filled over `Σ̃` (budget `N_s`).
///
/// Modes beyond the numerical rank of `H̃` get zero power rather than an
/// error, since a precoder may legitimately leave weak streams unpowered.
pub fn digital_combiner(eff: &EffectiveChannel, n_streams: usize, noise_var: f64) -> Result<CMat> {
    let available = eff.svd.singular_values.len();
    if n_streams == 0 || n_streams > available {
        return Err(Error::RankDeficient { streams: n_streams, rank: eff.svd.rank(RANK_TOL) });
    }
    let smax = eff.svd.singular_values[0];
    let sv: Vec<f64> =
        eff.svd.singular_values[..n_streams].iter().map(|&s| if s > RANK_TOL * smax { s } else { 0.0 }).collect();
    let p = channel::waterfill(&sv, noise_var, n_streams as f64)?;
    let amp: Vec<f64> = p.iter().map(|x| x.sqrt()).collect();
    let u = eff.svd.u.columns(0, n_streams).into_owned();
    Ok(linalg::scale_columns(&u, &amp))
}

pub fn rx_penalty(model: &PowerModel) -> Penalty {
    Penalty { per_bit: model.p_adc, include_trace: false }
}

/// Joint ADC bit allocation and hybrid combiner design for `w_dbf`.
pub fn design_rx(
    w_dbf: &CMat,
    n_chains: usize,
    gamma: f64,
    range: &BitRange,
    model: &PowerModel,
    cfg: &AdmmConfig,
    rng: &mut impl Rng,
) -> Design {
    let mode = DeltaMode::Optimize { gamma, penalty: rx_penalty(model) };
    factorize(w_dbf, n_chains, range, &mode, cfg, rng)
}

pub fn design_rx_frozen(w_dbf: &CMat, bits: &[u32], range: &BitRange, cfg: &AdmmConfig, rng: &mut impl Rng) -> Design {
    factorize(w_dbf, bits.len(), range, &DeltaMode::Frozen(bits.to_vec()), cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frob};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
        CMat::from_fn(rows, cols, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn effective_channel_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random(5, 8, &mut rng);
        let f = random(8, 3, &mut rng);
        assert_eq!(frob(&effective_channel(&h, &CMat::zeros(8, 3)).h_tilde), 0.0);
        let id = effective_channel(&CMat::identity(8, 8), &f);
        assert!(frob(&(id.h_tilde - &f)) < 1e-15);
        let e = effective_channel(&h, &f);
        assert!((frob(&e.h_tilde) - frob(&(&h * &f))).abs() < 1e-12);
        assert!(frob(&(e.svd.reconstruct() - &e.h_tilde)) <= 1e-10 * frob(&e.h_tilde));
    }

    #[test]
    fn rank_one_combiner_follows_leading_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random(4, 1, &mut rng);
        let v = random(1, 3, &mut rng);
        let e = effective_channel(&(&u * &v), &CMat::identity(3, 3));
        let w = digital_combiner(&e, 1, 0.1).unwrap();
        let un = u.unscale(u.norm());
        // |⟨w, u⟩| = ‖w‖ when w ∝ u.
        let overlap = (w.adjoint() * &un)[(0, 0)].norm();
        assert!((overlap - w.norm()).abs() < 1e-10);
        assert!((w.norm_squared() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn equal_gains_share_power_equally() {
        let h = CMat::identity(4, 2).scale(2.0);
        let e = effective_channel(&h, &CMat::identity(2, 2));
        let w = digital_combiner(&e, 2, 0.1).unwrap();
        let n: Vec<f64> = w.column_iter().map(|col| col.norm_squared()).collect();
        assert!((n[0] - n[1]).abs() < 1e-12);
    }

    #[test]
    fn combiner_columns_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = effective_channel(&random(6, 10, &mut rng), &random(10, 3, &mut rng));
        let w = digital_combiner(&e, 3, 0.05).unwrap();
        let g = w.adjoint() * &w;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(g[(i, j)].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn too_many_streams_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = effective_channel(&random(4, 6, &mut rng), &random(6, 2, &mut rng));
        assert!(matches!(digital_combiner(&e, 3, 0.1), Err(Error::RankDeficient { .. })));
    }
}
