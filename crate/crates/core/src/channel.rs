//! Clustered narrowband mmWave channel, ULA steering vectors and the fully
//! digital SVD/water-filling reference precoder.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, Svd};

/// Relative threshold below which a singular value counts as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub num_elements: usize,
    /// Element spacing in wavelengths.
    pub element_spacing: f64,
}

impl ArrayGeometry {
    /// Half-wavelength ULA.
    pub fn ula(num_elements: usize) -> Self {
        Self { num_elements, element_spacing: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_elements == 0 || !(self.element_spacing > 0.0) {
            return Err(Error::Config(format!(
                "array needs at least one element and positive spacing, got {} elements at {}λ",
                self.num_elements, self.element_spacing
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    pub num_clusters: usize,
    pub rays_per_cluster: usize,
    /// Average power `σ²_{α,i}` of each cluster.
    pub cluster_powers: Vec<f64>,
    /// Laplacian scale of the per-ray angle offsets around the cluster mean, radians.
    pub angular_spread: f64,
}

impl ClusterParams {
    pub fn uniform(num_clusters: usize, rays_per_cluster: usize, power: f64, angular_spread: f64) -> Self {
        Self { num_clusters, rays_per_cluster, cluster_powers: vec![power; num_clusters], angular_spread }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_clusters == 0 || self.rays_per_cluster == 0 {
            return Err(Error::Config("cluster and ray counts must be at least 1".into()));
        }
        if self.cluster_powers.len() != self.num_clusters || self.cluster_powers.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Config("one strictly positive power per cluster is required".into()));
        }
        if !(self.angular_spread > 0.0) {
            return Err(Error::Config("angular spread must be positive".into()));
        }
        Ok(())
    }
}

impl Default for ClusterParams {
    fn default() -> Self {
        // 10° Laplacian spread.
        Self::uniform(2, 3, 1.0, 0.1745)
    }
}

/// One channel draw together with the ray parameters that generated it.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CMat,
    pub gains: Vec<Complex64>,
    pub aod: Vec<f64>,
    pub aoa: Vec<f64>,
    pub svd: Svd,
}

impl ChannelRealization {
    /// Wraps an arbitrary channel matrix (no ray parameters).
    pub fn from_matrix(h: CMat) -> Self {
        let svd = Svd::new(&h);
        Self { h, gains: Vec::new(), aod: Vec::new(), aoa: Vec::new(), svd }
    }

    pub fn n_rx(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.h.ncols()
    }

    /// Stable 64-bit fingerprint of the matrix entries, used to check paired trials.
    pub fn fingerprint(&self) -> u64 {
        let mut acc = 0xcbf2_9ce4_8422_2325u64;
        for z in self.h.iter() {
            for bits in [z.re.to_bits(), z.im.to_bits()] {
                acc = crate::seed::mix(acc ^ bits);
            }
        }
        acc
    }
}

/// Steering vector with entries `exp(j·2π·d·k·sin θ)/√N`.
pub fn array_response(geometry: &ArrayGeometry, angle: f64) -> CVec {
    let n = geometry.num_elements;
    let norm = 1.0 / (n as f64).sqrt();
    let phase = 2.0 * PI * geometry.element_spacing * angle.sin();
    CVec::from_fn(n, |k, _| Complex64::from_polar(norm, phase * k as f64))
}

fn laplacian(rng: &mut impl Rng, scale: f64) -> f64 {
    // Inverse CDF; u in (-1/2, 1/2).
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

fn complex_gaussian(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Builds `H = sqrt(N_T N_R / (N_cl N_ray)) Σ α_il a_R(φ^r_il) a_T(φ^t_il)^H` from explicit rays.
pub fn channel_from_rays(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    gains: &[Complex64],
    aod: &[f64],
    aoa: &[f64],
    num_clusters: usize,
    rays_per_cluster: usize,
) -> CMat {
    let scale = ((tx.num_elements * rx.num_elements) as f64 / (num_clusters * rays_per_cluster) as f64).sqrt();
    let mut h = CMat::zeros(rx.num_elements, tx.num_elements);
    for ((&g, &t), &r) in gains.iter().zip(aod).zip(aoa) {
        let a_r = array_response(rx, r);
        let a_t = array_response(tx, t);
        h += (a_r * a_t.adjoint()) * g;
    }
    h * Complex64::new(scale, 0.0)
}

/// Draws one clustered channel: uniform cluster mean angles on `[0, 2π)`,
/// Laplacian per-ray offsets, complex Gaussian ray gains.
pub fn draw_channel(
    rng: &mut impl Rng,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    clusters: &ClusterParams,
) -> ChannelRealization {
    let rays = clusters.num_clusters * clusters.rays_per_cluster;
    let mut gains = Vec::with_capacity(rays);
    let mut aod = Vec::with_capacity(rays);
    let mut aoa = Vec::with_capacity(rays);
    for &power in &clusters.cluster_powers {
        let mean_t = rng.random::<f64>() * 2.0 * PI;
        let mean_r = rng.random::<f64>() * 2.0 * PI;
        for _ in 0..clusters.rays_per_cluster {
            gains.push(complex_gaussian(rng, power));
            aod.push(mean_t + laplacian(rng, clusters.angular_spread));
            aoa.push(mean_r + laplacian(rng, clusters.angular_spread));
        }
    }
    let h = channel_from_rays(tx, rx, &gains, &aod, &aoa, clusters.num_clusters, clusters.rays_per_cluster);
    let svd = Svd::new(&h);
    ChannelRealization { h, gains, aod, aoa, svd }
}

/// Capacity-optimal power split `p_i = max(0, μ − σ_n²/σ_i²)` with `Σ p_i = budget`.
///
/// Modes with zero singular value never receive power.
pub fn waterfill(singular_values: &[f64], noise_var: f64, budget: f64) -> Result<Vec<f64>> {
    // Inverse gains of the usable modes, strongest first.
    let mut modes: Vec<(usize, f64)> =
        singular_values.iter().enumerate().filter(|(_, &s)| s > 0.0).map(|(i, &s)| (i, noise_var / (s * s))).collect();
    if modes.is_empty() {
        return Err(Error::DegenerateChannel);
    }
    modes.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut active = modes.len();
    let mut level = 0.0;
    while active > 0 {
        let floor_sum: f64 = modes[..active].iter().map(|m| m.1).sum();
        level = (budget + floor_sum) / active as f64;
        if level > modes[active - 1].1 {
            break;
        }
        active -= 1;
    }
    let mut p = vec![0.0; singular_values.len()];
    for &(i, inv) in &modes[..active] {
        p[i] = level - inv;
    }
    Ok(p)
}

/// Water level `μ` implied by an allocation (mean of `p_i + σ_n²/σ_i²` over active modes).
pub fn water_level(singular_values: &[f64], noise_var: f64, powers: &[f64]) -> f64 {
    let active: Vec<f64> =
        singular_values.iter().zip(powers).filter(|(_, &p)| p > 0.0).map(|(&s, &p)| p + noise_var / (s * s)).collect();
    active.iter().sum::<f64>() / active.len().max(1) as f64
}

/// Fully digital reference beamformers.
#[derive(Debug, Clone)]
pub struct DigitalReference {
    pub f_dbf: CMat,
    /// Present once the combiner has been derived from the effective channel.
    pub w_dbf: Option<CMat>,
    pub waterfill_powers: Vec<f64>,
}

/// `F_DBF = V_{:,1:N_s} · diag(p)^{1/2}` with `p` water-filled over the `N_s` strongest modes.
pub fn digital_references(
    ch: &ChannelRealization,
    n_streams: usize,
    noise_var: f64,
    budget: f64,
) -> Result<DigitalReference> {
    let rank = ch.svd.rank(RANK_TOL);
    if n_streams == 0 || n_streams > rank {
        return Err(Error::RankDeficient { streams: n_streams, rank });
    }
    let sv = &ch.svd.singular_values[..n_streams];
    let p = waterfill(sv, noise_var, budget)?;
    let amp: Vec<f64> = p.iter().map(|x| x.sqrt()).collect();
    let v = ch.svd.v.columns(0, n_streams).into_owned();
    Ok(DigitalReference { f_dbf: linalg::scale_columns(&v, &amp), w_dbf: None, waterfill_powers: p })
}
