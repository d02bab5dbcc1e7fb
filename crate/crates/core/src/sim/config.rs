//! Experiment description, loaded from TOML.
//!
//! ```toml
//! schema_version = 1
//! trials = 200
//! base_seed = 1
//! schemes = ["proposed", "hybrid-1bit", "hybrid-8bit", "digital", "brute-force"]
//!
//! [system]
//! n_t = 32
//! n_r = 5
//! l_t = 5
//! l_r = 5
//! n_s = 5
//!
//! [sweep]
//! snr_db = [-10, -5, 0, 5, 10, 15, 20]
//! gamma_t = [0.001]
//! gamma_r = [0.5]
//! ```
//!
//! Every table except `system` is optional and every field has a default.
//! Unknown keys are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::admm::AdmmConfig;
use crate::baselines::BruteForceConfig;
use crate::channel::{ArrayGeometry, ClusterParams};
use crate::designer::{LinkSetup, SystemDims};
use crate::error::{Error, Result};
use crate::metrics;
use crate::power::PowerModel;
use crate::quant::BitRange;

pub const SCHEMA_VERSION: u32 = 1;

/// A transceiver design evaluated at every trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    /// Hybrid array with every converter at this resolution.
    HybridFixed(u32),
    /// Fully digital array at the top of the bit range.
    Digital,
    BruteForce,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Proposed => f.write_str("proposed"),
            Scheme::HybridFixed(b) => write!(f, "hybrid-{b}bit"),
            Scheme::Digital => f.write_str("digital"),
            Scheme::BruteForce => f.write_str("brute-force"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Scheme::Proposed),
            "digital" => Ok(Scheme::Digital),
            "brute-force" => Ok(Scheme::BruteForce),
            _ => s
                .strip_prefix("hybrid-")
                .and_then(|rest| rest.strip_suffix("bit"))
                .and_then(|b| b.parse().ok())
                .map(Scheme::HybridFixed)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "unknown scheme {s:?}; expected proposed, hybrid-<b>bit, digital or brute-force"
                    ))
                }),
        }
    }
}

impl Serialize for Scheme {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub num_clusters: usize,
    pub rays_per_cluster: usize,
    /// One power per cluster; a single value is repeated for every cluster.
    pub cluster_power: Vec<f64>,
    /// Laplacian scale of the per-ray angle offsets, radians.
    pub angular_spread: f64,
    /// Element spacing in wavelengths, both arrays.
    pub element_spacing: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        let c = ClusterParams::default();
        Self {
            num_clusters: c.num_clusters,
            rays_per_cluster: c.rays_per_cluster,
            cluster_power: vec![1.0],
            angular_spread: c.angular_spread,
            element_spacing: 0.5,
        }
    }
}

impl ChannelConfig {
    pub fn clusters(&self) -> ClusterParams {
        let cluster_powers = match self.cluster_power.as_slice() {
            [p] => vec![*p; self.num_clusters],
            ps => ps.to_vec(),
        };
        ClusterParams {
            num_clusters: self.num_clusters,
            rays_per_cluster: self.rays_per_cluster,
            cluster_powers,
            angular_spread: self.angular_spread,
        }
    }

    pub fn geometry(&self, n: usize) -> ArrayGeometry {
        ArrayGeometry { num_elements: n, element_spacing: self.element_spacing }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BitsConfig {
    pub min_bits: u32,
    pub max_bits: u32,
}

impl Default for BitsConfig {
    fn default() -> Self {
        let r = BitRange::default();
        Self { min_bits: r.min_bits, max_bits: r.max_bits }
    }
}

/// Values swept over. Empty dimension lists fall back to `[system]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub snr_db: Vec<f64>,
    pub gamma_t: Vec<f64>,
    pub gamma_r: Vec<f64>,
    /// Pair `gamma_t[i]` with `gamma_r[i]` instead of taking their product.
    pub zip_gammas: bool,
    pub n_t: Vec<usize>,
    pub n_r: Vec<usize>,
    pub l_t: Vec<usize>,
    pub l_r: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            snr_db: vec![10.0],
            gamma_t: vec![0.001],
            gamma_r: vec![0.5],
            zip_gammas: false,
            n_t: Vec::new(),
            n_r: Vec::new(),
            l_t: Vec::new(),
            l_r: Vec::new(),
        }
    }
}

fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Proposed, Scheme::HybridFixed(1), Scheme::HybridFixed(8), Scheme::Digital]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    pub system: SystemDims,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub bits: BitsConfig,
    #[serde(default)]
    pub power: PowerModel,
    #[serde(default)]
    pub admm: AdmmConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub bruteforce: BruteForceConfig,
}

fn default_trials() -> u64 {
    200
}

fn default_seed() -> u64 {
    1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            trials: default_trials(),
            base_seed: default_seed(),
            schemes: default_schemes(),
            system: SystemDims::default(),
            channel: ChannelConfig::default(),
            bits: BitsConfig::default(),
            power: PowerModel::default(),
            admm: AdmmConfig::default(),
            sweep: SweepConfig::default(),
            bruteforce: BruteForceConfig::default(),
        }
    }
}

/// One coordinate of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub gamma_t: f64,
    pub gamma_r: f64,
    pub dims: SystemDims,
}

impl SweepPoint {
    /// Words hashed into every trial seed of this point.
    pub fn seed_words(&self) -> [u64; 8] {
        let d = self.dims;
        [
            self.snr_db.to_bits(),
            self.gamma_t.to_bits(),
            self.gamma_r.to_bits(),
            d.n_t as u64,
            d.n_r as u64,
            d.l_t as u64,
            d.l_r as u64,
            d.n_s as u64,
        ]
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config always serializes")
    }

    pub fn range(&self) -> Result<BitRange> {
        BitRange::new(self.bits.min_bits, self.bits.max_bits)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::NoSchemes);
        }
        let range = self.range()?;
        for s in &self.schemes {
            if let Scheme::HybridFixed(b) = s {
                if !range.iter().any(|x| x == *b) {
                    return Err(Error::Config(format!(
                        "scheme {s} lies outside the bit range [{}, {}]",
                        range.min_bits, range.max_bits
                    )));
                }
            }
        }
        self.channel.clusters().validate()?;
        self.channel.geometry(1).validate()?;
        self.power.validate()?;
        self.admm.validate()?;
        let sw = &self.sweep;
        if sw.snr_db.is_empty() || sw.gamma_t.is_empty() || sw.gamma_r.is_empty() {
            return Err(Error::Config("sweep.snr_db, sweep.gamma_t and sweep.gamma_r need at least one value".into()));
        }
        if sw.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("sweep.snr_db values must be finite".into()));
        }
        if sw.gamma_t.iter().chain(&sw.gamma_r).any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(Error::Config("trade-off weights must be finite and nonnegative".into()));
        }
        if sw.zip_gammas && sw.gamma_t.len() != sw.gamma_r.len() {
            return Err(Error::Config("zip_gammas needs gamma_t and gamma_r of equal length".into()));
        }
        for p in self.points() {
            p.dims.validate()?;
        }
        Ok(())
    }

    /// Sweep grid in a fixed order: SNR outermost, then the trade-off
    /// weights, then `n_t`, `n_r`, `l_t`, `l_r`.
    pub fn points(&self) -> Vec<SweepPoint> {
        let sw = &self.sweep;
        let or = |v: &Vec<usize>, d: usize| if v.is_empty() { vec![d] } else { v.clone() };
        let gammas: Vec<(f64, f64)> = if sw.zip_gammas {
            sw.gamma_t.iter().copied().zip(sw.gamma_r.iter().copied()).collect()
        } else {
            sw.gamma_t.iter().flat_map(|&t| sw.gamma_r.iter().map(move |&r| (t, r))).collect()
        };
        let s = self.system;
        let mut out = Vec::new();
        for &snr_db in &sw.snr_db {
            for &(gamma_t, gamma_r) in &gammas {
                for &n_t in &or(&sw.n_t, s.n_t) {
                    for &n_r in &or(&sw.n_r, s.n_r) {
                        for &l_t in &or(&sw.l_t, s.l_t) {
                            for &l_r in &or(&sw.l_r, s.l_r) {
                                let dims = SystemDims { n_t, n_r, l_t, l_r, n_s: s.n_s };
                                out.push(SweepPoint { snr_db, gamma_t, gamma_r, dims });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Link setup at one sweep point.
    pub fn setup(&self, point: &SweepPoint) -> Result<LinkSetup> {
        Ok(LinkSetup {
            dims: point.dims,
            noise_var: metrics::noise_var_of_snr_db(point.snr_db),
            range: self.range()?,
            power: self.power,
            admm: self.admm,
            gamma_t: point.gamma_t,
            gamma_r: point.gamma_r,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "schema_version = 1\n[system]\nn_t = 8\nn_r = 4\nl_t = 2\nl_r = 2\nn_s = 2\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.trials, 200);
        assert_eq!(cfg.schemes.len(), 4);
        assert_eq!(cfg.points().len(), 1);
        assert_eq!(cfg.points()[0].dims.n_t, 8);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}[admm]\nalpah = 2.0\n");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("alpah"), "{err}");
    }

    #[test]
    fn empty_scheme_list_is_an_error() {
        let text = format!("schemes = []\n{MINIMAL}");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(matches!(err, Error::NoSchemes));
        assert_eq!(err.to_string(), "no schemes enabled");
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let text = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::Proposed, Scheme::HybridFixed(3), Scheme::Digital, Scheme::BruteForce] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("hybrid-xbit".parse::<Scheme>().is_err());
    }

    #[test]
    fn grid_is_cartesian_unless_zipped() {
        let mut cfg = ExperimentConfig::default();
        cfg.sweep.gamma_t = vec![0.001, 0.01, 0.1];
        cfg.sweep.gamma_r = vec![0.001, 0.01, 0.1];
        cfg.sweep.snr_db = vec![0.0, 10.0];
        assert_eq!(cfg.points().len(), 18);
        cfg.sweep.zip_gammas = true;
        let pts = cfg.points();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[1].gamma_t, pts[1].gamma_r), (0.01, 0.01));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn infeasible_dimensions_are_rejected() {
        let text = MINIMAL.replace("l_t = 2", "l_t = 9");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
