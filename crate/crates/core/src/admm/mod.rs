//! ADMM factorization of a fully digital beamformer into
//! `RF · Δ · BB` with unit-modulus `RF`, box-constrained diagonal `Δ` and a
//! converter power penalty.
//!
//! The augmented Lagrangian is
//!
//! ```text
//! ½‖T − Z‖² + (α/2)‖Z + Λ/α − RF·Δ·BB‖² + γ·P(Δ, …)
//! ```
//!
//! with `T` the target. One sweep updates `Z`, `RF`, `Δ`, `BB` and `Λ` in
//! that order. The transmit and receive designs differ only in the penalty
//! and live in [`tx`] and [`rx`].

pub mod rx;
pub mod tx;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::beamformer::HybridFactors;
use crate::boxsolve::{self, Penalty};
use crate::linalg::{self, c, CMat, ZERO};
use crate::power::Architecture;
use crate::quant::{self, BitRange};

/// Solver knobs shared by both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdmmConfig {
    /// Penalty parameter α.
    pub alpha: f64,
    /// Maximum number of sweeps `N_max`.
    pub max_iters: usize,
    /// Termination tolerances `ε^z = ε^p = rel_tol · ‖T‖_F`.
    pub rel_tol: f64,
    pub box_tol: f64,
    pub box_max_iters: usize,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self { alpha: 1.0, max_iters: 20, rel_tol: 1e-4, box_tol: 1e-8, box_max_iters: 500 }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.alpha > 0.0) || self.max_iters == 0 || !(self.rel_tol > 0.0) || !(self.box_tol > 0.0) {
            return Err(crate::Error::Config(format!(
                "admm needs alpha > 0, max_iters ≥ 1 and positive tolerances, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// How the distortion diagonal is treated during a run.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaMode {
    /// Optimized every sweep against the weighted converter penalty.
    Optimize { gamma: f64, penalty: Penalty },
    /// Held at `δ(bits)`; the Δ-step is skipped.
    Frozen(Vec<u32>),
}

/// Per-sweep diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `‖Z_n − Z_{n−1}‖_F`
    pub z_change: f64,
    /// `‖Z_n − RF·Δ·BB‖_F`
    pub primal_residual: f64,
    /// `‖T − RF·Δ·BB‖² / ‖T‖²`
    pub nmse: f64,
}

impl IterationRecord {
    pub fn nmse_db(&self) -> f64 {
        10.0 * self.nmse.log10()
    }
}

/// Iterates of one ADMM run.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub z: CMat,
    pub lambda: CMat,
    pub rf: CMat,
    pub delta: Vec<f64>,
    pub bb: CMat,
    pub alpha: f64,
    pub iteration: usize,
    pub history: Vec<IterationRecord>,
}

impl AdmmState {
    /// Random start: unit-modulus `RF` with uniform phases, `Δ` uniform on
    /// `[m, M]`, standard complex Gaussian `BB` and `Z` scaled by `1/√L`,
    /// `Λ = 0`.
    pub fn random(
        n_antennas: usize,
        n_chains: usize,
        n_streams: usize,
        range: &BitRange,
        alpha: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let tau = std::f64::consts::TAU;
        let rf = CMat::from_fn(n_antennas, n_chains, |_, _| {
            num_complex::Complex64::from_polar(1.0, tau * rng.random::<f64>())
        });
        let (lo, hi) = (range.lower(), range.upper());
        let delta = (0..n_chains).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
        let s = (0.5 / n_chains as f64).sqrt();
        let mut gauss = |r: usize, k: usize| {
            CMat::from_fn(r, k, |_, _| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                c(s * re, s * im)
            })
        };
        let bb = gauss(n_chains, n_streams);
        let z = gauss(n_antennas, n_streams);
        Self {
            z,
            lambda: CMat::from_element(n_antennas, n_streams, ZERO),
            rf,
            delta,
            bb,
            alpha,
            iteration: 0,
            history: Vec::new(),
        }
    }

    pub fn product(&self) -> CMat {
        linalg::triple_product(&self.rf, &self.delta, &self.bb)
    }
}

/// `Z = (T − Λ + α·RF·Δ·BB) / (α + 1)`.
pub fn update_z(state: &AdmmState, target: &CMat) -> CMat {
    let a = state.alpha;
    (target - &state.lambda + state.product().scale(a)).unscale(a + 1.0)
}

/// Entrywise phase projection onto the unit-modulus set; zeros stay zero.
pub fn project_unit_modulus(a: &CMat) -> CMat {
    a.map(|z| {
        let r = z.norm();
        if r == 0.0 {
            ZERO
        } else {
            z / r
        }
    })
}

/// Unconstrained least-squares RF block before projection:
/// `(Λ + αZ)·BB^H Δ (α Δ BB BB^H Δ)^{-1}`.
pub fn rf_least_squares(state: &AdmmState) -> CMat {
    let a = state.alpha;
    let db = linalg::scale_rows(&state.bb, &state.delta);
    let rhs = (&state.lambda + state.z.scale(a)) * db.adjoint();
    let gram = (&db * db.adjoint()).scale(a);
    // X G = R  ⇔  G^H X^H = R^H, G Hermitian.
    linalg::gram_solve(&gram, &rhs.adjoint()).adjoint()
}

pub fn update_rf(state: &AdmmState) -> CMat {
    project_unit_modulus(&rf_least_squares(state))
}

/// `BB = (α Δ RF^H RF Δ)^{-1} Δ RF^H (Λ + αZ)`.
pub fn update_bb(state: &AdmmState) -> CMat {
    let a = state.alpha;
    let rd = linalg::scale_columns(&state.rf, &state.delta);
    let gram = (rd.adjoint() * &rd).scale(a);
    let rhs = rd.adjoint() * (&state.lambda + state.z.scale(a));
    linalg::gram_solve(&gram, &rhs)
}

/// `Λ ← Λ + α(Z − RF·Δ·BB)`.
pub fn update_lambda(state: &AdmmState) -> CMat {
    &state.lambda + (&state.z - state.product()).scale(state.alpha)
}

/// Δ-step: `min ‖vec(Z + Λ/α) − Ψ δ‖² + γ P(δ)` over the box, with
/// `Ψ = BB ⊗ RF` built from the current analog and baseband factors.
pub fn update_delta(
    state: &AdmmState,
    gamma: f64,
    penalty: Penalty,
    range: &BitRange,
    cfg: &AdmmConfig,
) -> (Vec<f64>, bool) {
    let target = &state.z + state.lambda.unscale(state.alpha);
    let prob = boxsolve::reduce_problem(&target, &state.rf, &state.bb, gamma, penalty, range.lower(), range.upper());
    let sol = boxsolve::solve_box_from(&prob, &state.delta, cfg.box_tol, cfg.box_max_iters);
    (sol.delta, sol.converged)
}

/// Outcome of a full design run.
#[derive(Debug, Clone)]
pub struct Design {
    /// Factors with Δ snapped to the rounded integer resolutions; the
    /// baseband is rescaled so the product matches the last iterate.
    pub factors: HybridFactors,
    /// Final continuous Δ before rounding.
    pub continuous_delta: Vec<f64>,
    pub history: Vec<IterationRecord>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of Δ-steps whose inner solver hit its iteration cap.
    pub box_warnings: usize,
}

impl Design {
    /// NMSE of the rounded factors against `target`.
    pub fn final_nmse(&self, target: &CMat) -> f64 {
        nmse(target, &self.factors.product())
    }
}

pub fn nmse(target: &CMat, approx: &CMat) -> f64 {
    let denom = linalg::frob_sq(target);
    if denom == 0.0 {
        return linalg::frob_sq(approx);
    }
    linalg::frob_sq(&(target - approx)) / denom
}

/// Runs the Z → RF → Δ → BB → Λ cycle until both residuals drop below
/// `rel_tol·‖T‖_F` or `max_iters` sweeps are done.
pub fn factorize(
    target: &CMat,
    n_chains: usize,
    range: &BitRange,
    mode: &DeltaMode,
    cfg: &AdmmConfig,
    rng: &mut impl Rng,
) -> Design {
    let (n_ant, n_streams) = target.shape();
    let mut state = AdmmState::random(n_ant, n_chains, n_streams, range, cfg.alpha, rng);
    if let DeltaMode::Frozen(bits) = mode {
        state.delta = quant::deltas_of_bits(bits);
    }
    run(&mut state, target, range, mode, cfg)
}

/// Continues an existing state; see [`factorize`].
pub fn run(state: &mut AdmmState, target: &CMat, range: &BitRange, mode: &DeltaMode, cfg: &AdmmConfig) -> Design {
    let eps = cfg.rel_tol * linalg::frob(target);
    let (lo, hi) = (range.lower(), range.upper());
    let mut converged = false;
    let mut box_warnings = 0;

    while state.iteration < cfg.max_iters {
        state.iteration += 1;
        let z_prev = state.z.clone();
        state.z = update_z(state, target);
        state.rf = update_rf(state);
        if let DeltaMode::Optimize { gamma, penalty } = mode {
            let (d, ok) = update_delta(state, *gamma, *penalty, range, cfg);
            state.delta = d;
            box_warnings += usize::from(!ok);
        }
        state.bb = update_bb(state);
        state.lambda = update_lambda(state);

        debug_assert!(state.rf.iter().all(|z| z.norm() == 0.0 || (z.norm() - 1.0).abs() < 1e-12));
        debug_assert!(matches!(mode, DeltaMode::Frozen(_)) || state.delta.iter().all(|&d| d >= lo && d <= hi));

        let product = state.product();
        let rec = IterationRecord {
            iteration: state.iteration,
            z_change: linalg::frob(&(&state.z - &z_prev)),
            primal_residual: linalg::frob(&(&state.z - &product)),
            nmse: nmse(target, &product),
        };
        state.history.push(rec);
        if rec.z_change <= eps && rec.primal_residual <= eps {
            converged = true;
            break;
        }
    }

    let bits = match mode {
        DeltaMode::Frozen(bits) => bits.clone(),
        DeltaMode::Optimize { .. } => quant::quantize_bits(&state.delta, range),
    };
    // Snap Δ to the realizable resolutions and let the baseband absorb the
    // ratio, so the product (and the fit) is unchanged by the rounding.
    let delta = quant::deltas_of_bits(&bits);
    let ratio: Vec<f64> = state.delta.iter().zip(&delta).map(|(c, q)| c / q).collect();
    let factors = HybridFactors {
        rf: state.rf.clone(),
        bb: linalg::scale_rows(&state.bb, &ratio),
        delta,
        bits,
        arch: Architecture::Hybrid,
    };
    Design {
        factors,
        continuous_delta: state.delta.clone(),
        history: state.history.clone(),
        iterations: state.iteration,
        converged,
        box_warnings,
    }
}
