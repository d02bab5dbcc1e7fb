//! Energy-efficient hybrid beamforming with per-converter bit allocation.
//!
//! The precoder and combiner are each written as a three-factor product
//! `RF · Δ · BB`: a unit-modulus phase-shifter network, a diagonal of
//! quantizer distortion parameters (one per DAC/ADC) and a baseband matrix.
//! [`admm`] fits these factors to the fully digital beamformers while
//! trading rate for converter power; [`baselines`] and [`sim`] compare the
//! result against fixed-resolution architectures over seeded Monte-Carlo
//! trials.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod baselines;
pub mod beamformer;
pub mod boxsolve;
pub mod channel;
pub mod designer;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod power;
pub mod quant;
pub mod seed;
pub mod sim;

pub use beamformer::{HybridCombiner, HybridFactors, HybridPrecoder};
pub use designer::{LinkResult, LinkSetup, SystemDims};
pub use error::{Error, Result};
pub use metrics::LinkMetrics;
pub use power::PowerModel;
pub use quant::BitRange;
pub use sim::{ExperimentConfig, Scheme, SweepPoint, TrialRecord};
