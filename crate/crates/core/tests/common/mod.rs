//! Independent oracles shared by the integration and acceptance tests. Each
//! returns the measured error so callers can both assert and report it.

#![allow(dead_code)]

use std::path::PathBuf;

use hybridbeam::admm::{self, rx, tx, AdmmConfig, AdmmState};
use hybridbeam::boxsolve::{self, Penalty};
use hybridbeam::channel;
use hybridbeam::linalg::{self, c, CMat, CVec};
use hybridbeam::quant::{self, BitRange};
use hybridbeam::{metrics, ExperimentConfig, HybridFactors, PowerModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn gauss(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    let s = 0.5f64.sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(s * re, s * im)
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Planted `RF⁰ Δ⁰ BB⁰` targets factored at γ = 0. Returns the median
/// transmit NMSE (32×5, 200 sweeps) and the worst receive NMSE (5×5,
/// default 20 sweeps), both in dB, over 20 instances.
pub fn planted_recovery() -> (f64, f64) {
    let range = BitRange::default();
    let model = PowerModel::default();
    let plant = |n: usize, l: usize, rng: &mut ChaCha8Rng| {
        let rf = admm::project_unit_modulus(&gauss(n, l, rng));
        let bits: Vec<u32> = (0..l).map(|_| rng.random_range(1..=8)).collect();
        linalg::triple_product(&rf, &quant::deltas_of_bits(&bits), &gauss(l, 5, rng))
    };
    let (mut t, mut r) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let target = plant(32, 5, &mut rng);
        let cfg = AdmmConfig { max_iters: 200, ..Default::default() };
        t.push(db(tx::design_tx(&target, 5, 0.0, &range, &model, &cfg, &mut rng).final_nmse(&target)));
        let target = plant(5, 5, &mut rng);
        r.push(
            db(rx::design_rx(&target, 5, 0.0, &range, &model, &AdmmConfig::default(), &mut rng).final_nmse(&target)),
        );
    }
    (median(t), r.into_iter().fold(f64::MIN, f64::max))
}

/// Largest per-coordinate gap between the box solver and a two-level dense
/// grid search on random two-variable instances.
pub fn boxsolve_grid_error() -> f64 {
    let range = BitRange::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for (gamma, trace) in [(0.0, false), (1e-4, false), (1e-3, true), (0.01, false), (0.1, true), (10.0, false)] {
        // Planted interior optimum plus noise so the minimizer is not pinned to a bound.
        let (left, right) = (gauss(6, 2, &mut rng), gauss(2, 3, &mut rng));
        let planted = [0.8 + 0.1 * rng.random::<f64>(), 0.9 + 0.09 * rng.random::<f64>()];
        let target = linalg::triple_product(&left, &planted, &right) + gauss(6, 3, &mut rng).scale(0.05);
        let p = boxsolve::reduce_problem(
            &target,
            &left,
            &right,
            gamma,
            Penalty { per_bit: 0.1, include_trace: trace },
            range.lower(),
            range.upper(),
        );
        let s = boxsolve::solve_box(&p, 1e-10, 500);
        let n = 200;
        let search = |lo: [f64; 2], hi: [f64; 2]| {
            let mut best = (f64::INFINITY, [0.0; 2]);
            for i in 0..n {
                for j in 0..n {
                    let x = [
                        lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64,
                        lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64,
                    ];
                    let f = p.objective(&x);
                    if f < best.0 {
                        best = (f, x);
                    }
                }
            }
            best.1
        };
        let coarse = search([p.lower; 2], [p.upper; 2]);
        let h = (p.upper - p.lower) / (n - 1) as f64;
        let fine = search(coarse.map(|x| (x - h).max(p.lower)), coarse.map(|x| (x + h).min(p.upper)));
        for (got, want) in s.delta.iter().zip(fine) {
            worst = worst.max((got - want).abs());
        }
    }
    worst
}

/// Relative Frobenius error between the closed-form noise covariance and a
/// 10⁵-draw sample covariance of the post-combiner noise.
pub fn r_eta_sampling_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (n_t, n_r, n_s) = (6, 4, 2);
    let phases = |r: usize, k: usize, rng: &mut ChaCha8Rng| admm::project_unit_modulus(&gauss(r, k, rng));
    let f = HybridFactors::new(phases(n_t, 3, &mut rng), vec![1, 2, 4], gauss(3, n_s, &mut rng)).unwrap();
    let w = HybridFactors::new(phases(n_r, 3, &mut rng), vec![2, 1, 3], gauss(3, n_s, &mut rng)).unwrap();
    let h = gauss(n_r, n_t, &mut rng);
    let sigma2 = 0.2;
    let (c_t, c_r) = (f.noise_cov(), w.noise_cov());
    let closed = metrics::r_eta(&w, &f.rf, &c_t, &c_r, &h, sigma2).unwrap();

    let wh = w.product().adjoint();
    let a = &wh * &h * &f.rf;
    let bh = w.bb.adjoint();
    let draw = |var: f64, rng: &mut ChaCha8Rng| {
        let s = (var / 2.0).sqrt();
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(s * re, s * im)
    };
    let samples = 100_000;
    let mut acc = CMat::zeros(n_s, n_s);
    for _ in 0..samples {
        let e_t = CVec::from_fn(3, |i, _| draw(c_t[i], &mut rng));
        let e_r = CVec::from_fn(3, |i, _| draw(c_r[i], &mut rng));
        let n = CVec::from_fn(n_r, |_, _| draw(sigma2, &mut rng));
        let eta = &a * e_t + &bh * e_r + &wh * n;
        acc += &eta * eta.adjoint();
    }
    linalg::frob(&(acc.unscale(samples as f64) - &closed)) / linalg::frob(&closed)
}

/// Worst KKT residual of water-filling over random instances: budget
/// mismatch, water-level spread on active modes, and floor violations on
/// inactive ones, all relative.
pub fn waterfill_kkt_residual() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let k = rng.random_range(1..=8);
        let sv: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-2.0..1.0))).collect();
        let noise = 10f64.powf(rng.random_range(-2.0..1.0));
        let budget = rng.random_range(0.1..10.0);
        let p = channel::waterfill(&sv, noise, budget).unwrap();
        let total: f64 = p.iter().sum();
        worst = worst.max((total - budget).abs() / budget);
        let mu = channel::water_level(&sv, noise, &p);
        for (s, pi) in sv.iter().zip(&p) {
            let floor = noise / (s * s);
            if *pi > 0.0 {
                worst = worst.max((pi + floor - mu).abs() / mu);
            } else {
                worst = worst.max(((mu - floor) / mu).max(0.0));
            }
        }
    }
    worst
}

fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Worst relative disagreement between analytic and central-difference
/// derivatives: the converter penalty, the full box objective, and the
/// augmented Lagrangian at the closed-form Z and BB updates (whose gradient
/// must vanish, measured relative to the gradient before the update).
pub fn gradient_check_error() -> f64 {
    let range = BitRange::default();
    let (lo, hi) = (range.lower(), range.upper());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;

    for _ in 0..20 {
        let d = lo + (hi - lo) * 0.999 * rng.random::<f64>();
        let g = boxsolve::converter_penalty_grad(d);
        let fd = central(boxsolve::converter_penalty, d, 1e-6 * (1.0 - d));
        worst = worst.max(((g - fd) / g).abs());
    }

    let p = boxsolve::reduce_problem(
        &gauss(8, 4, &mut rng),
        &gauss(8, 4, &mut rng),
        &gauss(4, 4, &mut rng),
        0.01,
        Penalty { per_bit: 0.1, include_trace: true },
        lo,
        hi,
    );
    for _ in 0..20 {
        let x: Vec<f64> = (0..4).map(|_| lo + (hi - lo) * 0.99 * rng.random::<f64>()).collect();
        let g = p.gradient(&x);
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..4 {
            let at = |t: f64| {
                let mut y = x.clone();
                y[i] = t;
                p.objective(&y)
            };
            worst = worst.max((g[i] - central(at, x[i], 1e-6 * (1.0 - x[i]))).abs() / scale);
        }
    }

    let t = gauss(10, 3, &mut rng);
    let mut s = AdmmState::random(10, 4, 3, &range, 1.3, &mut rng);
    s.lambda = gauss(10, 3, &mut rng).scale(0.3);
    let block = |s: &AdmmState, which: u8| -> f64 {
        let mut norm: f64 = 0.0;
        let shape = if which == 0 { s.z.shape() } else { s.bb.shape() };
        for i in 0..shape.0 {
            for j in 0..shape.1 {
                for dir in [c(1.0, 0.0), c(0.0, 1.0)] {
                    let at = |h: f64| {
                        let mut y = s.clone();
                        let m = if which == 0 { &mut y.z } else { &mut y.bb };
                        m[(i, j)] += dir * h;
                        lagrangian(&y, &t)
                    };
                    norm = norm.max(central(at, 0.0, 1e-6).abs());
                }
            }
        }
        norm
    };
    let before = block(&s, 0);
    s.z = admm::update_z(&s, &t);
    worst = worst.max(block(&s, 0) / before);
    let before = block(&s, 1);
    s.bb = admm::update_bb(&s);
    worst = worst.max(block(&s, 1) / before);
    worst
}

/// `½‖T − Z‖² + Re⟨Λ, Z − P⟩ + (α/2)‖Z − P‖²`.
pub fn lagrangian(s: &AdmmState, t: &CMat) -> f64 {
    let r = &s.z - s.product();
    0.5 * linalg::frob_sq(&(t - &s.z)) + (s.lambda.adjoint() * &r).trace().re + 0.5 * s.alpha * linalg::frob_sq(&r)
}

/// Worst errors of the resolution round trip on the quarter-bit grid and of
/// the `2^b` identity at integer resolutions.
pub fn quantization_identity_errors() -> (f64, f64) {
    let r = BitRange::default();
    let round_trip = (0..=28)
        .map(|q| 1.0 + 0.25 * q as f64)
        .map(|b| (quant::bits_of_delta(quant::delta_of_bits(b).unwrap(), &r).unwrap() - b).abs())
        .fold(0.0, f64::max);
    let power = (1..=8u32)
        .map(|b| {
            let want = (b as f64).exp2();
            let got = quant::two_pow_bits_of_delta(quant::delta_of_bits(b as f64).unwrap()).unwrap();
            ((got - want) / want).abs()
        })
        .fold(0.0, f64::max);
    (round_trip, power)
}
