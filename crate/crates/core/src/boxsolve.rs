//! Box-constrained solver for the distortion-diagonal sub-problem
//!
//! ```text
//! min_δ ‖y − Ψ δ‖² + γ·(P_conv Σ_i p(δ_i) [+ ‖Ψ δ‖²])   s.t.  m ≤ δ_i ≤ M
//! ```
//!
//! where column `i` of `Ψ` is `b_i ⊗ a_i` (row `i` of the baseband factor,
//! column `i` of the analog factor) and `p(d) = sqrt(π√3 / (2(1 − d²)))` is
//! the converter power multiplier `2^b`. Only the `L` columns of the
//! Kronecker operator that touch diagonal entries are ever formed, through
//! their Gram matrix.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, CMat, CVec};
use crate::quant::KAPPA;

/// Which power terms enter the penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    /// Power per converter bit step (`P_DAC` or `P_ADC`).
    pub per_bit: f64,
    /// Adds `‖RF·Δ·BB‖²_F`, the radiated-power term of the transmitter.
    pub include_trace: bool,
}

/// Converter power multiplier `p(d) = sqrt(κ / (1 − d²))`.
#[inline]
pub fn converter_penalty(d: f64) -> f64 {
    (KAPPA / (1.0 - d * d)).sqrt()
}

/// `p'(d) = p(d)·d / (1 − d²)`.
#[inline]
pub fn converter_penalty_grad(d: f64) -> f64 {
    converter_penalty(d) * d / (1.0 - d * d)
}

/// `p''(d) = p(d)·(1 + 2d²) / (1 − d²)²`.
#[inline]
pub fn converter_penalty_curv(d: f64) -> f64 {
    let g = 1.0 - d * d;
    converter_penalty(d) * (1.0 + 2.0 * d * d) / (g * g)
}

#[derive(Debug, Clone)]
pub struct BoxProblem {
    /// Hermitian Gram `Ψ^H Ψ` restricted to the diagonal variables.
    pub gram: CMat,
    /// `Ψ^H y`.
    pub lin: CVec,
    /// `‖y‖²`.
    pub offset: f64,
    pub gamma: f64,
    pub penalty: Penalty,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct BoxSolution {
    pub delta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Builds the reduced problem for target `y = vec(target)` and factors
/// `left` (N×L) and `right` (L×K).
///
/// With `a_i` the columns of `left` and `b_i` the rows of `right`,
/// `Gram_ij = (a_i^H a_j)·(b_i^* · b_j)` and `lin_i = a_i^H · target · b_i^*`.
pub fn reduce_problem(
    target: &CMat,
    left: &CMat,
    right: &CMat,
    gamma: f64,
    penalty: Penalty,
    lower: f64,
    upper: f64,
) -> BoxProblem {
    let l = left.ncols();
    let aa = left.adjoint() * left;
    let bb = right * right.adjoint();
    let gram = CMat::from_fn(l, l, |i, j| aa[(i, j)] * bb[(j, i)]);
    let proj = left.adjoint() * target * right.adjoint();
    let lin = CVec::from_fn(l, |i, _| proj[(i, i)]);
    BoxProblem { gram, lin, offset: linalg::frob_sq(target), gamma, penalty, lower, upper }
}

impl BoxProblem {
    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    fn quad(&self) -> DMatrix<f64> {
        self.gram.map(|z| z.re)
    }

    fn lin_re(&self) -> DVector<f64> {
        self.lin.map(|z| z.re)
    }

    /// Weight on `δ^T Re(G) δ`: the fit term plus the optional trace penalty.
    fn quad_weight(&self) -> f64 {
        if self.penalty.include_trace {
            1.0 + self.gamma
        } else {
            1.0
        }
    }

    /// `‖y − Ψδ‖²`, the data-fit part alone.
    pub fn fit(&self, delta: &[f64]) -> f64 {
        let d = DVector::from_column_slice(delta);
        let q = self.quad();
        self.offset - 2.0 * self.lin_re().dot(&d) + d.dot(&(q * &d))
    }

    pub fn objective(&self, delta: &[f64]) -> f64 {
        let d = DVector::from_column_slice(delta);
        let q = self.quad();
        let quad = d.dot(&(q * &d));
        let conv: f64 = delta.iter().map(|&x| converter_penalty(x)).sum();
        self.offset - 2.0 * self.lin_re().dot(&d) + self.quad_weight() * quad + self.gamma * self.penalty.per_bit * conv
    }

    pub fn gradient(&self, delta: &[f64]) -> Vec<f64> {
        let d = DVector::from_column_slice(delta);
        let qd = self.quad() * &d;
        let lin = self.lin_re();
        let w = self.quad_weight();
        (0..delta.len())
            .map(|i| {
                2.0 * w * qd[i] - 2.0 * lin[i] + self.gamma * self.penalty.per_bit * converter_penalty_grad(delta[i])
            })
            .collect()
    }

    fn project(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }
}

/// Projected Newton from the box midpoint.
pub fn solve_box(prob: &BoxProblem, tol: f64, max_iters: usize) -> BoxSolution {
    let mid = 0.5 * (prob.lower + prob.upper);
    solve_box_from(prob, &vec![mid; prob.dim()], tol, max_iters)
}

impl BoxProblem {
    /// Hessian `2w·Re(G) + γP·diag(p''(δ))`.
    pub fn hessian(&self, delta: &[f64]) -> DMatrix<f64> {
        let gp = self.gamma * self.penalty.per_bit;
        let mut h = self.quad() * (2.0 * self.quad_weight());
        for (i, &d) in delta.iter().enumerate() {
            h[(i, i)] += gp * converter_penalty_curv(d);
        }
        h
    }

    /// `‖δ − Π(δ − ∇f/h)‖_∞` with `h` the Hessian diagonal.
    pub fn stationarity(&self, delta: &[f64]) -> f64 {
        self.stationarity_hint(delta, &self.gradient(delta), &self.hessian(delta))
    }
}

/// Search direction: Newton on the coordinates not held at a bound by the
/// gradient, diagonally scaled gradient on the rest.
fn direction(prob: &BoxProblem, x: &[f64], g: &[f64], h: &DMatrix<f64>) -> Vec<f64> {
    let n = x.len();
    let width = prob.upper - prob.lower;
    // Bertsekas' ε-active set: near a bound with the gradient pushing outward.
    let eps = (1e-12 * width).max(prob.stationarity_hint(x, g, h).min(0.1 * width));
    let held: Vec<bool> =
        (0..n).map(|i| (x[i] <= prob.lower + eps && g[i] > 0.0) || (x[i] >= prob.upper - eps && g[i] < 0.0)).collect();
    let free: Vec<usize> = (0..n).filter(|&i| !held[i]).collect();
    let mut d: Vec<f64> = (0..n).map(|i| -g[i] / h[(i, i)].max(1e-300)).collect();
    if !free.is_empty() {
        let hf = DMatrix::from_fn(free.len(), free.len(), |a, b| h[(free[a], free[b])]);
        let gf = DVector::from_fn(free.len(), |a, _| -g[free[a]]);
        if let Some(ch) = hf.cholesky() {
            let step = ch.solve(&gf);
            for (a, &i) in free.iter().enumerate() {
                d[i] = step[a];
            }
        }
    }
    d
}

impl BoxProblem {
    fn stationarity_hint(&self, x: &[f64], g: &[f64], h: &DMatrix<f64>) -> f64 {
        (0..x.len()).map(|i| (x[i] - self.project(x[i] - g[i] / h[(i, i)].max(1e-300))).abs()).fold(0.0, f64::max)
    }
}

/// Projected Newton with Armijo backtracking along the projection arc,
/// warm-started at `start`.
///
/// Coordinates at a bound whose gradient points outward are held fixed;
/// the remaining ones take a Newton step on the exact Hessian (the
/// objective is strictly convex on the box whenever `γP > 0`). Stops when
/// `‖δ − Π(δ − ∇f/h)‖_∞ ≤ tol` with `h` the Hessian diagonal.
pub fn solve_box_from(prob: &BoxProblem, start: &[f64], tol: f64, max_iters: usize) -> BoxSolution {
    let n = prob.dim();
    if n == 0 {
        return BoxSolution { delta: Vec::new(), objective: prob.offset, iterations: 0, converged: true };
    }
    if prob.lower >= prob.upper {
        let x = vec![prob.lower; n];
        return BoxSolution { objective: prob.objective(&x), delta: x, iterations: 0, converged: true };
    }

    let mut x: Vec<f64> = start.iter().map(|&v| prob.project(v)).collect();
    let mut fx = prob.objective(&x);
    let mut converged = false;
    let mut iterations = 0;

    loop {
        let g = prob.gradient(&x);
        let h = prob.hessian(&x);
        if prob.stationarity_hint(&x, &g, &h) <= tol {
            converged = true;
            break;
        }
        if iterations >= max_iters {
            break;
        }
        iterations += 1;

        let d = direction(prob, &x, &g, &h);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-20 {
            let cand: Vec<f64> = (0..n).map(|i| prob.project(x[i] + t * d[i])).collect();
            let f = prob.objective(&cand);
            let decrease: f64 = (0..n).map(|i| g[i] * (cand[i] - x[i])).sum();
            if f <= fx + 1e-4 * decrease.min(0.0) && f < fx {
                accepted = Some((cand, f));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, f)) => {
                x = cand;
                fx = f;
            }
            // No representable decrease along the arc: x is optimal to working precision.
            None => {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!("box solver stopped after {iterations} iterations without reaching tolerance {tol:e}");
    }
    BoxSolution { delta: x, objective: fx, iterations, converged }
}
