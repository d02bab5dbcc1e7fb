//! Small dense complex linear-algebra helpers on top of nalgebra.
//!
//! Everything here works on `DMatrix<Complex64>`; matrices in this crate are
//! at most a few dozen rows, so clarity wins over blocking or BLAS.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Squared Frobenius norm.
pub fn frob_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frob(m: &CMat) -> f64 {
    frob_sq(m).sqrt()
}

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

/// `(M + M^H) / 2`, removes round-off asymmetry before a Hermitian factorization.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `A · diag(d)` without materializing the diagonal matrix.
pub fn scale_columns(a: &CMat, d: &[f64]) -> CMat {
    let mut out = a.clone();
    for (j, &dj) in d.iter().enumerate() {
        out.column_mut(j).scale_mut(dj);
    }
    out
}

/// `diag(d) · A`.
pub fn scale_rows(a: &CMat, d: &[f64]) -> CMat {
    let mut out = a.clone();
    for (i, &di) in d.iter().enumerate() {
        out.row_mut(i).scale_mut(di);
    }
    out
}

/// `A · diag(d) · B`, the three-factor product used throughout.
pub fn triple_product(a: &CMat, d: &[f64], b: &CMat) -> CMat {
    scale_columns(a, d) * b
}

/// Thin SVD `H = U Σ V^H` with singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v: CMat,
}

impl Svd {
    pub fn new(h: &CMat) -> Self {
        let svd = h.clone().svd(true, true);
        let u = svd.u.expect("svd requested u");
        let v_t = svd.v_t.expect("svd requested v_t");
        let s = svd.singular_values;

        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
        let k = order.len();
        let mut us = CMat::zeros(h.nrows(), k);
        let mut vs = CMat::zeros(h.ncols(), k);
        let mut sv = Vec::with_capacity(k);
        for (dst, &src) in order.iter().enumerate() {
            us.set_column(dst, &u.column(src));
            vs.set_column(dst, &v_t.row(src).adjoint());
            sv.push(s[src]);
        }
        Self { u: us, singular_values: sv, v: vs }
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        if smax <= 0.0 {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > rel_tol * smax).count()
    }

    pub fn reconstruct(&self) -> CMat {
        triple_product(&self.u, &self.singular_values, &self.v.adjoint())
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Solves `A X = B` for Hermitian positive-definite `A` through a Cholesky factorization.
pub fn hpd_solve(a: &CMat, b: &CMat) -> Option<CMat> {
    let chol = Cholesky::new(hermitize(a))?;
    Some(chol.solve(b))
}

/// `log2 det(I + M)` for Hermitian positive semidefinite `M`.
pub fn log2_det_identity_plus(m: &CMat) -> Result<f64> {
    let n = m.nrows();
    let a = hermitize(m) + CMat::identity(n, n);
    let chol = Cholesky::new(a).ok_or(Error::DegenerateCombiner)?;
    let l = chol.l_dirty();
    let ln_det: f64 = (0..n).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
    Ok(ln_det / std::f64::consts::LN_2)
}

/// Solves `G X = B` for a Hermitian Gram matrix `G`, adding a ridge of
/// `1e-10 · tr(G)/n` when `G` is numerically singular
/// (smallest eigenvalue below `1e-12` times the largest).
pub fn gram_solve(g: &CMat, b: &CMat) -> CMat {
    let n = g.nrows();
    let g = hermitize(g);
    let eig = hermitian_eigenvalues(&g);
    let (lo, hi) = (eig[0], eig[n - 1]);
    if !(hi > 0.0) {
        // Nothing to invert; zero is the minimum-norm least-squares answer.
        return CMat::zeros(n, b.ncols());
    }
    let mut reg = g.clone();
    if lo < 1e-12 * hi {
        let ridge = 1e-10 * trace_re(&g) / n as f64;
        for i in 0..n {
            reg[(i, i)] += ridge;
        }
    }
    match Cholesky::new(reg.clone()) {
        Some(chol) => chol.solve(b),
        // Still indefinite after the ridge: fall back to LU, then to zeros.
        None => reg.lu().solve(b).unwrap_or_else(|| CMat::zeros(n, b.ncols())),
    }
}

/// Largest eigenvalue of a real symmetric PSD matrix by power iteration.
pub fn power_iteration(q: &DMatrix<f64>, iters: usize) -> f64 {
    let n = q.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = q * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = v.dot(&w);
        v = w / norm;
    }
    // A Rayleigh quotient can undershoot; the row-sum bound caps from above.
    let gersh = (0..n).map(|i| q.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    lambda.max(0.0).min(gersh).max(1e-300)
}
