//! Gaussian integrals over real symmetric matrices.
//!
//! Coordinates on Sym_L follow the H_ij basis: diagonal entries first, then the
//! pairs i<j in lexicographic order, with X_ij = X_ji = x_ij.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::numutil::{adaptive_quad, cholesky, det_lu, mc_mean, normal_draw, McEstimate, QuadResult};
use crate::specfun::gamma;

/// L(L+1)/2.
pub fn sym_dim(l: usize) -> usize {
    l * (l + 1) / 2
}

/// The (i, j) index pairs in coordinate order.
pub fn sym_pairs(l: usize) -> Vec<(usize, usize)> {
    let mut p: Vec<(usize, usize)> = (0..l).map(|i| (i, i)).collect();
    for i in 0..l {
        for j in i + 1..l {
            p.push((i, j));
        }
    }
    p
}

pub fn sym_from_coords(l: usize, x: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(l, l);
    for (k, &(i, j)) in sym_pairs(l).iter().enumerate() {
        m[(i, j)] = x[k];
        m[(j, i)] = x[k];
    }
    m
}

fn side_of(dim: usize) -> Result<usize> {
    let l = ((((8 * dim + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    if sym_dim(l) != dim || l == 0 {
        return invalid(format!("covariance size {dim} is not L(L+1)/2"));
    }
    Ok(l)
}

/// Π_{j=1}^N Γ(1+j/2)/Γ(3/2): the mean of |Π_{i<j}(x_i−x_j)| for x ~ N(0, I_N).
pub fn vandermonde_mean(n: usize) -> f64 {
    (1..=n).map(|j| gamma(1.0 + j as f64 / 2.0) / gamma(1.5)).product()
}

/// Z_N = (2π)^{−(D_N−N)/2}·E|Δ(x)|, the eigenvalue normalisation of the
/// Gaussian e^{−tr B²/2} on Sym_N.
pub fn z_const(n: usize) -> Result<f64> {
    if n == 0 {
        return invalid("N must be >= 1");
    }
    let d = sym_dim(n) as f64;
    Ok((2.0 * PI).powf(-(d - n as f64) / 2.0) * vandermonde_mean(n))
}

pub fn vandermonde_abs(x: &[f64]) -> f64 {
    let mut p = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            p *= (x[i] - x[j]).abs();
        }
    }
    p
}

/// Invariant inner product |A|² = β(tr A)² + α tr A² on Sym_N, parametrised by (a, b).
#[derive(Debug, Clone, Copy)]
pub struct InvariantMetric {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub r2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c_n: f64,
    pub d_n: usize,
}

impl InvariantMetric {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 || !(a > 0.0) || !(b > 0.0) {
            return invalid("need N >= 1 and a, b > 0");
        }
        let nf = n as f64;
        let r2 = 4.0 * gamma((nf + 4.0) / 2.0) / PI.powf(nf / 2.0);
        let alpha = 1.0 / (b * b * r2);
        let beta = (1.0 / (nf * a * a) - alpha) / nf;
        let d_n = sym_dim(n);
        let c_n = 1.0 / (a * nf.sqrt() * (b * r2.sqrt()).powi(d_n as i32 - 1));
        Ok(Self { n, a, b, r2, alpha, beta, c_n, d_n })
    }

    pub fn norm_sq(&self, m: &DMatrix<f64>) -> f64 {
        let tr = m.trace();
        self.beta * tr * tr + self.alpha * (m * m).trace()
    }

    /// ∫_{Sym_N} e^{−|A|²}|det A| dV, dV the volume of this metric.
    ///
    /// The volume is C_N times the trace-form volume, so this is C_N times the
    /// matrix integral of [`eigen_reduced_integral`].
    pub fn abs_det_integral(&self, n_samples: u64, seed: u64) -> Result<McEstimate> {
        let r = eigen_reduced_integral(self.n, self.alpha, self.beta, true, n_samples, seed)?;
        Ok(r.matrix.scaled(self.c_n))
    }
}

/// E|det X| for X built from N(0, C) coordinates.
pub fn det_abs_expectation(c: &DMatrix<f64>, n_samples: u64, seed: u64) -> Result<McEstimate> {
    let l = side_of(c.nrows())?;
    let chol = cholesky(c)?;
    let dim = c.nrows();
    mc_mean(
        |s| {
            let w = DVector::from_vec(normal_draw(s, dim));
            let x = &chol * w;
            det_lu(&sym_from_coords(l, x.as_slice())).abs()
        },
        n_samples,
        seed,
    )
}

/// E|α w₁² − β w₂² − γ w₃²| for w ~ N(0, I₃), α, β, γ ≥ 0.
pub fn abs_quadratic_form_mean(alpha: f64, beta: f64, gamma_: f64, tol: f64) -> Result<QuadResult> {
    if alpha < 0.0 || beta < 0.0 || gamma_ < 0.0 {
        return invalid("eigenvalue magnitudes must be nonnegative");
    }
    let g = |th: f64| {
        let (s, c) = th.sin_cos();
        let cc = beta * c * c + gamma_ * s * s;
        if cc + alpha == 0.0 {
            0.0
        } else {
            4.0 * cc.powf(1.5) / (cc + alpha).sqrt() - 2.0 * cc
        }
    };
    let r = adaptive_quad(g, 0.0, PI / 2.0, tol, 1e-13)?;
    Ok(QuadResult {
        value: 2.0 / PI * r.value + alpha,
        abs_err_est: 2.0 / PI * r.abs_err_est,
        n_evals: r.n_evals,
    })
}

/// E|det X| for 2×2 X with coordinates (x₁₁, x₂₂, x₁₂) ~ N(0, C), by whitening
/// det = ξᵀMξ and reducing the indefinite quadratic form to one angle.
pub fn det_abs_exact_l2(c: &DMatrix<f64>, tol: f64) -> Result<QuadResult> {
    if c.nrows() != 3 || c.ncols() != 3 {
        return invalid("L=2 path needs a 3x3 covariance");
    }
    let l = cholesky(c)?;
    let m = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, -1.0]);
    let k = l.transpose() * m * &l;
    let k = (&k + k.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(k).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if !(ev[0] > 0.0 && ev[1] < 0.0 && ev[2] < 0.0) {
        return Err(Error::Internal(format!("unexpected signature of det form: {ev:?}")));
    }
    abs_quadratic_form_mean(ev[0], -ev[1], -ev[2], tol)
}

/// `G_L(a,b) ⊕ 𝟙`, the covariance with a on the diagonal coordinates, b between
/// distinct diagonal coordinates, and identity on the off-diagonal ones.
pub fn block_covariance(l: usize, a: f64, b: f64) -> DMatrix<f64> {
    let d = sym_dim(l);
    DMatrix::from_fn(d, d, |i, j| match (i < l, j < l) {
        (true, true) if i == j => a,
        (true, true) => b,
        (false, false) if i == j => 1.0,
        _ => 0.0,
    })
}

/// ⟨|det X|⟩ for L=2 under `G₂(a,b) ⊕ 𝟙`:
/// (1/2π)∫₀^{2π} 2c₊^{3/2}(c+2)^{−1/2}dθ − b + 1, c = b + a cos 2θ.
pub fn det_abs_mean_ab(a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    if !(a > b && b >= 0.0) {
        return invalid(format!("need a > b >= 0, got a={a}, b={b}"));
    }
    // c > 0 on |θ| < θ*, and the integrand is even with period π
    let th = 0.5 * (-b / a).acos();
    let r = adaptive_quad(
        |t| {
            let c = (b + a * (2.0 * t).cos()).max(0.0);
            2.0 * c.powf(1.5) / (c + 2.0).sqrt()
        },
        0.0,
        th,
        tol,
        1e-13,
    )?;
    Ok(QuadResult {
        value: 4.0 * r.value / (2.0 * PI) - b + 1.0,
        abs_err_est: 4.0 * r.abs_err_est / (2.0 * PI),
        n_evals: r.n_evals,
    })
}

fn iab_scale(a: f64, b: f64) -> f64 {
    (2.0 * PI).powf(1.5) * (a * a - b * b).sqrt()
}

/// I(a,b): the unnormalised Gaussian integral of |det X|, equal to
/// (2π)^{3/2}(a²−b²)^{1/2}⟨|det X|⟩.
pub fn iab(a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    let r = det_abs_mean_ab(a, b, tol / iab_scale(a, b).max(1.0))?;
    let s = iab_scale(a, b);
    Ok(QuadResult { value: s * r.value, abs_err_est: s * r.abs_err_est, n_evals: r.n_evals })
}

pub fn iab_mc(a: f64, b: f64, n_samples: u64, seed: u64) -> Result<McEstimate> {
    if !(a > b && b >= 0.0) {
        return invalid(format!("need a > b >= 0, got a={a}, b={b}"));
    }
    Ok(det_abs_expectation(&block_covariance(2, a, b), n_samples, seed)?.scaled(iab_scale(a, b)))
}

/// Both sides of the eigenvalue reduction.
#[derive(Debug, Clone, Copy)]
pub struct EigenReduced {
    /// ∫_{ℝᴺ} e^{−|x|²/2 − (β/2α)(Σx)²}·(Π|x_i|)·|Δ(x)| dx
    pub eigen: McEstimate,
    /// ∫_{Sym_N} e^{−α tr A² − β(tr A)²}·|det A| dV_*, dV_* the trace-form volume
    pub matrix: McEstimate,
}

/// Eigenvalue integral by importance sampling from N(0, I_N), and the matrix
/// integral it represents.
pub fn eigen_reduced_integral(
    n: usize,
    alpha: f64,
    beta: f64,
    include_abs_det: bool,
    n_samples: u64,
    seed: u64,
) -> Result<EigenReduced> {
    if n == 0 {
        return invalid("N must be >= 1");
    }
    if !(alpha > 0.0) || !(alpha + n as f64 * beta > 0.0) {
        return Err(Error::Divergent(format!("alpha={alpha}, alpha+N*beta={}", alpha + n as f64 * beta)));
    }
    let k = beta / (2.0 * alpha);
    let est = mc_mean(
        |s| {
            let x = normal_draw(s, n);
            let sum: f64 = x.iter().sum();
            let mut w = (-k * sum * sum).exp() * vandermonde_abs(&x);
            if include_abs_det {
                w *= x.iter().map(|v| v.abs()).product::<f64>();
            }
            w
        },
        n_samples,
        seed,
    )?;
    let eigen = est.scaled((2.0 * PI).powf(n as f64 / 2.0));
    let d = sym_dim(n) as f64;
    let hom = if include_abs_det { d + n as f64 } else { d };
    let matrix = eigen.scaled((2.0 * alpha).powf(-hom / 2.0) / z_const(n)?);
    Ok(EigenReduced { eigen, matrix })
}

/// Direct Monte Carlo of ∫_{Sym_N} e^{−α tr A² − β(tr A)²}·|det A| dV_*.
pub fn sym_gauss_matrix_mc(n: usize, alpha: f64, beta: f64, n_samples: u64, seed: u64) -> Result<McEstimate> {
    if !(alpha > 0.0) || !(alpha + n as f64 * beta > 0.0) {
        return Err(Error::Divergent(format!("alpha={alpha}, beta={beta}")));
    }
    let d = sym_dim(n);
    // orthonormal coordinates y: A_ii = y_ii, A_ij = y_ij/√2; precision 2(αI + β·eeᵀ) on the diagonal block
    let prec = DMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j { alpha } else { 0.0 };
        let tr = if i < n && j < n { beta } else { 0.0 };
        2.0 * (diag + tr)
    });
    let cov = prec.clone().try_inverse().ok_or_else(|| Error::Singular("precision".into()))?;
    let chol = cholesky(&cov)?;
    let pairs = sym_pairs(n);
    let est = mc_mean(
        |s| {
            let y = &chol * DVector::from_vec(normal_draw(s, d));
            let mut a = DMatrix::zeros(n, n);
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let v = if i == j { y[k] } else { y[k] / 2f64.sqrt() };
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
            det_lu(&a).abs()
        },
        n_samples,
        seed,
    )?;
    let det_p = 2f64.powi(d as i32) * alpha.powi(d as i32 - 1) * (alpha + n as f64 * beta);
    Ok(est.scaled((2.0 * PI).powf(d as f64 / 2.0) / det_p.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_small() {
        assert_eq!(z_const(1).unwrap(), 1.0);
        let z2 = (2.0 * PI).powf(-0.5) * 2.0 / PI.sqrt();
        assert!((z_const(2).unwrap() - z2).abs() < 1e-15);
    }

    #[test]
    fn folded_normal() {
        let c = DMatrix::from_element(1, 1, 1.8);
        let e = det_abs_expectation(&c, 200_000, 3).unwrap();
        assert!(e.z_score((3.6 / PI).sqrt()).abs() < 4.0);
    }

    #[test]
    fn ab_reduction_special_values() {
        let v = det_abs_mean_ab(2.0, 0.0, 1e-12).unwrap().value;
        assert!((v - (2.0 * 2f64.sqrt() - 1.0)).abs() < 1e-10);
        let v = det_abs_mean_ab(3.0, 1.0, 1e-12).unwrap().value;
        assert!((v - 4.0 / 3f64.sqrt()).abs() < 1e-10);
        assert!(det_abs_mean_ab(1.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn eigen_path_matches_ab_reduction() {
        for &(a, b) in &[(1.8, 1.0), (2.0, 0.0), (3.0, 1.0), (5.0, 4.5)] {
            let x = det_abs_mean_ab(a, b, 1e-12).unwrap().value;
            let y = det_abs_exact_l2(&block_covariance(2, a, b), 1e-12).unwrap().value;
            assert!((x - y).abs() < 1e-9, "({a},{b}): {x} vs {y}");
        }
    }

    #[test]
    fn one_dimensional_eigen_integral() {
        let (alpha, beta) = (1.3, 0.4);
        let r = eigen_reduced_integral(1, alpha, beta, true, 200_000, 1).unwrap();
        assert!(r.eigen.z_score(2.0 / (1.0 + beta / alpha)).abs() < 4.0);
    }

    #[test]
    fn divergent_form_rejected() {
        assert!(matches!(eigen_reduced_integral(3, 1.0, -0.34, true, 100, 0), Err(Error::Divergent(_))));
        assert!(eigen_reduced_integral(3, 1.0, -0.33, true, 100, 0).is_ok());
    }

    #[test]
    fn metric_trace_form() {
        let m = InvariantMetric::new(3, 0.7, 1.1).unwrap();
        assert!((m.alpha + 3.0 * m.beta - 1.0 / (3.0 * 0.49)).abs() < 1e-14);
        let a = sym_from_coords(3, &[1.0, -2.0, 0.5, 0.3, 0.0, 1.0]);
        let tr = a.trace();
        let tr2 = (&a * &a).trace();
        assert!((m.norm_sq(&a) - (m.beta * tr * tr + m.alpha * tr2)).abs() < 1e-14);
    }
}
