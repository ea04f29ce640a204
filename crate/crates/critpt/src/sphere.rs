//! Random polynomials on round spheres S^{d−1}: the finite-ν expectation of
//! critical points, its large-ν constant, the S² eigenspace case and the
//! product-sphere growth exponent.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Dyn};

use crate::error::{invalid, Result};
use crate::numutil::{adaptive_quad, det_lu, mc_mean, normal_draw, McEstimate, QuadResult};
use crate::specfun::{cnjd, dim_poly_space, gamma, legendre_deriv_at_one, monomial_sphere_integral, sphere_area};
use crate::symgauss::abs_quadratic_form_mean;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSums {
    pub nu: u32,
    pub d: u32,
    pub r: f64,
    pub r0: f64,
    pub r_beta: f64,
    pub ell: usize,
}

fn ell_of(d: u32) -> usize {
    (d * (d - 1) / 2) as usize
}

fn degree_terms(n: u32, d: u32) -> Result<(f64, f64, f64)> {
    let sigma = sphere_area(d - 2);
    let p1 = legendre_deriv_at_one(n, 1, d)?;
    let r = (d as f64 - 1.0) / sigma * (cnjd(n, 1, d)? * p1).powi(2);
    let r0 = (cnjd(n, 0, d)? * p1).powi(2) / sigma;
    let rb = if n >= 2 { (cnjd(n, 2, d)? * legendre_deriv_at_one(n, 2, d)?).powi(2) } else { 0.0 };
    Ok((r, r0, rb))
}

/// The three variance sums of the gradient and Hessian at a point.
pub fn sphere_sums(nu: u32, d: u32) -> Result<SphereSums> {
    if nu < 2 || d < 3 {
        return invalid(format!("need nu >= 2 and d >= 3, got nu={nu} d={d}"));
    }
    let (mut r, mut r0, mut rb) = (0.0, 0.0, 0.0);
    for n in 1..=nu {
        let t = degree_terms(n, d)?;
        r += t.0;
        r0 += t.1;
        rb += t.2;
    }
    Ok(SphereSums { nu, d, r, r0, r_beta: rb, ell: ell_of(d) })
}

/// Sums for the single eigenspace of degree n.
pub fn eigenspace_sums(n: u32, d: u32) -> Result<SphereSums> {
    if n < 2 || d < 3 {
        return invalid(format!("need n >= 2 and d >= 3, got n={n} d={d}"));
    }
    let (r, r0, rb) = degree_terms(n, d)?;
    Ok(SphereSums { nu: n, d, r, r0, r_beta: rb, ell: ell_of(d) })
}

fn lead(d: u32) -> f64 {
    let df = d as f64;
    2f64.powi(d as i32 - 3) * gamma((df - 1.0) / 2.0).powi(2)
}

/// Limits of r/ν^{d+1}, r0/ν^{d+3} and r_β/ν^{d+3}.
pub fn limit_constants(d: u32) -> (f64, f64, f64) {
    let df = d as f64;
    let s = sphere_area(d - 2);
    let rbar = 1.0 / (s * (df + 1.0) * (df - 1.0) * lead(d));
    let rbar0 = 1.0 / (s * (df + 3.0) * (df - 1.0).powi(2) * lead(d));
    let rbar_b = 1.0 / ((df + 3.0) * lead(d) * ((df - 1.0) * (df + 1.0)).powi(2));
    (rbar, rbar0, rbar_b)
}

/// A(u) = r0^{1/2}u₀𝟙 + Σ_β r_β^{1/2}u_βH_β on Sym_{d−1}.
#[derive(Debug, Clone)]
pub struct HessianField {
    pub d: u32,
    pub r0_sqrt: f64,
    pub r_beta_sqrt: f64,
    /// Hessians at 0 of an L²(S^{d−2})-orthonormal basis of degree-2 harmonics on ℝ^{d−1}.
    pub h_beta: Vec<DMatrix<f64>>,
}

/// Hessians of an orthonormal basis of degree-2 harmonic polynomials in N variables.
pub fn harmonic_hessians(n: usize) -> Vec<DMatrix<f64>> {
    let mom = |pows: &[(usize, u32)]| {
        let mut h = vec![0u32; n];
        for &(i, p) in pows {
            h[i] += p;
        }
        monomial_sphere_integral(&h)
    };
    let nf = n as f64;
    let area = mom(&[]);
    // the family N x_i² − |x|², i < N−1, orthonormalised through its Gram matrix
    let k = n - 1;
    let gram = DMatrix::from_fn(k, k, |i, j| {
        nf * nf * mom(&[(i, 1), (j, 1)]) - nf * (mom(&[(i, 1)]) + mom(&[(j, 1)])) + area
    });
    let l = gram.cholesky().expect("Gram matrix of independent harmonics").l();
    let linv = l.try_inverse().expect("triangular factor");
    let hess_p: Vec<DMatrix<f64>> = (0..k)
        .map(|i| {
            let mut m = DMatrix::from_diagonal_element(n, n, -2.0);
            m[(i, i)] += 2.0 * nf;
            m
        })
        .collect();
    let mut out = Vec::new();
    for b in 0..k {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..=b {
            m += &hess_p[i] * linv[(b, i)];
        }
        out.push(m);
    }
    for i in 0..n {
        for j in i + 1..n {
            let c = 1.0 / mom(&[(i, 1), (j, 1)]).sqrt();
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = c;
            m[(j, i)] = c;
            out.push(m);
        }
    }
    out
}

impl HessianField {
    pub fn new(d: u32, r0: f64, r_beta: f64) -> Result<Self> {
        if d < 3 || !(r0 > 0.0) || !(r_beta > 0.0) {
            return invalid("need d >= 3 and positive r0, r_beta");
        }
        Ok(Self { d, r0_sqrt: r0.sqrt(), r_beta_sqrt: r_beta.sqrt(), h_beta: harmonic_hessians(d as usize - 1) })
    }

    pub fn ell(&self) -> usize {
        self.h_beta.len() + 1
    }

    pub fn matrix(&self, u: &[f64]) -> DMatrix<f64> {
        let n = self.d as usize - 1;
        let mut a = DMatrix::from_diagonal_element_generic(Dyn(n), Dyn(n), self.r0_sqrt * u[0]);
        for (h, &x) in self.h_beta.iter().zip(&u[1..]) {
            a += h * (self.r_beta_sqrt * x);
        }
        a
    }

    /// E|det A(z)| for z ~ N(0, I_ℓ).
    pub fn abs_det_mc(&self, n_samples: u64, seed: u64) -> Result<McEstimate> {
        let l = self.ell();
        mc_mean(|s| det_lu(&self.matrix(&normal_draw(s, l))).abs(), n_samples, seed)
    }

    /// E|det A(z)| for d = 3, where det A = r0 z₀² − r_β κ (z₁² + z₂²).
    pub fn abs_det_exact(&self, tol: f64) -> Result<QuadResult> {
        if self.d != 3 {
            return invalid("the one-angle reduction is only available for d = 3");
        }
        let kappa = -self.h_beta[0].determinant();
        let q = self.r_beta_sqrt.powi(2) * kappa;
        abs_quadratic_form_mean(self.r0_sqrt.powi(2), q, q, tol)
    }

    /// ∫_{S^{ℓ−1}}|det A(u)|dS from the Gaussian mean E|det A(z)|.
    pub fn sphere_integral_from_gauss(&self, gauss_mean: f64) -> f64 {
        let l = self.ell() as f64;
        let k = self.d as f64 - 1.0;
        2.0 * PI.powf(l / 2.0) / gamma((l + k) / 2.0) * 2f64.powf(-k / 2.0) * gauss_mean
    }
}

/// σ_{d−1}(2πr)^{−(d−1)/2}: the area of the sphere times the density of the
/// gradient at 0.
fn kac_rice_prefactor(d: u32, r: f64) -> f64 {
    sphere_area(d - 1) * (2.0 * PI * r).powf(-(d as f64 - 1.0) / 2.0)
}

fn estimate_from(sums: &SphereSums, n_samples: u64, seed: u64, exact: bool) -> Result<McEstimate> {
    let f = HessianField::new(sums.d, sums.r0, sums.r_beta)?;
    let g = if exact {
        McEstimate::new(f.abs_det_exact(1e-13)?.value, 0.0, 1)
    } else {
        f.abs_det_mc(n_samples, seed)?
    };
    Ok(g.scaled(kac_rice_prefactor(sums.d, sums.r)))
}

/// μ(S^{d−1}, V_ν) by Monte Carlo in ℓ = C(d,2) dimensions.
pub fn expectation_sphere(nu: u32, d: u32, n_samples: u64, seed: u64) -> Result<McEstimate> {
    let s = sphere_sums(nu, d)?;
    estimate_from(&s, n_samples, seed, false)
}

/// μ(S², V_ν) through the one-angle reduction.
pub fn expectation_sphere_exact(nu: u32) -> Result<f64> {
    let s = sphere_sums(nu, 3)?;
    Ok(estimate_from(&s, 0, 0, true)?.mean)
}

/// K_d = lim μ(S^{d−1}, V_ν)/dim V_ν(d), by Monte Carlo.
pub fn kd_constant(d: u32, n_samples: u64, seed: u64) -> Result<McEstimate> {
    kd_impl(d, n_samples, seed, false)
}

/// K_3 through the one-angle reduction.
pub fn kd_constant_exact3() -> Result<f64> {
    Ok(kd_impl(3, 0, 0, true)?.mean)
}

fn kd_impl(d: u32, n_samples: u64, seed: u64, exact: bool) -> Result<McEstimate> {
    if d < 3 {
        return invalid("d must be >= 3");
    }
    let (rbar, rbar0, rbar_b) = limit_constants(d);
    let s = SphereSums { nu: 0, d, r: rbar, r0: rbar0, r_beta: rbar_b, ell: ell_of(d) };
    // dim V_ν(d) ~ 2ν^{d−1}/(d−1)!
    let fact: f64 = (1..d).map(|k| k as f64).product();
    Ok(estimate_from(&s, n_samples, seed, exact)?.scaled(fact / 2.0))
}

/// μ(S², V_ν)/dim V_ν(3) by the one-angle reduction.
pub fn sphere_ratio_exact3(nu: u32) -> Result<f64> {
    Ok(expectation_sphere_exact(nu)? / dim_poly_space(nu, 3) as f64)
}

/// Expected number of critical points of a random degree-n spherical harmonic on S².
pub fn s2_harmonic_expectation(n: u32) -> Result<f64> {
    let s = eigenspace_sums(n, 3)?;
    Ok(estimate_from(&s, 0, 0, true)?.mean)
}

/// The same quantity by Monte Carlo over the Hessian field.
pub fn s2_harmonic_expectation_mc(n: u32, n_samples: u64, seed: u64) -> Result<McEstimate> {
    let s = eigenspace_sums(n, 3)?;
    estimate_from(&s, n_samples, seed, false)
}

/// lim μ(𝒴_n)/n² on S².
pub fn s2_asymptotic() -> f64 {
    2.0 / 3f64.sqrt()
}

/// π^{−3/2}∫_{ℝ³} e^{−|u|²}(2n(n+1)u₀² − (n+2)(n−1)(u₁²+u₂²)) du, which is 2.
pub fn gauss_bonnet_check(n: u32) -> Result<f64> {
    if n < 2 {
        return invalid("n must be >= 2");
    }
    let m0 = adaptive_quad(|x| (-x * x).exp(), -12.0, 12.0, 1e-15, 1e-15)?.value;
    let m2 = adaptive_quad(|x| x * x * (-x * x).exp(), -12.0, 12.0, 1e-15, 1e-15)?.value;
    let nf = n as f64;
    let beta = nf * (nf + 1.0);
    let alpha = (nf + 2.0) * (nf - 1.0);
    Ok((2.0 * beta * m2 * m0 * m0 - alpha * 2.0 * m2 * m0 * m0) / PI.powf(1.5))
}

/// Growth exponent on S^{d1−1} × S^{d2−1} when the degree cutoffs scale with ratio r.
pub fn varpi(d1: u32, d2: u32, r: f64) -> Result<f64> {
    if d1 < 2 || d2 < 2 {
        return invalid("d1, d2 must be >= 2");
    }
    if !(r >= 1.0) {
        return invalid(format!("r must be >= 1, got {r}"));
    }
    if (d1 - 2) * (d2 - 2) == 0 {
        return Ok(1.0);
    }
    let (a, b) = (d1 as f64, d2 as f64);
    Ok(((a - 3.0) * r + b + 1.0) / ((a - 1.0) * r + b - 1.0))
}
