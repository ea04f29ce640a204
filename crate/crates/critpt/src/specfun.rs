//! Gamma-type special functions, sphere areas, Bernoulli power sums, Legendre
//! polynomials of order d and the sphere/Gaussian integral conversions.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Falling factorial [x]_k = x(x-1)...(x-k+1), with [x]_0 = 1.
pub fn falling(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |p, i| p * (x - i as f64))
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |p, i| p * (n - i) as f64 / (i + 1) as f64)
}

fn binomial_exact(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Area of the unit sphere Sⁿ ⊂ ℝⁿ⁺¹.
pub fn sphere_area(n: u32) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Polynomial in t stored by ascending monomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreEval {
    pub n: u32,
    pub d: u32,
    pub coeffs: Vec<f64>,
}

impl LegendreEval {
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// j-th derivative evaluated at t.
    pub fn eval_deriv(&self, j: u32, t: f64) -> f64 {
        let j = j as usize;
        let mut acc = 0.0;
        for (k, c) in self.coeffs.iter().enumerate().skip(j).rev() {
            acc = acc * t + c * falling(k as f64, j as u32);
        }
        acc
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }
}

/// P_{n,d} by the three-term recurrence, normalised so that P_{n,d}(1) = 1.
pub fn legendre(n: u32, d: u32) -> Result<LegendreEval> {
    if d < 2 {
        return invalid(format!("legendre needs d >= 2, got {d}"));
    }
    let df = d as f64;
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    if n == 0 {
        return Ok(LegendreEval { n, d, coeffs: prev });
    }
    for k in 1..n {
        let kf = k as f64;
        let mut next = vec![0.0; k as usize + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += (2.0 * kf + df - 2.0) * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= kf * c;
        }
        for c in next.iter_mut() {
            *c /= kf + df - 2.0;
        }
        prev = cur;
        cur = next;
    }
    Ok(LegendreEval { n, d, coeffs: cur })
}

/// P_{n,d}(t) by running the recurrence on values; stable for large n.
pub fn legendre_value(n: u32, d: u32, t: f64) -> f64 {
    let df = d as f64;
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + df - 2.0) * t * p1 - kf * p0) / (kf + df - 2.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// P^{(j)}_{n,d}(1) = [n]_j (n+d-2)(n+d-1)...(n+d+j-3) / Π_{i<j} (d-1+2i).
///
/// For d = 3 this is 2^{-j} C(n+j, j) [n]_j.
pub fn legendre_deriv_at_one(n: u32, j: u32, d: u32) -> Result<f64> {
    if j > n {
        return invalid(format!("derivative order {j} exceeds degree {n}"));
    }
    let (nf, df) = (n as f64, d as f64);
    let mut v = 1.0;
    for i in 0..j {
        let i = i as f64;
        v *= (nf - i) * (nf + df - 2.0 + i) / (df - 1.0 + 2.0 * i);
    }
    Ok(v)
}

/// The normalising constant C_{n,j,d} of the associated Legendre functions.
pub fn cnjd(n: u32, j: u32, d: u32) -> Result<f64> {
    if j > n || d < 3 {
        return invalid(format!("cnjd needs 0 <= j <= n and d >= 3, got n={n} j={j} d={d}"));
    }
    let (nf, df) = (n as f64, d as f64);
    let lead = falling(nf + df - 3.0, d - 3) / gamma((df - 1.0) / 2.0);
    let inner = (2.0 * nf + df - 2.0)
        / (2f64.powi(d as i32 - 2) * falling(nf + df + j as f64 - 3.0, 2 * j + d - 3));
    Ok(lead * inner.sqrt())
}

/// M(n, d), the dimension of degree-n spherical harmonics on S^{d-1}.
pub fn dim_harmonic(n: u32, d: u32) -> u128 {
    if n == 0 {
        return 1;
    }
    let (n, d) = (n as u64, d as u64);
    binomial_exact(n + d - 1, d - 1) - binomial_exact(n + d - 3, d - 1)
}

/// N_ν = Σ_{n ≤ ν} M(n, d).
pub fn dim_poly_space(nu: u32, d: u32) -> u128 {
    (0..=nu).map(|n| dim_harmonic(n, d)).sum()
}

/// Factor 2/Γ((N+ℓ)/2) turning ∫_{ℝ^N} e^{-|x|²} f into ∫_{S^{N-1}} f for f
/// positively homogeneous of degree ℓ.
pub fn sphere_gauss_factor(n: u32, ell: f64) -> f64 {
    2.0 / gamma((n as f64 + ell) / 2.0)
}

/// I_n(Q)/J_n(Q): ball integral weighted by (1-|x|²)^{n/2} over the sphere
/// integral, for |Q| homogeneous of degree k on an ℓ-dimensional space.
pub fn ball_sphere_ratio(ell: u32, k: f64, n: u32) -> f64 {
    let (l, nf) = (ell as f64, n as f64);
    (ln_gamma((l + k) / 2.0) + ln_gamma(nf / 2.0 + 1.0) - ln_gamma((nf + l + k) / 2.0 + 1.0)).exp()
        / 2.0
}

/// ∫_{S^{d-1}} Π x_i^{2h_i} dS, with d = h.len().
pub fn monomial_sphere_integral(h: &[u32]) -> f64 {
    let d = h.len() as f64;
    let tot: u32 = h.iter().sum();
    let num: f64 = h.iter().map(|&hi| ln_gamma(hi as f64 + 0.5)).sum();
    2.0 * (num - ln_gamma(tot as f64 + d / 2.0)).exp()
}

/// Bernoulli polynomials B_0..=B_D with exact rational coefficients.
#[derive(Debug, Clone)]
pub struct BernoulliTable {
    pub polys: Vec<Vec<BigRational>>,
}

impl BernoulliTable {
    pub fn new(max_degree: usize) -> Self {
        // Bernoulli numbers with B_1 = -1/2 from Σ_{k<m} C(m+1,k) B_k = -(m+1) B_m
        let mut b: Vec<BigRational> = vec![BigRational::one()];
        for m in 1..=max_degree {
            let mut s = BigRational::zero();
            for (k, bk) in b.iter().enumerate() {
                s += BigRational::from_integer(BigInt::from(binomial_exact(m as u64 + 1, k as u64))) * bk;
            }
            b.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
        }
        let polys = (0..=max_degree)
            .map(|n| {
                let mut p = vec![BigRational::zero(); n + 1];
                for k in 0..=n {
                    let c = BigRational::from_integer(BigInt::from(binomial_exact(n as u64, k as u64)));
                    p[n - k] += c * &b[k];
                }
                p
            })
            .collect();
        Self { polys }
    }

    pub fn number(&self, k: usize) -> &BigRational {
        &self.polys[k][0]
    }

    pub fn eval(&self, k: usize, x: &BigRational) -> BigRational {
        self.polys[k].iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }
}

/// Σ_{n=1}^ν n^d = (B_{d+1}(ν+1) − B_{d+1})/(d+1), exactly.
pub fn bernoulli_power_sum(d: u32, nu: u64) -> u128 {
    let t = BernoulliTable::new(d as usize + 1);
    let x = BigRational::from_integer(BigInt::from(nu + 1));
    let k = d as usize + 1;
    // B_{d+1}(1) equals B_{d+1} except at d = 0, where it gives the right count
    let v = (t.eval(k, &x) - t.eval(k, &BigRational::one())) / BigRational::from_integer(BigInt::from(k));
    debug_assert!(v.is_integer());
    v.to_integer().to_u128().expect("power sum fits in u128")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn sphere_areas() {
        assert!(close(sphere_area(1), 2.0 * PI, 1e-14));
        assert!(close(sphere_area(2), 4.0 * PI, 1e-14));
        assert!(close(sphere_area(3), 2.0 * PI * PI, 1e-14));
        assert!(close(sphere_area(0), 2.0, 1e-14));
    }

    #[test]
    fn gamma_accuracy() {
        assert!(close(gamma(0.5), PI.sqrt(), 1e-14));
        assert!(close(gamma(10.0), 362880.0, 1e-14));
        assert!(close(gamma(150.5) / gamma(149.5), 149.5, 1e-12));
    }

    #[test]
    fn legendre_low_degree() {
        for d in 2..9 {
            let p = legendre(2, d).unwrap();
            let df = d as f64;
            for &t in &[-0.7, 0.1, 0.9] {
                assert!(close(p.eval(t), (df * t * t - 1.0) / (df - 1.0), 1e-14));
            }
        }
        // d = 2 gives Chebyshev polynomials
        let p = legendre(5, 2).unwrap();
        assert!(close(p.eval(0.3), (5.0 * 0.3f64.acos()).cos(), 1e-12));
    }

    #[test]
    fn legendre_normalisation_and_degree() {
        for d in 2..=8 {
            for n in 0..=20 {
                let p = legendre(n, d).unwrap();
                // the monomial form loses a few digits to alternating coefficients
                assert!(close(p.eval(1.0), 1.0, 1e-9), "n={n} d={d}: {}", p.eval(1.0));
                assert_eq!(p.degree(), n as usize);
                assert!(close(legendre_value(n, d, 1.0), 1.0, 1e-12));
            }
        }
    }

    #[test]
    fn first_derivative_at_one() {
        for n in 1..10 {
            let nf = n as f64;
            assert!(close(legendre_deriv_at_one(n, 1, 3).unwrap(), 0.5 * (nf + 1.0) * nf, 1e-14));
            for j in 0..=n {
                let b = 2f64.powi(-(j as i32)) * binomial((n + j) as u64, j as u64) * falling(nf, j);
                assert!(close(legendre_deriv_at_one(n, j, 3).unwrap(), b, 1e-13));
            }
        }
        for d in 2..9 {
            for n in 1..12 {
                let want = (n * (n + d - 2)) as f64 / (d - 1) as f64;
                assert!(close(legendre_deriv_at_one(n, 1, d).unwrap(), want, 1e-14));
            }
        }
        assert!(legendre_deriv_at_one(2, 3, 3).is_err());
    }

    #[test]
    fn derivatives_match_recurrence_polynomial() {
        for d in 3..=6 {
            for n in 0..=12 {
                let p = legendre(n, d).unwrap();
                for j in 0..=n {
                    let a = p.eval_deriv(j, 1.0);
                    let b = legendre_deriv_at_one(n, j, d).unwrap();
                    assert!(close(a, b, 1e-9), "n={n} j={j} d={d}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn cnjd_three_dimensional_form() {
        for n in 0..15u32 {
            for j in 0..=n {
                let fact = |k: u32| (1..=k).fold(1.0, |p, i| p * i as f64);
                let want = ((n as f64 + 0.5) * fact(n - j) / fact(n + j)).sqrt();
                assert!(close(cnjd(n, j, 3).unwrap(), want, 1e-13));
            }
            assert!(close(cnjd(n, 0, 3).unwrap(), (n as f64 + 0.5).sqrt(), 1e-14));
        }
        for n in 1..10u32 {
            let nf = n as f64;
            let lhs = cnjd(n, 1, 3).unwrap() * legendre_deriv_at_one(n, 1, 3).unwrap();
            let rhs = 0.5 * nf * (nf + 1.0) * ((2.0 * nf + 1.0) / (2.0 * nf * (nf + 1.0))).sqrt();
            assert!(close(lhs, rhs, 1e-13));
        }
    }

    #[test]
    fn harmonic_dimensions() {
        for d in 2..9u32 {
            assert_eq!(dim_harmonic(0, d), 1);
            assert_eq!(dim_harmonic(1, d), d as u128);
            assert_eq!(dim_harmonic(2, d), binomial_exact(d as u64 + 1, 2) - 1);
            for n in 1..30u32 {
                let f = (2 * n + d - 2) as f64 / (n + d - 2) as f64 * binomial((n + d - 2) as u64, (d - 2) as u64);
                assert!(close(dim_harmonic(n, d) as f64, f, 1e-12));
            }
        }
        assert_eq!(dim_harmonic(2, 3), 5);
        assert_eq!(dim_harmonic(7, 2), 2);
        let nu = 200u32;
        let r = dim_poly_space(nu, 3) as f64 / (2.0 * (nu as f64).powi(2) / 2.0);
        assert!((r - 1.0).abs() < 0.02, "{r}");
    }

    #[test]
    fn gauss_factor() {
        assert!(close(sphere_gauss_factor(2, 0.0), 2.0, 1e-14));
        // ∫_{ℝ³} e^{-|x|²} x₁² = π^{3/2}/2
        let g = PI.powf(1.5) / 2.0;
        assert!(close(sphere_gauss_factor(3, 2.0) * g, 4.0 * PI / 3.0, 1e-14));
    }

    #[test]
    fn monomial_integrals() {
        assert!(close(monomial_sphere_integral(&[0, 0, 0]), 4.0 * PI, 1e-14));
        assert!(close(monomial_sphere_integral(&[1, 0, 0]), 4.0 * PI / 3.0, 1e-14));
        assert!(close(monomial_sphere_integral(&[1, 1]), PI / 4.0, 1e-14));
    }

    #[test]
    fn ball_sphere_ratio_value() {
        // ∫_{B²}|x|²(1-|x|²)² / ∫_{S¹}|x|² = (π/12)/(2π)
        assert!(close(ball_sphere_ratio(2, 2.0, 4), 1.0 / 24.0, 1e-14));
    }

    #[test]
    fn bernoulli_sums() {
        assert_eq!(bernoulli_power_sum(2, 4), 30);
        assert_eq!(bernoulli_power_sum(4, 3), 98);
        let direct: u128 = (1..=100u128).map(|n| n.pow(5)).sum();
        assert_eq!(bernoulli_power_sum(5, 100), direct);
        let t = BernoulliTable::new(12);
        assert_eq!(bernoulli_power_sum(0, 7), 7);
        for d in 1..=10usize {
            for nu in 1..=50u64 {
                let x = BigRational::from_integer(BigInt::from(nu + 1));
                let lhs = t.eval(d + 1, &x) - t.number(d + 1);
                let s: u128 = (1..=nu as u128).map(|n| n.pow(d as u32)).sum();
                let rhs = BigRational::from_integer(BigInt::from(s * (d as u128 + 1)));
                assert_eq!(lhs, rhs, "d={d} nu={nu}");
            }
        }
    }
}
