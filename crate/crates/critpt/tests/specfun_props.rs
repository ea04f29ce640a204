mod common;

use std::f64::consts::PI;

use critpt::numutil::{adaptive_quad, mc_mean};
use critpt::specfun::{
    ball_sphere_ratio, bernoulli_power_sum, binomial, cnjd, dim_harmonic, dim_poly_space, gamma, legendre,
    legendre_deriv_at_one, legendre_value, monomial_sphere_integral, sphere_area, sphere_gauss_factor,
};
use proptest::prelude::*;

#[test]
fn rodrigues_agreement_grid() {
    for d in 3..=8 {
        for n in 0..=12 {
            for i in 0..=50 {
                let t = -1.0 + i as f64 / 25.0;
                let a = legendre_value(n, d, t);
                let b = common::rodrigues_legendre(n, d, t);
                assert!((a - b).abs() < 1e-10, "n={n} d={d} t={t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn degree_two_closed_form() {
    for d in 3..=9 {
        let df = d as f64;
        for t in [-0.7, 0.0, 0.2, 0.95] {
            let want = (df * t * t - 1.0) / (df - 1.0);
            assert!((legendre_value(2, d, t) - want).abs() < 1e-14);
        }
    }
}

#[test]
fn derivatives_at_one_match_recurrence_polynomial() {
    for d in 3..=7 {
        for n in 1..=9 {
            let p = legendre(n, d).unwrap();
            for j in 0..=n.min(3) {
                let a = legendre_deriv_at_one(n, j, d).unwrap();
                let b = p.eval_deriv(j, 1.0);
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "n={n} j={j} d={d}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn first_derivative_d3_example() {
    for n in 1..=20u32 {
        let nf = n as f64;
        assert!((legendre_deriv_at_one(n, 1, 3).unwrap() - 0.5 * (nf + 1.0) * nf).abs() < 1e-10);
    }
}

#[test]
fn associated_functions_have_unit_norm() {
    // ∫_{-1}^{1} (C_{n,j,d} (1-t²)^{j/2} P^{(j)}(t))² (1-t²)^{(d-3)/2} dt = 1
    for d in 3..=6u32 {
        for n in 0..=6u32 {
            for j in 0..=n.min(2) {
                let p = legendre(n, d).unwrap();
                let c = cnjd(n, j, d).unwrap();
                let w = (d as f64 - 3.0) / 2.0;
                let f = |t: f64| {
                    let s = 1.0 - t * t;
                    (c * s.powf(j as f64 / 2.0) * p.eval_deriv(j, t)).powi(2) * s.powf(w)
                };
                let q = adaptive_quad(f, -1.0, 1.0, 1e-12, 1e-12).unwrap().value;
                assert!((q - 1.0).abs() < 1e-8, "n={n} j={j} d={d}: {q}");
            }
        }
    }
}

#[test]
fn dimensions() {
    assert_eq!(dim_harmonic(3, 3), 7);
    assert_eq!(dim_poly_space(2, 3), 9);
    for d in 3..=6 {
        for nu in 0..=15u32 {
            // V_ν(d) is the restriction of polynomials of degree ≤ ν in d variables modulo |x|² − 1
            let full = binomial((nu + d - 1) as u64, (d - 1) as u64) + binomial((nu + d - 2) as u64, (d - 1) as u64);
            assert_eq!(dim_poly_space(nu, d) as f64, full);
        }
    }
}

#[test]
fn power_sums_exact() {
    for d in 0..=6u32 {
        for nu in [1u64, 2, 7, 30] {
            let direct: u128 = (1..=nu as u128).map(|n| n.pow(d)).sum();
            assert_eq!(bernoulli_power_sum(d, nu), direct, "d={d} nu={nu}");
        }
    }
}

#[test]
fn gauss_to_sphere_example() {
    // N = 3, f = x₁²: ∫ e^{-|x|²} x₁² dx = π^{3/2}/2, sphere value 4π/3
    let g = PI.powf(1.5) / 2.0;
    assert!((g * sphere_gauss_factor(3, 2.0) - 4.0 * PI / 3.0).abs() < 1e-13);
    assert!((monomial_sphere_integral(&[1, 0, 0]) - 4.0 * PI / 3.0).abs() < 1e-13);
    assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-13);
}

#[test]
fn ball_ratio_against_mc() {
    // ℓ = 2, Q(x) = x₁², k = 2, weight (1-|x|²)^{n/2}
    let n = 3u32;
    let num = mc_mean(
        |s| {
            let mut g = s.normals();
            let (x, y) = (2.0 * g.uniform() - 1.0, 2.0 * g.uniform() - 1.0);
            let r2 = x * x + y * y;
            if r2 < 1.0 { 4.0 * x * x * (1.0 - r2).powf(n as f64 / 2.0) } else { 0.0 }
        },
        400_000,
        8,
    )
    .unwrap();
    let den = monomial_sphere_integral(&[1, 0]);
    let want = ball_sphere_ratio(2, 2.0, n);
    assert!(num.scaled(1.0 / den).z_score(want) < 3.5, "{:?} vs {want}", num.scaled(1.0 / den));
}

#[test]
fn monomial_moments_match_sphere_mc() {
    for d in 2..=5usize {
        let mut cases = vec![vec![1u32]];
        if d >= 2 {
            cases.push(vec![1, 1]);
        }
        cases.push(vec![2]);
        for pat in cases {
            let mut h = vec![0u32; d];
            h[..pat.len()].copy_from_slice(&pat);
            let area = sphere_area(d as u32 - 1);
            let hh = h.clone();
            let est = mc_mean(
                move |s| {
                    let x = common::sphere_point(s, d);
                    x.iter().zip(&hh).map(|(v, &k)| v.powi(2 * k as i32)).product::<f64>() * area
                },
                200_000,
                40 + d as u64,
            )
            .unwrap();
            let exact = monomial_sphere_integral(&h);
            assert!(est.z_score(exact) < 3.5, "d={d} h={h:?}: {est:?} vs {exact}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn legendre_bounded_and_normalised(n in 0u32..30, d in 3u32..10, t in -1.0f64..1.0) {
        prop_assert!((legendre_value(n, d, 1.0) - 1.0).abs() < 1e-12);
        prop_assert!(legendre_value(n, d, t).abs() <= 1.0 + 1e-12);
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((legendre_value(n, d, -t) - parity * legendre_value(n, d, t)).abs() < 1e-12);
    }

    #[test]
    fn gamma_recurrence(x in 0.1f64..20.0) {
        prop_assert!((gamma(x + 1.0) / (x * gamma(x)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_area_recurrence(n in 1u32..20) {
        // σ_{n+1} = 2π σ_{n-1} / n
        let lhs = sphere_area(n + 1);
        let rhs = 2.0 * PI * sphere_area(n - 1) / n as f64;
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }
}
