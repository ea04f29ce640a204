//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use critpt::circle::TrigPoly1D;
use critpt::numutil::RngStream;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// P_{n,d}(t) from the Rodrigues formula, by exact term-list differentiation of
/// (1 − t²)^{n+α}, α = (d−3)/2.
pub fn rodrigues_legendre(n: u32, d: u32, t: f64) -> f64 {
    let alpha = (d as f64 - 3.0) / 2.0;
    // key (k, j): coefficient of t^k (1 − t²)^{n + α − j}
    let mut terms: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    terms.insert((0, 0), 1.0);
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (&(k, j), &c) in &terms {
            if k > 0 {
                *next.entry((k - 1, j)).or_insert(0.0) += c * k as f64;
            }
            let e = n as f64 + alpha - j as f64;
            *next.entry((k + 1, j + 1)).or_insert(0.0) += -2.0 * e * c;
        }
        terms = next;
    }
    let w = 1.0 - t * t;
    let deriv: f64 = terms
        .iter()
        .map(|(&(k, j), &c)| c * t.powi(k as i32) * w.powi((n - j) as i32))
        .sum();
    // R_n = 2^{−n}/[n+α]_n with [x]_n = x(x−1)...(x−n+1), then × (−1)^n
    let mut r = 0.5f64.powi(n as i32);
    for i in 0..n {
        r /= n as f64 + alpha - i as f64;
    }
    if n % 2 == 1 {
        r = -r;
    }
    r * deriv
}

/// Number of zeros of v′ on the circle from the eigenvalues of the companion
/// matrix of z^ν·v′ written as a Laurent polynomial in z = e^{iθ}.
pub fn companion_zero_count(p: &TrigPoly1D) -> usize {
    let nu = p.nu;
    let deg = 2 * nu;
    let mut c = vec![Complex64::new(0.0, 0.0); deg + 1];
    for m in 1..=nu {
        let mf = m as f64;
        c[nu + m] = Complex64::new(mf * p.b[m], mf * p.a[m]) * 0.5;
        c[nu - m] = Complex64::new(mf * p.b[m], -mf * p.a[m]) * 0.5;
    }
    let lead = c[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -c[deg - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let ev = comp.schur().eigenvalues().expect("complex Schur converges");
    ev.iter().filter(|z| (z.norm() - 1.0).abs() < 1e-6).count()
}

/// Uniform point on S^{d−1}.
pub fn sphere_point(stream: RngStream, d: usize) -> Vec<f64> {
    let x = critpt::numutil::normal_draw(stream, d);
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter().map(|v| v / r).collect()
}
