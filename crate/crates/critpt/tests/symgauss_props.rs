use std::f64::consts::PI;

use critpt::numutil::{cholesky, mc_mean, normal_draw};
use critpt::symgauss::{
    abs_quadratic_form_mean, block_covariance, det_abs_exact_l2, det_abs_expectation, det_abs_mean_ab,
    eigen_reduced_integral, iab, sym_dim, sym_from_coords, sym_gauss_matrix_mc, vandermonde_abs, vandermonde_mean,
    z_const, InvariantMetric,
};
use critpt::{Error, McEstimate};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn agree(a: &McEstimate, b: &McEstimate) -> f64 {
    (a.mean - b.mean).abs() / a.std_error.hypot(b.std_error)
}

#[test]
fn vandermonde_mean_against_mc() {
    for n in 2..=4 {
        let m = mc_mean(|s| vandermonde_abs(&normal_draw(s, n)), 400_000, n as u64).unwrap();
        assert!(m.z_score(vandermonde_mean(n)) < 3.5, "N={n}: {m:?} vs {}", vandermonde_mean(n));
    }
    assert_eq!(z_const(1).unwrap(), 1.0);
    assert!((z_const(2).unwrap() - 2f64.sqrt() / PI).abs() < 1e-14);
}

#[test]
fn gaussian_volume_through_eigenvalues() {
    // ∫ e^{−α trA² − β(trA)²} dV_* = π^{D/2} α^{−(D−1)/2} (α+Nβ)^{−1/2}
    for n in [2usize, 3] {
        for (alpha, beta) in [(0.5, 0.0), (1.0, 0.4), (0.8, -0.2)] {
            let r = eigen_reduced_integral(n, alpha, beta, false, 400_000, 5).unwrap();
            let d = sym_dim(n) as f64;
            let want = PI.powf(d / 2.0) * alpha.powf(-(d - 1.0) / 2.0) / (alpha + n as f64 * beta).sqrt();
            assert!(r.matrix.z_score(want) < 3.5, "N={n} ({alpha},{beta}): {:?} vs {want}", r.matrix);
        }
    }
}

#[test]
fn absolute_determinant_through_eigenvalues() {
    for n in [2usize, 3] {
        for (alpha, beta) in [(1.0, 0.0), (0.7, 0.3), (1.0, -0.2)] {
            let e = eigen_reduced_integral(n, alpha, beta, true, 400_000, 6).unwrap();
            let m = sym_gauss_matrix_mc(n, alpha, beta, 400_000, 7).unwrap();
            assert!(agree(&e.matrix, &m) < 3.5, "N={n} ({alpha},{beta}): {:?} vs {m:?}", e.matrix);
        }
    }
}

#[test]
fn positive_definiteness_boundary() {
    assert!(matches!(eigen_reduced_integral(2, 1.0, -0.5, true, 100, 0), Err(Error::Divergent(_))));
    assert!(matches!(eigen_reduced_integral(3, 1.0, -0.34, true, 100, 0), Err(Error::Divergent(_))));
    assert!(eigen_reduced_integral(3, 1.0, -0.33, true, 100, 0).is_ok());
    assert!(matches!(sym_gauss_matrix_mc(2, 1.0, -0.6, 100, 0), Err(Error::Divergent(_))));
}

#[test]
fn invariant_metric_norms() {
    for n in 1..=4 {
        let m = InvariantMetric::new(n, 0.7, 1.3).unwrap();
        let id = DMatrix::<f64>::identity(n, n);
        assert!((m.norm_sq(&id) - 1.0 / (0.7 * 0.7)).abs() < 1e-12);
        if n > 1 {
            let mut h = DMatrix::zeros(n, n);
            h[(0, 1)] = 1.0;
            h[(1, 0)] = 1.0;
            assert!((m.norm_sq(&h) - 2.0 * m.alpha).abs() < 1e-14);
        }
    }
    assert!(InvariantMetric::new(2, 0.0, 1.0).is_err());
}

#[test]
fn det_mean_closed_values() {
    assert!((det_abs_mean_ab(2.0, 0.0, 1e-13).unwrap().value - (2.0 * 2f64.sqrt() - 1.0)).abs() < 1e-11);
    assert!((det_abs_mean_ab(3.0, 1.0, 1e-13).unwrap().value - 4.0 / 3f64.sqrt()).abs() < 1e-11);
    for (a, b) in [(1.8, 1.0), (2.0, 0.0), (3.0, 1.0), (5.0, 4.5)] {
        let one = det_abs_mean_ab(a, b, 1e-13).unwrap().value;
        let whitened = det_abs_exact_l2(&block_covariance(2, a, b), 1e-13).unwrap().value;
        assert!((one - whitened).abs() < 1e-10, "({a},{b}): {one} vs {whitened}");
        let mc = det_abs_expectation(&block_covariance(2, a, b), 200_000, 3).unwrap();
        assert!(mc.z_score(one) < 3.5, "({a},{b}): {mc:?} vs {one}");
        let scale = (2.0 * PI).powf(1.5) * (a * a - b * b).sqrt();
        assert!((iab(a, b, 1e-12).unwrap().value - scale * one).abs() < 1e-9 * scale);
    }
    assert!(det_abs_mean_ab(1.0, 1.0, 1e-10).is_err());
}

#[test]
fn coordinates_roundtrip() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let m = sym_from_coords(3, &x);
    assert_eq!((m[(0, 0)], m[(1, 1)], m[(2, 2)]), (1.0, 2.0, 3.0));
    assert_eq!(m, m.transpose());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quadratic_form_mean_against_mc(a in 0.1f64..3.0, b in 0.1f64..3.0, g in 0.0f64..3.0) {
        let q = abs_quadratic_form_mean(a, b, g, 1e-12).unwrap().value;
        let m = mc_mean(|s| { let w = normal_draw(s, 3); (a * w[0] * w[0] - b * w[1] * w[1] - g * w[2] * w[2]).abs() }, 100_000, 1).unwrap();
        prop_assert!(m.z_score(q) < 4.0, "{:?} vs {}", m, q);
    }

    #[test]
    fn whitened_path_against_mc(entries in prop::collection::vec(-1.0f64..1.0, 9), shift in 0.2f64..1.5) {
        let b = DMatrix::from_vec(3, 3, entries);
        let c = &b * b.transpose() + DMatrix::identity(3, 3) * shift;
        prop_assume!(cholesky(&c).is_ok());
        let q = det_abs_exact_l2(&c, 1e-12).unwrap().value;
        let m = det_abs_expectation(&c, 100_000, 2).unwrap();
        prop_assert!(m.z_score(q) < 4.0, "{:?} vs {}", m, q);
        // flipping the sign of the off-diagonal coordinate leaves E|det| unchanged
        let mut f = c.clone();
        for i in 0..2 { f[(i, 2)] = -f[(i, 2)]; f[(2, i)] = -f[(2, i)]; }
        prop_assert!((det_abs_exact_l2(&f, 1e-12).unwrap().value - q).abs() < 1e-9 * q);
    }
}
