//! Trigonometric polynomials on the flat torus T^L spanned by a symmetric set of
//! frequency vectors.

use std::collections::HashSet;
use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::numutil::{map_indices, McEstimate, QuadResult, RngStream, Schedule};
use crate::symgauss::{block_covariance, det_abs_exact_l2, det_abs_expectation, det_abs_mean_ab, sym_pairs};

/// Finite set of lexicographically positive frequency vectors in ℤ^L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialSet {
    pub l: usize,
    pub vectors: Vec<Vec<i64>>,
}

fn lex_positive(m: &[i64]) -> bool {
    m.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

impl MonomialSet {
    pub fn new(vectors: Vec<Vec<i64>>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return invalid("monomial set is empty");
        };
        let l = first.len();
        if l == 0 {
            return invalid("vectors must have length >= 1");
        }
        if l > 8 {
            return invalid("L > 8 is not supported");
        }
        let mut seen = HashSet::new();
        for m in &vectors {
            if m.len() != l {
                return invalid(format!("vector {m:?} has length {}, expected {l}", m.len()));
            }
            if !lex_positive(m) {
                return invalid(format!("vector {m:?} is not lexicographically positive"));
            }
            if !seen.insert(m.clone()) {
                return invalid(format!("duplicate vector {m:?}"));
            }
        }
        for m in &vectors {
            for perm in (0..l).permutations(l) {
                let p: Vec<i64> = perm.iter().map(|&i| m[i]).collect();
                let neg: Vec<i64> = p.iter().map(|x| -x).collect();
                if !seen.contains(&p) && !seen.contains(&neg) {
                    return invalid(format!("set is not symmetric: {m:?} permutes to {p:?}"));
                }
            }
        }
        Ok(Self { l, vectors })
    }

    /// Parse a JSON array of integer arrays such as `[[1,0],[0,1],[1,1]]`.
    pub fn from_json(s: &str) -> Result<Self> {
        let v: Vec<Vec<i64>> = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(format!("monomial set JSON: {e}")))?;
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// dim V(ℳ) = 2|ℳ|.
    pub fn dim(&self) -> usize {
        2 * self.vectors.len()
    }

    pub fn scaled(&self, k: i64) -> Result<Self> {
        if k <= 0 {
            return invalid("scale must be positive");
        }
        Self::new(self.vectors.iter().map(|m| m.iter().map(|x| x * k).collect()).collect())
    }

    /// The same set with coordinates permuted by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let v = self
            .vectors
            .iter()
            .map(|m| {
                let p: Vec<i64> = perm.iter().map(|&i| m[i]).collect();
                if lex_positive(&p) {
                    p
                } else {
                    p.iter().map(|x| -x).collect()
                }
            })
            .collect();
        Self::new(v)
    }
}

/// The Arnold family {(1,0), (0,1), (1,1)}.
pub fn arnold_set() -> MonomialSet {
    MonomialSet { l: 2, vectors: vec![vec![1, 0], vec![0, 1], vec![1, 1]] }
}

/// All lexicographically positive vectors with |m_j| ≤ ν.
pub fn cube_set(l: usize, nu: i64) -> Result<MonomialSet> {
    if l == 0 || nu < 1 {
        return invalid("need L >= 1 and nu >= 1");
    }
    let v: Vec<Vec<i64>> = (0..l)
        .map(|_| -nu..=nu)
        .multi_cartesian_product()
        .filter(|m| lex_positive(m))
        .collect();
    Ok(MonomialSet { l, vectors: v })
}

#[derive(Debug, Clone)]
pub struct TorusCovariance {
    pub l: usize,
    pub a: f64,
    pub b: f64,
    /// Covariance of the Hessian at a point, in the H_ij coordinates.
    pub c: DMatrix<f64>,
    /// Whether C is nonsingular.
    pub nonsingular: bool,
}

pub fn build_covariance(ms: &MonomialSet) -> TorusCovariance {
    let l = ms.l;
    let w = 2.0 / (2.0 * PI).powi(l as i32);
    let sum = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
        w * ms.vectors.iter().map(|m| f(&m.iter().map(|&x| x as f64).collect::<Vec<_>>())).sum::<f64>()
    };
    let a = sum(&|m| m[0] * m[0]);
    let b = if l > 1 { sum(&|m| m[0] * m[1]) } else { 0.0 };
    let pairs = sym_pairs(l);
    let n = pairs.len();
    let c = DMatrix::from_fn(n, n, |p, q| {
        let (i, j) = pairs[p];
        let (k, r) = pairs[q];
        sum(&|m| m[i] * m[j] * m[k] * m[r])
    });
    let ev = SymmetricEigen::new(c.clone()).eigenvalues;
    let max = ev.iter().fold(0f64, |a, &x| a.max(x.abs()));
    let min = ev.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    TorusCovariance { l, a, b, c, nonsingular: max > 0.0 && min > 1e-12 * max }
}

/// Δ_L(a,b) = (a−b)^{L−1}(a+(L−1)b).
pub fn jacobian_delta(l: usize, a: f64, b: f64) -> f64 {
    (a - b).powi(l as i32 - 1) * (a + (l as f64 - 1.0) * b)
}

fn prefactor(cov: &TorusCovariance) -> Result<f64> {
    let delta = jacobian_delta(cov.l, cov.a, cov.b);
    if !(delta > 0.0) {
        return Err(Error::NotAmple(delta));
    }
    if !cov.nonsingular {
        return Err(Error::RankDeficient("Hessian covariance is singular".into()));
    }
    Ok((2.0 * PI).powf(cov.l as f64 / 2.0) / delta.sqrt())
}

/// μ(ℳ) = (2π)^{L/2}Δ_L^{−1/2}E|det X|, X ~ N(0, C), by Monte Carlo.
pub fn expectation(ms: &MonomialSet, n_samples: u64, seed: u64) -> Result<McEstimate> {
    let cov = build_covariance(ms);
    let pre = prefactor(&cov)?;
    Ok(det_abs_expectation(&cov.c, n_samples, seed)?.scaled(pre))
}

/// μ(ℳ) without sampling, for L ≤ 2.
pub fn expectation_exact(ms: &MonomialSet, tol: f64) -> Result<QuadResult> {
    let cov = build_covariance(ms);
    let pre = prefactor(&cov)?;
    match cov.l {
        1 => {
            let v = pre * (2.0 * cov.c[(0, 0)] / PI).sqrt();
            Ok(QuadResult { value: v, abs_err_est: 0.0, n_evals: 1 })
        }
        2 => {
            let r = det_abs_exact_l2(&cov.c, tol / pre)?;
            Ok(QuadResult { value: pre * r.value, abs_err_est: pre * r.abs_err_est, n_evals: r.n_evals })
        }
        l => invalid(format!("no deterministic path for L={l}")),
    }
}

/// ⟨|det X|⟩ under the limiting normalised cube covariance `G_L(9/5, 1) ⊕ 𝟙`.
pub fn cube_det_abs_mean(l: usize, n_samples: u64, seed: u64) -> Result<McEstimate> {
    match l {
        0 => invalid("L must be >= 1"),
        1 => Ok(McEstimate::new((2.0 * 1.8 / PI).sqrt(), 0.0, 1)),
        2 => Ok(McEstimate::new(det_abs_mean_ab(1.8, 1.0, 1e-13)?.value, 0.0, 1)),
        _ => det_abs_expectation(&block_covariance(l, 1.8, 1.0), n_samples, seed),
    }
}

/// lim μ(ℳ_ν^L)/dim V(ℳ_ν^L) = (π/6)^{L/2}⟨|det X|⟩; deterministic for L ≤ 2.
pub fn cube_asymptotic_constant(l: usize, n_samples: u64, seed: u64) -> Result<McEstimate> {
    Ok(cube_det_abs_mean(l, n_samples, seed)?.scaled((PI / 6.0).powf(l as f64 / 2.0)))
}

/// v(x) = Σ_m a_m cos(m·x) + b_m sin(m·x) on T².
#[derive(Debug, Clone)]
pub struct TorusPoly2 {
    pub freqs: Vec<[f64; 2]>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TorusPoly2 {
    pub fn sample(ms: &MonomialSet, stream: RngStream) -> Result<Self> {
        if ms.l != 2 {
            return invalid("T^2 sampling needs L = 2");
        }
        let mut g = stream.normals();
        let n = ms.len();
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            a.push(g.next());
            b.push(g.next());
        }
        let freqs = ms.vectors.iter().map(|m| [m[0] as f64, m[1] as f64]).collect();
        Ok(Self { freqs, a, b })
    }

    /// Gradient and Hessian (h11, h22, h12).
    pub fn grad_hess(&self, x: [f64; 2]) -> ([f64; 2], [f64; 3]) {
        let mut g = [0.0; 2];
        let mut h = [0.0; 3];
        for (k, m) in self.freqs.iter().enumerate() {
            let (s, c) = (m[0] * x[0] + m[1] * x[1]).sin_cos();
            let d1 = -self.a[k] * s + self.b[k] * c;
            let d2 = -(self.a[k] * c + self.b[k] * s);
            g[0] += m[0] * d1;
            g[1] += m[1] * d1;
            h[0] += m[0] * m[0] * d2;
            h[1] += m[1] * m[1] * d2;
            h[2] += m[0] * m[1] * d2;
        }
        (g, h)
    }

    fn scales(&self) -> (f64, f64) {
        let mut g = 0.0;
        let mut h = 0.0;
        for (k, m) in self.freqs.iter().enumerate() {
            let r = self.a[k].abs() + self.b[k].abs();
            let n2 = m[0] * m[0] + m[1] * m[1];
            g += n2.sqrt() * r;
            h += n2 * r;
        }
        (g, h)
    }
}

const NEWTON_ITERS: usize = 50;

fn wrap(x: f64) -> f64 {
    x.rem_euclid(2.0 * PI)
}

fn torus_dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    let d = |a: f64, b: f64| {
        let t = (a - b).abs();
        t.min(2.0 * PI - t)
    };
    d(p[0], q[0]).hypot(d(p[1], q[1]))
}

fn newton(p: &TorusPoly2, mut x: [f64; 2], tol: f64) -> Option<[f64; 2]> {
    let (mut g, mut h) = p.grad_hess(x);
    let mut gn = g[0].hypot(g[1]);
    for _ in 0..NEWTON_ITERS {
        if gn < tol {
            return Some([wrap(x[0]), wrap(x[1])]);
        }
        let det = h[0] * h[1] - h[2] * h[2];
        if det == 0.0 {
            return None;
        }
        let step = [(h[1] * g[0] - h[2] * g[1]) / det, (h[0] * g[1] - h[2] * g[0]) / det];
        let mut lam = 1.0;
        loop {
            let y = [x[0] - lam * step[0], x[1] - lam * step[1]];
            let (g2, h2) = p.grad_hess(y);
            let n2 = g2[0].hypot(g2[1]);
            if n2 < gn || lam < 1e-3 {
                x = y;
                g = g2;
                h = h2;
                gn = n2;
                break;
            }
            lam *= 0.5;
        }
    }
    (gn < tol).then(|| [wrap(x[0]), wrap(x[1])])
}

/// Critical points of `p` found by Newton iteration from the centre of every
/// cell of a `grid × grid` partition, with their Hessian determinants.
pub fn critical_points_t2(p: &TorusPoly2, grid: usize) -> Result<Vec<([f64; 2], f64)>> {
    if grid < 64 {
        return invalid("grid must be >= 64");
    }
    let (gs, hs) = p.scales();
    let tol = 1e-10 * gs.max(1.0);
    let h = 2.0 * PI / grid as f64;
    let mut found: Vec<([f64; 2], f64)> = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let seed = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
            let Some(x) = newton(p, seed, tol) else { continue };
            if found.iter().any(|(y, _)| torus_dist(x, *y) < 1e-6) {
                continue;
            }
            let (_, hh) = p.grad_hess(x);
            let det = hh[0] * hh[1] - hh[2] * hh[2];
            if det.abs() < 1e-10 * hs * hs {
                return Err(Error::Degenerate(format!("degenerate critical point at {x:?}")));
            }
            found.push((x, det));
        }
    }
    Ok(found)
}

#[derive(Debug, Clone, Copy)]
pub struct T2Counts {
    pub mean: McEstimate,
    pub discarded: u64,
}

/// Mean number of critical points on T² by brute force. Samples whose signed
/// count Σ sign det Hess is not 0 are discarded.
pub fn mc_count_critical_t2(ms: &MonomialSet, n_samples: u64, grid: usize, seed: u64) -> Result<T2Counts> {
    mc_count_critical_t2_with(Schedule::default(), ms, n_samples, grid, seed)
}

pub fn mc_count_critical_t2_with(
    schedule: Schedule,
    ms: &MonomialSet,
    n_samples: u64,
    grid: usize,
    seed: u64,
) -> Result<T2Counts> {
    if ms.l != 2 {
        return invalid("brute-force counting needs L = 2");
    }
    if grid < 64 {
        return invalid("grid must be >= 64");
    }
    if n_samples < 2 {
        return invalid("need at least 2 samples");
    }
    let counts = map_indices(schedule, n_samples, |i| {
        let p = TorusPoly2::sample(ms, RngStream::new(seed, i)).ok()?;
        let pts = critical_points_t2(&p, grid).ok()?;
        let index: i64 = pts.iter().map(|(_, d)| if *d > 0.0 { 1 } else { -1 }).sum();
        (index == 0).then_some(pts.len() as f64)
    });
    let good: Vec<f64> = counts.iter().flatten().copied().collect();
    let discarded = n_samples - good.len() as u64;
    if discarded * 100 > n_samples {
        return Err(Error::DataQuality { bad: discarded, total: n_samples });
    }
    Ok(T2Counts { mean: McEstimate::from_values(&good), discarded })
}
