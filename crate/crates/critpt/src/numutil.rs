//! Deterministic random streams, Monte Carlo reduction, adaptive quadrature and
//! small dense linear algebra.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// One independent random substream, addressed by `(seed, stream_id)`.
///
/// Monte Carlo drivers use the sample index as `stream_id`, so a sample's
/// draws never depend on which worker evaluates it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn normals(&self) -> NormalSampler {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        NormalSampler { rng }
    }
}

/// Standard normal variates by inverse CDF, one 53-bit uniform per draw.
pub struct NormalSampler {
    rng: ChaCha8Rng,
}

impl NormalSampler {
    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        let k = self.rng.next_u64() >> 11;
        (k as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next(&mut self) -> f64 {
        inv_normal_cdf(self.uniform())
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.next();
        }
    }
}

/// Quantile function of N(0,1).
pub fn inv_normal_cdf(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

pub fn normal_draw(stream: RngStream, k: usize) -> Vec<f64> {
    let mut s = stream.normals();
    let mut v = vec![0.0; k];
    s.fill(&mut v);
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub ci95_halfwidth: f64,
}

impl McEstimate {
    pub fn new(mean: f64, std_error: f64, n_samples: u64) -> Self {
        Self { mean, std_error, n_samples, ci95_halfwidth: 1.96 * std_error }
    }

    /// Mean and standard error of the values, reduced in slice order.
    pub fn from_values(v: &[f64]) -> Self {
        let n = v.len();
        let mean = kahan_sum(v.iter().copied()) / n as f64;
        let ss = kahan_sum(v.iter().map(|x| (x - mean) * (x - mean)));
        let var = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
        Self::new(mean, (var / n as f64).sqrt(), n as u64)
    }

    /// Sample variance of the values, with the large-sample standard error
    /// sqrt((m4 - s^4)/n) of the variance estimator.
    pub fn variance_of(v: &[f64]) -> Self {
        let n = v.len() as f64;
        let mean = kahan_sum(v.iter().copied()) / n;
        let m2 = kahan_sum(v.iter().map(|x| (x - mean).powi(2))) / n;
        let m4 = kahan_sum(v.iter().map(|x| (x - mean).powi(4))) / n;
        let s2 = m2 * n / (n - 1.0);
        Self::new(s2, ((m4 - m2 * m2).max(0.0) / n).sqrt(), v.len() as u64)
    }

    /// Multiply by a deterministic constant.
    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.mean * c, self.std_error * c.abs(), self.n_samples)
    }

    /// |mean - target| in units of std_error (infinite if std_error = 0 and they differ).
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

pub fn kahan_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for x in it {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

/// How Monte Carlo loops are scheduled. Results never depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Sequential,
    Parallel,
}

impl Default for Schedule {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Schedule::Parallel
        } else {
            Schedule::Sequential
        }
    }
}

/// Evaluate `f` at every index in `0..n`, returning the values in index order.
pub fn map_indices<T, F>(schedule: Schedule, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match schedule {
        #[cfg(feature = "parallel")]
        Schedule::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Monte Carlo mean of `f` over the streams `(seed, 0..n)`.
pub fn mc_mean<F>(f: F, n: u64, seed: u64) -> Result<McEstimate>
where
    F: Fn(RngStream) -> f64 + Sync + Send,
{
    mc_mean_with(Schedule::default(), f, n, seed)
}

pub fn mc_mean_with<F>(schedule: Schedule, f: F, n: u64, seed: u64) -> Result<McEstimate>
where
    F: Fn(RngStream) -> f64 + Sync + Send,
{
    if n < 2 {
        return invalid(format!("mc_mean needs at least 2 samples, got {n}"));
    }
    let v = map_indices(schedule, n, |i| f(RngStream::new(seed, i)));
    Ok(McEstimate::from_values(&v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err_est: f64,
    pub n_evals: u64,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const QUAD_EVAL_CAP: u64 = 1_000_000;

fn gk15(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = g(c);
    let mut k = fc * WGK[7];
    let mut gs = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = g(c - dx) + g(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            gs += WG[j / 2] * s;
        }
    }
    (k * h, ((k - gs) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive 15-point Gauss-Kronrod quadrature (7-point Gauss error
/// estimate), always bisecting the segment with the largest error.
pub fn adaptive_quad(
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if !(a < b) {
        return invalid(format!("adaptive_quad needs a < b, got [{a}, {b}]"));
    }
    if !(abs_tol > 0.0 && rel_tol > 0.0) {
        return invalid("tolerances must be positive");
    }
    let g: &dyn Fn(f64) -> f64 = &g;
    let (v0, e0) = gk15(g, a, b);
    let mut n_evals = 15u64;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v0, err: e0 });
    let mut value = v0;
    let mut err = e0;
    loop {
        if !value.is_finite() {
            return Err(Error::NoConvergence { value, err_est: err, n_evals });
        }
        if err <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(QuadResult { value, abs_err_est: err, n_evals });
        }
        if n_evals + 30 > QUAD_EVAL_CAP {
            return Err(Error::NoConvergence { value, err_est: err, n_evals });
        }
        let s = heap.pop().expect("heap never empties");
        let m = 0.5 * (s.a + s.b);
        if !(s.a < m && m < s.b) {
            // interval exhausted at double precision; nothing more to gain
            return Err(Error::NoConvergence { value, err_est: err, n_evals });
        }
        let (v1, e1) = gk15(g, s.a, m);
        let (v2, e2) = gk15(g, m, s.b);
        n_evals += 30;
        value += v1 + v2 - s.value;
        err += e1 + e2 - s.err;
        heap.push(Segment { a: s.a, b: m, value: v1, err: e1 });
        heap.push(Segment { a: m, b: s.b, value: v2, err: e2 });
        if heap.len() % 512 == 0 || err <= abs_tol.max(rel_tol * value.abs()) {
            // re-sum so the running totals do not drift
            value = kahan_sum(heap.iter().map(|s| s.value));
            err = kahan_sum(heap.iter().map(|s| s.err));
        }
    }
}

/// Bisect a bracket [lo, hi] with h(lo)·h(hi) < 0 down to width `tol`.
pub fn bisect(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut hlo = h(lo);
    for _ in 0..80 {
        if hi - lo <= tol {
            break;
        }
        let m = 0.5 * (lo + hi);
        let hm = h(m);
        if hm == 0.0 {
            return m;
        }
        if (hm < 0.0) == (hlo < 0.0) {
            lo = m;
            hlo = hm;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// One root per sign change of `h` over the uniform `n_grid` partition of [a, b).
pub fn bracketed_roots(h: impl Fn(f64) -> f64, a: f64, b: f64, n_grid: usize, tol: f64) -> Vec<f64> {
    let n_grid = n_grid.max(2);
    let step = (b - a) / n_grid as f64;
    let xs: Vec<f64> = (0..=n_grid).map(|k| a + step * k as f64).collect();
    let hs: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    let mut roots = Vec::new();
    for k in 0..n_grid {
        if hs[k] == 0.0 {
            roots.push(xs[k]);
        } else if hs[k] * hs[k + 1] < 0.0 {
            roots.push(bisect(&h, xs[k], xs[k + 1], tol));
        }
    }
    roots
}

/// Lower-triangular L with L·Lᵀ = S.
pub fn cholesky(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    if s.ncols() != n {
        return invalid("cholesky needs a square matrix");
    }
    let norm = s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-12 * norm;
    for i in 0..n {
        for j in 0..i {
            if (s[(i, j)] - s[(j, i)]).abs() > tol {
                return invalid(format!("matrix not symmetric at ({i},{j})"));
            }
        }
    }
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    Ok(l)
}

/// Determinant by LU with partial pivoting.
pub fn det_lu(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

/// `n` equally spaced points on [a, b).
pub fn periodic_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    (0..n).map(|k| a + h * k as f64).collect()
}
