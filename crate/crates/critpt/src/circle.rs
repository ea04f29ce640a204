//! Random trigonometric polynomials on the circle: Kac–Rice mean, the exact
//! two-point variance integral, its large-degree constant, and brute-force
//! critical-point counting.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::numutil::{adaptive_quad, map_indices, McEstimate, QuadResult, RngStream, Schedule};

const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// v(θ) = a₀/√(2π) + Σ (a_m cos mθ + b_m sin mθ)/√π.
///
/// `a` and `b` both have length ν+1; `b[0]` is unused and kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly1D {
    pub nu: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TrigPoly1D {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() < 2 || a.len() != b.len() {
            return invalid("coefficient vectors must have equal length nu+1 >= 2");
        }
        Ok(Self { nu: a.len() - 1, a, b })
    }

    /// k-th derivative, k ≤ 3.
    pub fn deriv(&self, k: u32, theta: f64) -> f64 {
        let mut s = if k == 0 { self.a[0] * INV_SQRT_2PI / INV_SQRT_PI } else { 0.0 };
        for m in 1..=self.nu {
            let mf = m as f64;
            let (sn, cs) = (mf * theta).sin_cos();
            let (a, b) = (self.a[m], self.b[m]);
            let t = match k % 4 {
                0 => a * cs + b * sn,
                1 => b * cs - a * sn,
                2 => -(a * cs + b * sn),
                _ => a * sn - b * cs,
            };
            s += mf.powi(k as i32) * t;
        }
        s * INV_SQRT_PI
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.deriv(0, theta)
    }

    /// The polynomial θ ↦ v(θ + c).
    pub fn rotated(&self, c: f64) -> Self {
        let mut out = self.clone();
        for m in 1..=self.nu {
            let (sn, cs) = (m as f64 * c).sin_cos();
            out.a[m] = self.a[m] * cs + self.b[m] * sn;
            out.b[m] = -self.a[m] * sn + self.b[m] * cs;
        }
        out
    }
}

/// Coefficients a₀, (a_m, b_m)_{m=1..ν} drawn i.i.d. N(0,1) in that order.
pub fn sample_poly(nu: usize, stream: RngStream) -> TrigPoly1D {
    let mut g = stream.normals();
    let mut a = vec![0.0; nu + 1];
    let mut b = vec![0.0; nu + 1];
    a[0] = g.next();
    for m in 1..=nu {
        a[m] = g.next();
        b[m] = g.next();
    }
    TrigPoly1D { nu, a, b }
}

pub const DEFAULT_OVERSAMPLE: usize = 16;

/// Reusable FFT plan for counting zeros of v′ on a grid of `oversample·2ν` points.
pub struct CritCounter {
    nu: usize,
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl CritCounter {
    pub fn new(nu: usize, oversample: usize) -> Self {
        let n = (oversample.max(8) * 2 * nu).max(16);
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Self { nu, n, fft }
    }

    /// Number of zeros of v′ on [0, 2π).
    ///
    /// On each grid cell v′ is replaced by its cubic Hermite interpolant from
    /// the grid values of v′ and v″, whose zeros are counted exactly. The
    /// interpolation error is at most h⁴·max|v⁽⁵⁾|/384; a cell where the cubic
    /// has an extremum that close to zero is bisected with direct evaluation.
    pub fn count(&self, p: &TrigPoly1D) -> Result<usize> {
        if p.nu != self.nu {
            return invalid(format!("counter built for degree {}, got {}", self.nu, p.nu));
        }
        let n = self.n;
        let mut d1 = vec![Complex64::new(0.0, 0.0); n];
        let mut d2 = vec![Complex64::new(0.0, 0.0); n];
        let mut m5 = 0.0;
        let mut scale = 0.0;
        for m in 1..=self.nu {
            let mf = m as f64;
            let (a, b) = (p.a[m], p.b[m]);
            d1[m] = Complex64::new(mf * b, mf * a);
            d2[m] = Complex64::new(-mf * mf * a, mf * mf * b);
            let r = a.hypot(b);
            m5 += mf.powi(5) * r;
            scale += mf * r;
        }
        if scale == 0.0 {
            return invalid("polynomial is constant");
        }
        self.fft.process(&mut d1);
        self.fft.process(&mut d2);
        let h = 2.0 * PI / n as f64;
        let cell = CellCounter { p, m5, floor: 1e-12 * scale };
        let mut count = 0usize;
        for j in 0..n {
            let k = (j + 1) % n;
            let lo = h * j as f64;
            count += cell.count(lo, h, [d1[j].re, d1[k].re], [d2[j].re, d2[k].re], 0)?;
        }
        Ok(count)
    }
}

struct CellCounter<'a> {
    p: &'a TrigPoly1D,
    m5: f64,
    floor: f64,
}

impl CellCounter<'_> {
    // un-normalised v′ and v″, matching the FFT grid values
    fn v1(&self, t: f64) -> f64 {
        self.p.deriv(1, t) / INV_SQRT_PI
    }

    fn v2(&self, t: f64) -> f64 {
        self.p.deriv(2, t) / INV_SQRT_PI
    }

    /// Zeros of v′ in [lo, lo + h), sign convention y ≥ 0 as positive.
    fn count(&self, lo: f64, h: f64, y: [f64; 2], z: [f64; 2], depth: u32) -> Result<usize> {
        let err = h.powi(4) * self.m5 / 384.0;
        let (y0, y1) = (y[0], y[1]);
        // c(s) = A s³ + B s² + C s + D on s ∈ [0, 1]
        let (c, dd) = (h * z[0], y0);
        let b = 3.0 * (y1 - y0) - 2.0 * h * z[0] - h * z[1];
        let a = 2.0 * (y0 - y1) + h * z[0] + h * z[1];
        let cubic = |s: f64| ((a * s + b) * s + c) * s + dd;
        // |v″ − c′/h| bound for the Hermite derivative
        let slope_err = 0.01 * h.powi(3) * self.m5;
        let slope = |s: f64| ((3.0 * a * s + 2.0 * b) * s + c).abs();
        let inflection = if a != 0.0 { -b / (3.0 * a) } else { f64::NAN };
        let (mut knots, mut nk) = ([0.0; 4], 1);
        for s in quadratic_roots(3.0 * a, 2.0 * b, c).into_iter().flatten() {
            if s > 0.0 && s < 1.0 {
                knots[nk] = s;
                nk += 1;
            }
        }
        if nk == 1 {
            let mut m = slope(0.0).min(slope(1.0));
            if inflection > 0.0 && inflection < 1.0 {
                m = m.min(slope(inflection));
            }
            if m > slope_err * h {
                // v′ is monotone on the cell
                return Ok(((y0 >= 0.0) != (y1 >= 0.0)) as usize);
            }
        }
        knots[nk] = 1.0;
        nk += 1;
        let knots = &mut knots[..nk];
        knots.sort_by(|u, v| u.partial_cmp(v).unwrap());
        let mut vals = [0.0; 4];
        for (i, &s) in knots.iter().enumerate() {
            vals[i] = if i == 0 { y0 } else if i == nk - 1 { y1 } else { cubic(s) };
        }
        let vals = &vals[..nk];
        let mut ambiguous = false;
        for (w, v) in knots.windows(2).zip(vals.windows(2)) {
            let (s0, s1) = (w[0], w[1]);
            if v[0].abs().min(v[1].abs()) > err && (v[0] > 0.0) == (v[1] > 0.0) {
                continue;
            }
            // {|c| ≤ err} on this monotone piece is one interval [u0, u1]
            let up = v[1] > v[0];
            let level = |target: f64| {
                let (mut l, mut r) = (s0, s1);
                for _ in 0..60 {
                    let m = 0.5 * (l + r);
                    if (cubic(m) < target) == up {
                        l = m;
                    } else {
                        r = m;
                    }
                }
                0.5 * (l + r)
            };
            let (first, last) = if up { (-err, err) } else { (err, -err) };
            let u0 = if v[0].abs() <= err { s0 } else { level(first) };
            let u1 = if v[1].abs() <= err { s1 } else { level(last) };
            let mut min_slope = slope(u0).min(slope(u1));
            if inflection > u0 && inflection < u1 {
                min_slope = min_slope.min(slope(inflection));
            }
            if min_slope <= slope_err * h {
                ambiguous = true;
                break;
            }
        }
        if !ambiguous {
            return Ok(vals.windows(2).filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0)).count());
        }
        if depth >= 40 || h < 1e-15 * (1.0 + lo) {
            let t = lo + knots[1] * h;
            if self.v1(t).abs() <= self.floor {
                return Err(Error::Degenerate(format!("near-tangential zero of v' at {t}")));
            }
            return Err(Error::Degenerate(format!("unresolved zero cluster of v' near {t}")));
        }
        let mid = lo + 0.5 * h;
        let (ym, zm) = (self.v1(mid), self.v2(mid));
        Ok(self.count(lo, 0.5 * h, [y0, ym], [z[0], zm], depth + 1)?
            + self.count(mid, 0.5 * h, [ym, y1], [zm, z[1]], depth + 1)?)
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> [Option<f64>; 2] {
    if a == 0.0 {
        return [(b != 0.0).then(|| -c / b), None];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return [None, None];
    }
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return [Some(0.0), None];
    }
    [Some(q / a), Some(c / q)]
}

/// Number of critical points of `p` on the circle.
pub fn count_critical(p: &TrigPoly1D, oversample: usize) -> Result<usize> {
    let mut os = oversample.max(8);
    for _ in 0..2 {
        let c = CritCounter::new(p.nu, os).count(p)?;
        if c % 2 == 0 {
            return Ok(c);
        }
        os *= 2;
    }
    Err(Error::Degenerate("odd critical-point count".into()))
}

fn power_sums(nu: usize) -> (f64, f64) {
    let n = nu as f64;
    // closed forms of Σm² and Σm⁴; exact in double for the ν in scope
    let s2 = n * (n + 1.0) * (2.0 * n + 1.0) / 6.0;
    let s4 = n * (n + 1.0) * (2.0 * n + 1.0) * (3.0 * n * n + 3.0 * n - 1.0) / 30.0;
    (s2, s4)
}

/// E(Z_ν) = 2ν√(λ₂/λ₀) = 2√(Σm⁴/Σm²).
pub fn rice_expectation(nu: usize) -> f64 {
    let (s2, s4) = power_sums(nu);
    2.0 * (s4 / s2).sqrt()
}

/// μ = 2(Σ φ(k)⁴ / Σ φ(k)²)^{1/2} over the first ν frequencies of φ.
pub fn regime_expectation(phi: &[u64], nu: usize) -> Result<f64> {
    if nu == 0 || nu > phi.len() {
        return invalid(format!("need 1 <= nu <= {}, got {nu}", phi.len()));
    }
    let head = &phi[..nu];
    if head.contains(&0) {
        return invalid("frequencies must be positive");
    }
    let mut sorted = head.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return invalid("frequencies must be distinct");
    }
    let s2: f64 = head.iter().map(|&p| (p as f64).powi(2)).sum();
    let s4: f64 = head.iter().map(|&p| (p as f64).powi(4)).sum();
    Ok(2.0 * (s4 / s2).sqrt())
}

/// Degree-ν covariance data. Moments are stored without the 1/π, so λ₀ → 1/3 and λ₂ → 1/5.
#[derive(Debug, Clone)]
pub struct CircleKernel {
    pub nu: usize,
    pub lambda0: f64,
    pub lambda2: f64,
}

impl CircleKernel {
    pub fn new(nu: usize) -> Self {
        let (s2, s4) = power_sums(nu);
        let n = nu as f64;
        Self { nu, lambda0: s2 / n.powi(3), lambda2: s4 / n.powi(5) }
    }
}

/// R_ν^{(k)}(t) = (d/dt)^k ν⁻³ Σ m² cos(mt/ν), k ∈ {0, 1, 2}.
pub fn cov_r(nu: usize, t: f64, k: u32) -> Result<f64> {
    if k > 2 {
        return invalid("derivative order must be 0, 1 or 2");
    }
    let n = nu as f64;
    let s: f64 = (1..=nu)
        .map(|m| {
            let mf = m as f64;
            let (sn, cs) = (mf * t / n).sin_cos();
            match k {
                0 => mf * mf * cs,
                1 => -mf.powi(3) * sn / n,
                _ => -mf.powi(4) * cs / (n * n),
            }
        })
        .sum();
    Ok(s / n.powi(3))
}

/// Normalised kernel data at one point: 1−G, G′ and H = −R″/λ₂.
#[derive(Debug, Clone, Copy)]
struct Parts {
    omg: f64,
    g1: f64,
    h: f64,
}

const SERIES_TERMS: usize = 16;
const T_SWITCH: f64 = 0.5;

/// Either the degree-ν kernel in the scaled variable t (frequencies m/ν) or its limit.
#[derive(Debug, Clone)]
struct Kernel {
    nu: Option<usize>,
    q: f64,
    /// G(t) = Σ_k a[k] t^{2k}
    a: Vec<f64>,
    s2: f64,
    s4: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |p, i| p * i as f64)
}

impl Kernel {
    fn finite(nu: usize) -> Self {
        let n = nu as f64;
        let p = |j: i32| -> f64 { (1..=nu).map(|m| (m as f64 / n).powi(j)).sum() };
        let p2 = p(2);
        let a = (0..SERIES_TERMS)
            .map(|k| (-1f64).powi(k as i32) * p(2 * k as i32 + 2) / (factorial(2 * k) * p2))
            .collect();
        let (s2, s4) = power_sums(nu);
        Self { nu: Some(nu), q: s4 / (n * n * s2), a, s2, s4 }
    }

    fn limit() -> Self {
        let a = (0..SERIES_TERMS)
            .map(|k| (-1f64).powi(k as i32) * 3.0 / (factorial(2 * k) * (2 * k + 3) as f64))
            .collect();
        Self { nu: None, q: 0.6, a, s2: 0.0, s4: 0.0 }
    }

    fn direct(&self, t: f64) -> Parts {
        match self.nu {
            Some(nu) => {
                let n = nu as f64;
                let (mut omg, mut g1, mut h) = (0.0, 0.0, 0.0);
                for m in 1..=nu {
                    let mf = m as f64;
                    let sh = (mf * t / (2.0 * n)).sin();
                    let (sn, cs) = (mf * t / n).sin_cos();
                    omg += mf * mf * sh * sh;
                    g1 += mf.powi(3) * sn;
                    h += mf.powi(4) * cs;
                }
                Parts { omg: 2.0 * omg / self.s2, g1: -g1 / (n * self.s2), h: h / self.s4 }
            }
            None => Parts {
                omg: 1.0 - 3.0 * r_infinity_closed(t, 0),
                g1: 3.0 * r_infinity_closed(t, 1),
                h: -5.0 * r_infinity_closed(t, 2),
            },
        }
    }

    /// Power series in s = t² of η/s², of the ρ numerator /s², and of (1−G²)/s.
    fn small_t_series(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let k = SERIES_TERMS;
        let mul = |x: &[f64], y: &[f64]| -> Vec<f64> {
            let mut z = vec![0.0; k];
            for i in 0..k {
                for j in 0..k - i {
                    z[i + j] += x[i] * y[j];
                }
            }
            z
        };
        let g = self.a.clone();
        let mut one_m_g2: Vec<f64> = mul(&g, &g).iter().map(|c| -c).collect();
        one_m_g2[0] += 1.0;
        one_m_g2[0] = 0.0;
        // G′ = t·Σ_{k≥1} 2k a_k s^{k-1}
        let g1: Vec<f64> = (0..k).map(|i| if i + 1 < k { 2.0 * (i + 1) as f64 * g[i + 1] } else { 0.0 }).collect();
        let mut g1sq = vec![0.0; k];
        for (i, c) in mul(&g1, &g1).iter().enumerate().take(k - 1) {
            g1sq[i + 1] = *c;
        }
        // H = −G″/q
        let hh: Vec<f64> = (0..k)
            .map(|i| if i + 1 < k { -((2 * i + 2) as f64) * (2 * i + 1) as f64 * g[i + 1] / self.q } else { 0.0 })
            .collect();
        let mut eta: Vec<f64> = one_m_g2.iter().zip(&g1sq).map(|(x, y)| x - y / self.q).collect();
        let hw = mul(&hh, &one_m_g2);
        let gw = mul(&g, &g1sq);
        let mut num: Vec<f64> = hw.iter().zip(&gw).map(|(x, y)| -x + y / self.q).collect();
        // the s⁰ and s¹ terms cancel exactly
        eta[0] = 0.0;
        eta[1] = 0.0;
        num[0] = 0.0;
        num[1] = 0.0;
        (eta[2..].to_vec(), num[2..].to_vec(), one_m_g2[1..].to_vec())
    }
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * s + x)
}

/// (C, ρ) with f = q·C·(√(1−ρ²) + ρ arcsin ρ), C = η/(1−G²)^{3/2}.
struct Evaluator {
    k: Kernel,
    series: (Vec<f64>, Vec<f64>, Vec<f64>),
}

impl Evaluator {
    fn new(k: Kernel) -> Self {
        let series = k.small_t_series();
        Self { k, series }
    }

    fn reduce(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        match self.k.nu {
            Some(nu) => {
                let period = 2.0 * PI * nu as f64;
                let r = t.rem_euclid(period);
                let r = if r > 0.5 * period { period - r } else { r };
                if r == 0.0 {
                    return Err(Error::Singular(format!("t = {t} is a multiple of 2 pi nu")));
                }
                Ok(r)
            }
            None if t == 0.0 => Err(Error::Singular("t = 0".into())),
            None => Ok(t),
        }
    }

    fn eta(&self, t: f64) -> f64 {
        if t < T_SWITCH {
            let s = t * t;
            s * s * horner(&self.series.0, s)
        } else {
            let p = self.k.direct(t);
            p.omg * (2.0 - p.omg) - p.g1 * p.g1 / self.k.q
        }
    }

    fn c_rho(&self, t: f64) -> Result<(f64, f64)> {
        let t = self.reduce(t)?;
        let q = self.k.q;
        let (c, rho) = if t < T_SWITCH {
            let s = t * t;
            let e = horner(&self.series.0, s);
            let nm = horner(&self.series.1, s);
            let w = horner(&self.series.2, s);
            (t * e / w.powf(1.5), nm / e)
        } else {
            let p = self.k.direct(t);
            let w = p.omg * (2.0 - p.omg);
            let eta = w - p.g1 * p.g1 / q;
            let num = -p.h * w + (1.0 - p.omg) * p.g1 * p.g1 / q;
            (eta / w.powf(1.5), num / eta)
        };
        if !(rho.abs() <= 1.0 + 1e-12) {
            return Err(Error::Internal(format!("|rho| = {} exceeds 1 at t = {t}", rho.abs())));
        }
        Ok((c, rho.clamp(-1.0, 1.0)))
    }

    fn f(&self, t: f64) -> Result<f64> {
        let (c, rho) = self.c_rho(t)?;
        Ok(self.k.q * c * ((1.0 - rho * rho).sqrt() + rho * rho.asin()))
    }

    fn rho(&self, t: f64) -> Result<f64> {
        Ok(self.c_rho(t)?.1)
    }
}

/// 1 − G_ν(t) = (2/Σm²) Σ m² sin²(mt/(2ν)).
pub fn one_minus_g(nu: usize, t: f64) -> f64 {
    let k = Kernel::finite(nu);
    k.direct(t).omg
}

/// η(t) = (1−G²) − (λ₀/λ₂)(G′)².
pub fn eta(nu: usize, t: f64) -> f64 {
    let ev = Evaluator::new(Kernel::finite(nu));
    let period = 2.0 * PI * nu as f64;
    let r = t.abs().rem_euclid(period);
    ev.eta(if r > 0.5 * period { period - r } else { r })
}

/// The two-point density f_ν(t) of the variance integrand.
pub fn f_nu(nu: usize, t: f64) -> Result<f64> {
    Evaluator::new(Kernel::finite(nu)).f(t)
}

pub fn rho_nu(nu: usize, t: f64) -> Result<f64> {
    Evaluator::new(Kernel::finite(nu)).rho(t)
}

pub fn f_infinity(t: f64) -> Result<f64> {
    Evaluator::new(Kernel::limit()).f(t)
}

pub fn rho_infinity(t: f64) -> Result<f64> {
    Evaluator::new(Kernel::limit()).rho(t)
}

fn r_infinity_closed(t: f64, k: u32) -> f64 {
    if t < T_SWITCH {
        return r_infinity_series(t, k);
    }
    let (s, c) = t.sin_cos();
    let (t2, t3) = (t * t, t * t * t);
    match k {
        0 => ((t2 - 2.0) * s + 2.0 * t * c) / t3,
        1 => c / t - 3.0 * s / t2 - 6.0 * c / t3 + 6.0 * s / (t2 * t2),
        _ => -(s / t + 4.0 * c / t2 - 12.0 * s / t3 - 24.0 * c / (t2 * t2) + 24.0 * s / (t3 * t2)),
    }
}

fn r_infinity_series(t: f64, k: u32) -> f64 {
    // R(t) = Σ (−1)ⁿ t²ⁿ / ((2n)! (2n+3))
    let mut s = 0.0;
    for n in 0..14usize {
        let c = (-1f64).powi(n as i32) / (factorial(2 * n) * (2 * n + 3) as f64);
        let p = 2 * n as i32 - k as i32;
        if p < 0 {
            continue;
        }
        let fall = (0..k).fold(1.0, |acc, i| acc * (2 * n as i32 - i as i32) as f64);
        s += c * fall * t.powi(p);
    }
    s
}

/// R_∞^{(k)}(t) with R_∞(t) = ∫₀¹ λ² cos(λt) dλ.
pub fn r_infinity(t: f64, k: u32) -> Result<f64> {
    if k > 2 {
        return invalid("derivative order must be 0, 1 or 2");
    }
    let v = r_infinity_closed(t.abs(), k);
    Ok(if k == 1 && t < 0.0 { -v } else { v })
}

const EPS_CUT: f64 = 1e-8;

fn integrate_density(ev: &Evaluator, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let q = ev.k.q;
    let r = adaptive_quad(
        |t| match ev.f(t) {
            Ok(v) => v - q,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        tol,
        1e-14,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    r
}

/// Var(Z_ν) = (2ν/π)∫_{−πν}^{πν}(f_ν(t) − λ₂/λ₀)dt + 2ν√(λ₂/λ₀).
///
/// `tol` is the absolute tolerance on the half-line integral.
pub fn variance_exact(nu: usize, tol: f64) -> Result<QuadResult> {
    if nu == 0 {
        return invalid("nu must be >= 1");
    }
    if nu == 1 {
        // Z_1 = 2 for every nonconstant sample
        return Ok(QuadResult { value: 0.0, abs_err_est: 0.0, n_evals: 0 });
    }
    let ev = Evaluator::new(Kernel::finite(nu));
    let q = ev.k.q;
    let n = nu as f64;
    let r = integrate_density(&ev, EPS_CUT, PI * n, tol)?;
    // on [0, ε] the integrand is −q + O(ε)
    let head = -q * EPS_CUT;
    let integral = 2.0 * (r.value + head);
    let scale = 2.0 * n / PI;
    Ok(QuadResult {
        value: scale * integral + 2.0 * n * q.sqrt(),
        abs_err_est: scale * 2.0 * (r.abs_err_est + q * EPS_CUT * EPS_CUT),
        n_evals: r.n_evals,
    })
}

/// δ∞ = (4/π)∫₀^∞ (f_∞ − 3/5) dt + 2√(3/5).
///
/// The integral runs to `t_max`; beyond it f_∞ − 3/5 ≈ K/t², with K fitted
/// from the mean of the integrand over [t_max/2, t_max]. The error estimate
/// includes the change in the fitted K against the window [t_max/4, t_max/2].
pub fn delta_infinity(tol: f64, t_max: f64) -> Result<QuadResult> {
    if !(t_max >= 1e3) {
        return invalid(format!("t_max must be >= 1e3, got {t_max}"));
    }
    let ev = Evaluator::new(Kernel::limit());
    let q = ev.k.q;
    let panel = 8.0 * PI;
    let mut cuts = vec![EPS_CUT, T_SWITCH];
    let mut x = panel;
    while x < t_max {
        cuts.push(x);
        x += panel;
    }
    cuts.push(t_max);
    let per_panel = tol / cuts.len() as f64;
    let mut pieces = Vec::with_capacity(cuts.len());
    let mut n_evals = 0;
    let mut qerr = 0.0;
    for w in cuts.windows(2) {
        let r = integrate_density(&ev, w[0], w[1], per_panel)?;
        pieces.push((w[0], w[1], r.value));
        n_evals += r.n_evals;
        qerr += r.abs_err_est;
    }
    let part = |lo: f64, hi: f64| -> Result<f64> {
        // whole panels inside [lo, hi] plus quadrature of the ragged ends
        let mut s = 0.0;
        for &(a, b, v) in &pieces {
            if a >= lo && b <= hi {
                s += v;
            } else if b > lo && a < hi {
                s += integrate_density(&ev, a.max(lo), b.min(hi), per_panel)?.value;
            }
        }
        Ok(s)
    };
    let body: f64 = crate::numutil::kahan_sum(pieces.iter().map(|p| p.2)) - q * EPS_CUT;
    let k_hi = part(t_max / 2.0, t_max)? * t_max;
    let k_lo = part(t_max / 4.0, t_max / 2.0)? * t_max / 2.0;
    let tail = k_hi / t_max;
    let tail_err = (k_hi - k_lo).abs() / t_max;
    let scale = 4.0 / PI;
    if scale * tail_err > tol {
        return Err(Error::Precision {
            partial: scale * (body + tail) + 2.0 * q.sqrt(),
            bound: scale * tail_err,
        });
    }
    Ok(QuadResult {
        value: scale * (body + tail) + 2.0 * q.sqrt(),
        abs_err_est: scale * (qerr + tail_err),
        n_evals,
    })
}

/// Monte Carlo mean and variance of the critical count.
#[derive(Debug, Clone, Copy)]
pub struct CircleMoments {
    pub mean: McEstimate,
    pub variance: McEstimate,
    pub discarded: u64,
}

pub fn mc_moments(nu: usize, n_samples: u64, seed: u64, oversample: usize) -> Result<CircleMoments> {
    mc_moments_with(Schedule::default(), nu, n_samples, seed, oversample)
}

pub fn mc_moments_with(
    schedule: Schedule,
    nu: usize,
    n_samples: u64,
    seed: u64,
    oversample: usize,
) -> Result<CircleMoments> {
    if n_samples < 100 {
        return invalid("mc_moments needs at least 100 samples");
    }
    if nu == 0 {
        return invalid("nu must be >= 1");
    }
    let counter = CritCounter::new(nu, oversample);
    let counts = map_indices(schedule, n_samples, |i| {
        let p = sample_poly(nu, RngStream::new(seed, i));
        match counter.count(&p) {
            Ok(c) if c % 2 == 0 => Some(c as f64),
            _ => count_critical(&p, 2 * oversample).ok().map(|c| c as f64),
        }
    });
    let good: Vec<f64> = counts.iter().flatten().copied().collect();
    let discarded = n_samples - good.len() as u64;
    if discarded * 1000 > n_samples {
        return Err(Error::DataQuality { bad: discarded, total: n_samples });
    }
    Ok(CircleMoments {
        mean: McEstimate::from_values(&good),
        variance: McEstimate::variance_of(&good),
        discarded,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct XiDet {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

/// det A_ν(t) for the 4×4 matrix with rows (1, ζᵐ, m, mζᵐ), m = 1..4,
/// ζ = e^{it/ν}, against its factorisation −ζ³(ζ−1)⁴.
pub fn xi_det_identity(nu: usize, t: f64) -> XiDet {
    let zeta = Complex64::from_polar(1.0, t / nu as f64);
    let a = nalgebra::DMatrix::from_fn(4, 4, |i, j| {
        let m = (i + 1) as f64;
        let zm = zeta.powu(i as u32 + 1);
        match j {
            0 => Complex64::new(1.0, 0.0),
            1 => zm,
            2 => Complex64::new(m, 0.0),
            _ => zm * m,
        }
    });
    let lhs = a.lu().determinant();
    let rhs = -zeta.powu(3) * (zeta - 1.0).powu(4);
    XiDet { lhs, rhs }
}
