//! Ingredients of the correction series h(η, ξ) of the Neumann function:
//! the c_q recurrence, the representative bidegree-(k, l) harmonics,
//! Jacobi polynomials of complex argument and the truncated double series.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hgroup::Point;
use crate::jet::Scalar;

/// c_0..c_r in exact arithmetic.
pub fn cq_rational(k: usize, l: usize, n: usize) -> Result<Vec<Ratio<i128>>> {
    let r = k.min(l);
    let mut c = vec![Ratio::from_integer(1i128)];
    for q in 0..r {
        let num = ((k - q) * (l - q)) as i128;
        let den = ((q + 1) * (n + q - 1)) as i128;
        if den == 0 {
            return Err(Error::DegenerateRecurrence { k, l, n });
        }
        let next = -c[q] * Ratio::new(num, den);
        c.push(next);
    }
    Ok(c)
}

pub fn cq_coefficients(k: usize, l: usize, n: usize) -> Result<Vec<f64>> {
    Ok(cq_rational(k, l, n)?
        .iter()
        .map(|c| *c.numer() as f64 / *c.denom() as f64)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpec {
    pub k: usize,
    pub l: usize,
    pub n: usize,
    pub coefficients: Vec<f64>,
}

impl HarmonicSpec {
    pub fn new(k: usize, l: usize, n: usize) -> Result<Self> {
        Ok(HarmonicSpec { k, l, n, coefficients: cq_coefficients(k, l, n)? })
    }
}

/// Y_{k,l}(z) = Σ_q c_q |z*|^{2q} z_1^{k−q} z̄_1^{l−q}.
pub fn spherical_harmonic(spec: &HarmonicSpec, z: &[Complex64]) -> Result<Complex64> {
    if z.len() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, found: z.len() });
    }
    let tail: f64 = z[1..].iter().map(|w| w.norm_sqr()).sum();
    let mut acc = Complex64::new(0.0, 0.0);
    for (q, c) in spec.coefficients.iter().enumerate() {
        acc += *c
            * tail.powi(q as i32)
            * z[0].powu((spec.k - q) as u32)
            * z[0].conj().powu((spec.l - q) as u32);
    }
    Ok(acc)
}

/// The same polynomial on the real chart (x_1..x_n, y_1..y_n, ...),
/// returned as (real part, imaginary part) for jet differentiation.
pub fn spherical_harmonic_chart<S: Scalar>(spec: &HarmonicSpec, chart: &[S]) -> (S, S) {
    let n = spec.n;
    let zero = chart[0].lift(0.0);
    let mut tail = zero.clone();
    for j in 1..n {
        tail = tail + chart[j].clone() * chart[j].clone() + chart[n + j].clone() * chart[n + j].clone();
    }
    let (x, y) = (chart[0].clone(), chart[n].clone());
    let cmul = |a: (S, S), b: (S, S)| {
        (
            a.0.clone() * b.0.clone() - a.1.clone() * b.1.clone(),
            a.0 * b.1 + a.1 * b.0,
        )
    };
    let cpow = |base: (S, S), e: usize| {
        let mut acc = (zero.lift(1.0), zero.clone());
        for _ in 0..e {
            acc = cmul(acc, base.clone());
        }
        acc
    };
    let mut re = zero.clone();
    let mut im = zero.clone();
    for (q, c) in spec.coefficients.iter().enumerate() {
        let a = cpow((x.clone(), y.clone()), spec.k - q);
        let b = cpow((x.clone(), -y.clone()), spec.l - q);
        let (pr, pi) = cmul(a, b);
        let w = tail.powi(q as i32) * *c;
        re = re + pr * w.clone();
        im = im + pi * w;
    }
    (re, im)
}

/// A family of polynomials C_m^{(α, β)} evaluated at complex argument.
pub trait PolynomialFamily: Send + Sync {
    fn eval(&self, m: usize, alpha: f64, beta: f64, w: Complex64) -> Complex64;
}

/// Classical Jacobi polynomials by the three-term recurrence.
#[derive(Clone, Copy, Debug, Default)]
pub struct Jacobi;

impl PolynomialFamily for Jacobi {
    fn eval(&self, m: usize, a: f64, b: f64, w: Complex64) -> Complex64 {
        jacobi_like(m, a, b, w)
    }
}

pub fn jacobi_like(m: usize, a: f64, b: f64, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if m == 0 {
        return one;
    }
    let mut p0 = one;
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (w - 1.0) / 2.0;
    for k in 1..m {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let c0 = 2.0 * (kf + 1.0) * (kf + a + b + 1.0) * s;
        let c1 = (s + 1.0) * ((s + 2.0) * s * w + (a * a - b * b));
        let c2 = 2.0 * (kf + a) * (kf + b) * (s + 2.0);
        let p2 = (c1 * p1 - c2 * p0) / c0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Explicit sum Σ_s C(m+α, m−s) C(m+β, s) ((w−1)/2)^s ((w+1)/2)^{m−s}.
pub fn jacobi_direct(m: usize, a: f64, b: f64, w: Complex64) -> Complex64 {
    let binom = |x: f64, k: usize| (0..k).fold(1.0, |acc, i| acc * (x - i as f64) / (i as f64 + 1.0));
    let lo = (w - 1.0) / 2.0;
    let hi = (w + 1.0) / 2.0;
    (0..=m)
        .map(|s| {
            binom(m as f64 + a, m - s) * binom(m as f64 + b, s) * lo.powu(s as u32) * hi.powu((m - s) as u32)
        })
        .sum()
}

/// Source of the series coefficients a_{m;k}.
pub trait CoefficientProvider: Send + Sync {
    fn coefficient(&self, m: usize, k: usize) -> Result<f64>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroProvider;

impl CoefficientProvider for ZeroProvider {
    fn coefficient(&self, _m: usize, _k: usize) -> Result<f64> {
        Ok(0.0)
    }
}

/// One row of a coefficient table file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub k: usize,
    pub m: usize,
    pub value: f64,
}

/// Tabulated coefficients; absent entries are an error.
#[derive(Clone, Debug, Default)]
pub struct TableProvider {
    values: HashMap<(usize, usize), f64>,
}

impl TableProvider {
    pub fn new(entries: &[CoefficientEntry]) -> Self {
        TableProvider { values: entries.iter().map(|e| ((e.m, e.k), e.value)).collect() }
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let entries: Vec<CoefficientEntry> =
            serde_json::from_str(src).map_err(|e| Error::Validation(format!("coefficient table: {e}")))?;
        Ok(Self::new(&entries))
    }
}

impl CoefficientProvider for TableProvider {
    fn coefficient(&self, m: usize, k: usize) -> Result<f64> {
        self.values.get(&(m, k)).copied().ok_or(Error::MissingCoefficient { m, k })
    }
}

impl<F> CoefficientProvider for F
where
    F: Fn(usize, usize) -> f64 + Send + Sync,
{
    fn coefficient(&self, m: usize, k: usize) -> Result<f64> {
        Ok(self(m, k))
    }
}

#[derive(Clone)]
pub struct SeriesConfig {
    pub k_max: usize,
    pub m_max: usize,
    pub provider: Arc<dyn CoefficientProvider>,
    pub family: Arc<dyn PolynomialFamily>,
    pub b0: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            k_max: 0,
            m_max: 0,
            provider: Arc::new(ZeroProvider),
            family: Arc::new(Jacobi),
            b0: 0.0,
        }
    }
}

impl std::fmt::Debug for SeriesConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SeriesConfig")
            .field("k_max", &self.k_max)
            .field("m_max", &self.m_max)
            .field("b0", &self.b0)
            .finish_non_exhaustive()
    }
}

impl SeriesConfig {
    pub fn with_provider(k_max: usize, m_max: usize, provider: Arc<dyn CoefficientProvider>, b0: f64) -> Self {
        SeriesConfig { k_max, m_max, provider, b0, ..Default::default() }
    }
}

/// Truncated series Σ_{k,m} (2n/m) a_{m;k} C_{(m−2k)/2}(t+i|z|²) Y_k(z)
/// C_m(t'+i|z'|²) conj(Y_k(z')) + b_0 with ξ = [z,t], η = [z',t'] and
/// one representative harmonic per bidegree (k, k). Terms whose half
/// index (m−2k)/2 is negative or fractional are skipped. For n = 1 the
/// spaces H_{k,k} with k ≥ 1 are trivial, so only b_0 remains.
pub fn h_series(eta: &Point, xi: &Point, cfg: &SeriesConfig) -> Result<f64> {
    let n = xi.dim();
    if eta.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: eta.dim() });
    }
    let mut acc = 0.0;
    if n >= 2 {
        let z: Vec<Complex64> = (0..n).map(|j| xi.z(j)).collect();
        let zp: Vec<Complex64> = (0..n).map(|j| eta.z(j)).collect();
        let w = Complex64::new(xi.t, xi.r2());
        let wp = Complex64::new(eta.t, eta.r2());
        for k in 1..=cfg.k_max {
            let spec = HarmonicSpec::new(k, k, n)?;
            let y = spherical_harmonic(&spec, &z)?;
            let yp = spherical_harmonic(&spec, &zp)?.conj();
            let alpha = n as f64 / 2.0 + k as f64;
            for m in 1..=cfg.m_max {
                if m < 2 * k || (m - 2 * k) % 2 == 1 {
                    continue;
                }
                let a = cfg.provider.coefficient(m, k)?;
                if a == 0.0 {
                    continue;
                }
                let c_half = cfg.family.eval((m - 2 * k) / 2, alpha, alpha, w);
                let c_m = cfg.family.eval(m, alpha, alpha, wp);
                let term = 2.0 * n as f64 / m as f64 * a * c_half * y * c_m * yp;
                acc += term.re;
            }
        }
    }
    Ok(acc + cfg.b0)
}
