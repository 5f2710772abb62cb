//! Two-point kernels on the Korányi ball: the fundamental solution g_η,
//! the Green function, the Poisson kernel and the Neumann function.
//!
//! Circularized kernels are evaluated in closed form. Writing w = |z|² + it
//! and c = ⟨z_ξ, z_η⟩, the circle mean of g_η at ξ is
//! a_0 |A|^{-n} F_n(4|c|²/|A|²) with A = w_ξ + w̄_η, and the mean of the
//! Kelvin term is the same expression with A = 1 + w_ξ w_η. F_n is the
//! ring factor 2F1(n/2, n/2; 1; ·).

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::hcalc::{normal_derivative_jet, GaugeLevel, EPS_CHAR};
use crate::hgroup::{koranyi_norm, ChartFn, Point, DEFAULT_NTHETA};
use crate::jet::{Dual, Jet2, Scalar};
use crate::special::{gauss_on, gamma_half, ring_factor, ring_factor_to};
use crate::sphharm::{h_series, SeriesConfig};

/// Normalization 2^{n−2} Γ(n/2)² / π^{n+1}.
pub fn a0(n: usize) -> f64 {
    let g = gamma_half(n);
    2f64.powi(n as i32 - 2) * g * g / PI.powi(n as i32 + 1)
}

fn split<S: Scalar>(c: &[S]) -> (usize, &[S], &[S], S) {
    let n = (c.len() - 1) / 2;
    (n, &c[..n], &c[n..2 * n], c[2 * n].clone())
}

/// g_η at a chart point, generic over the number type.
pub fn fundamental_chart<S: Scalar>(eta: &Point, c: &[S]) -> S {
    let (n, x, y, t) = split(c);
    let mut r2 = t.lift(0.0);
    let mut tt = t - eta.t;
    for j in 0..n {
        let dx = x[j].clone() - eta.x[j];
        let dy = y[j].clone() - eta.y[j];
        r2 = r2 + dx.clone() * dx + dy.clone() * dy;
        tt = tt + (y[j].clone() * eta.x[j] - x[j].clone() * eta.y[j]) * 2.0;
    }
    let n4 = r2.clone() * r2 + tt.clone() * tt;
    n4.powf(-(n as f64) / 2.0) * a0(n)
}

pub fn fundamental(eta: &Point, xi: &Point) -> Result<f64> {
    check_pair(eta, xi)?;
    let v = fundamental_chart(eta, &xi.chart());
    if !v.is_finite() {
        return Err(Error::KernelPole);
    }
    Ok(v)
}

fn check_pair(eta: &Point, xi: &Point) -> Result<()> {
    if eta.dim() != xi.dim() {
        return Err(Error::DimensionMismatch { expected: eta.dim(), found: xi.dim() });
    }
    Ok(())
}

/// Non-circular Green function g_η(ξ) − N(η)^{−2n} g_{η*}(ξ⁻¹), with the
/// Kelvin term equal to a_0 when η = e.
pub fn green_raw_chart<S: Scalar>(eta: &Point, c: &[S]) -> Result<S> {
    let n = eta.dim();
    let direct = fundamental_chart(eta, c);
    if eta.is_identity() {
        return Ok(direct - a0(n));
    }
    let star = crate::hgroup::invert(eta)?;
    let neg: Vec<S> = c.iter().map(|v| -v.clone()).collect();
    let scale = koranyi_norm(eta).powi(-2 * n as i32);
    Ok(direct - fundamental_chart(&star, &neg) * scale)
}

pub fn green_raw(eta: &Point, xi: &Point) -> Result<f64> {
    check_pair(eta, xi)?;
    let v = green_raw_chart(eta, &xi.chart())?;
    if !v.is_finite() {
        return Err(Error::KernelPole);
    }
    Ok(v)
}

/// Ingredients of the circle means: (w_ξ as (s, t), |c|² and c).
struct Circ<S> {
    s: S,
    t: S,
    c_re: S,
    c_im: S,
}

fn circ_parts<S: Scalar>(eta: &Point, c: &[S]) -> Circ<S> {
    let (n, x, y, t) = split(c);
    let zero = t.lift(0.0);
    let (mut s, mut c_re, mut c_im) = (zero.clone(), zero.clone(), zero);
    for j in 0..n {
        s = s + x[j].clone() * x[j].clone() + y[j].clone() * y[j].clone();
        // z_ξ conj(z_η)
        c_re = c_re + x[j].clone() * eta.x[j] + y[j].clone() * eta.y[j];
        c_im = c_im + y[j].clone() * eta.x[j] - x[j].clone() * eta.y[j];
    }
    Circ { s, t, c_re, c_im }
}

/// a_0 avg_θ |A − 2 e^{iθ} c̄|^{-n} for A = (a_re, a_im).
fn ring_mean<S: Scalar>(n: usize, a_re: S, a_im: S, cp: &Circ<S>, ntheta: usize) -> S {
    let x = a_re.clone() * a_re.clone() + a_im.clone() * a_im.clone();
    let cc = cp.c_re.clone() * cp.c_re.clone() + cp.c_im.clone() * cp.c_im.clone();
    let y = cc * 4.0;
    let half = -(n as f64) / 2.0;
    if let Some(_) = ring_factor(n, 0.0) {
        let m = y / x.clone();
        let (f, f1, f2) = ring_factor_to(n, m.value(), S::ORDER).expect("closed form");
        return x.powf(half) * m.chain(f, f1, f2) * a0(n);
    }
    // P = A·c; |A − 2e^{iθ}c̄|² = X + Y − 4 Re(e^{iθ} P) up to a phase shift.
    let p_re = a_re.clone() * cp.c_re.clone() - a_im.clone() * cp.c_im.clone();
    let p_im = a_re * cp.c_im.clone() + a_im * cp.c_re.clone();
    let mut acc = x.lift(0.0);
    for k in 0..ntheta {
        let th = 2.0 * PI * k as f64 / ntheta as f64;
        let (sn, cs) = th.sin_cos();
        let d = x.clone() + y.clone() - (p_re.clone() * cs - p_im.clone() * sn) * 4.0;
        acc = acc + d.powf(half);
    }
    acc * (a0(n) / ntheta as f64)
}

/// Circle mean ḡ_η(ξ).
pub fn gbar_chart<S: Scalar>(eta: &Point, c: &[S], ntheta: usize) -> S {
    let cp = circ_parts(eta, c);
    let se = eta.r2();
    let a_re = cp.s.clone() + se;
    let a_im = cp.t.clone() - eta.t;
    ring_mean(eta.dim(), a_re, a_im, &cp, ntheta)
}

/// Kelvin term of the circularized kernel, K(ḡ_η)(ξ⁻¹); equals a_0 at η = e.
pub fn kbar_chart<S: Scalar>(eta: &Point, c: &[S], ntheta: usize) -> S {
    let cp = circ_parts(eta, c);
    let (se, te) = (eta.r2(), eta.t);
    // 1 + w_ξ w_η
    let a_re = cp.s.clone() * se - cp.t.clone() * te + 1.0;
    let a_im = cp.s.clone() * te + cp.t.clone() * se;
    ring_mean(eta.dim(), a_re, a_im, &cp, ntheta)
}

/// Circularized Green function Ḡ = ḡ_η − K(ḡ_η)(ξ⁻¹).
pub fn green_chart<S: Scalar>(eta: &Point, c: &[S], ntheta: usize) -> S {
    gbar_chart(eta, c, ntheta) - kbar_chart(eta, c, ntheta)
}

/// Green function used throughout: the circularized form.
pub fn green(eta: &Point, xi: &Point) -> Result<f64> {
    check_pair(eta, xi)?;
    finite(green_chart(eta, &xi.chart(), DEFAULT_NTHETA))
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::KernelPole)
    }
}

fn on_boundary(xi: &Point) -> Result<()> {
    let g = koranyi_norm(xi);
    if (g - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("Poisson target has gauge {g}, not 1")));
    }
    Ok(())
}

/// P(η, ξ) = −¼ ∂Ḡ(η, ·)/∂n_0 at ξ ∈ ∂B, from exact jets.
pub fn poisson(eta: &Point, xi: &Point) -> Result<f64> {
    check_pair(eta, xi)?;
    on_boundary(xi)?;
    if koranyi_norm(eta) >= 1.0 {
        return Err(Error::Invalid("Poisson source must be interior".into()));
    }
    let seed = Jet2::seed(&xi.chart());
    let g = green_chart(eta, &seed, DEFAULT_NTHETA);
    let f = GaugeLevel.apply(&seed)?;
    Ok(-0.25 * normal_derivative_jet(&f, &g, xi, EPS_CHAR)?)
}

/// Neumann function ḡ_η(ξ) + K(ḡ_η)(ξ⁻¹) + h(η, ξ).
pub fn neumann(eta: &Point, xi: &Point, cfg: &SeriesConfig) -> Result<f64> {
    check_pair(eta, xi)?;
    let c = xi.chart();
    let v = gbar_chart(eta, &c, DEFAULT_NTHETA) + kbar_chart(eta, &c, DEFAULT_NTHETA);
    finite(v + h_series(eta, xi, cfg)?)
}

/// Neumann function jets in ξ; the series part is constant for n = 1 and
/// differentiated by central differences otherwise.
pub fn neumann_jet(eta: &Point, xi: &Point, cfg: &SeriesConfig) -> Result<Jet2> {
    check_pair(eta, xi)?;
    let seed = Jet2::seed(&xi.chart());
    let base = gbar_chart(eta, &seed, DEFAULT_NTHETA) + kbar_chart(eta, &seed, DEFAULT_NTHETA);
    let h = if xi.dim() == 1 || (cfg.k_max == 0 && cfg.m_max == 0) {
        Jet2::constant(h_series(eta, xi, cfg)?, base.dim())
    } else {
        let f = |p: &Point| h_series(eta, p, cfg).unwrap_or(f64::NAN);
        crate::hcalc::fd_jet2(&f, xi, 1e-4)?
    };
    Ok(base + h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Fundamental,
    Green,
    Poisson,
    Neumann,
}

/// A kernel together with its options.
#[derive(Clone, Debug)]
pub struct KernelId {
    pub kind: KernelKind,
    pub circularize: bool,
    pub ntheta: usize,
    pub series: Option<SeriesConfig>,
}

impl KernelId {
    pub fn new(kind: KernelKind) -> Self {
        KernelId {
            kind,
            circularize: kind != KernelKind::Fundamental,
            ntheta: DEFAULT_NTHETA,
            series: (kind == KernelKind::Neumann).then(SeriesConfig::default),
        }
    }

    pub fn eval(&self, eta: &Point, xi: &Point) -> Result<f64> {
        check_pair(eta, xi)?;
        let c = xi.chart();
        match self.kind {
            KernelKind::Fundamental if self.circularize => finite(gbar_chart(eta, &c, self.ntheta)),
            KernelKind::Fundamental => fundamental(eta, xi),
            KernelKind::Green if self.circularize => finite(green_chart(eta, &c, self.ntheta)),
            KernelKind::Green => green_raw(eta, xi),
            KernelKind::Poisson => poisson(eta, xi),
            KernelKind::Neumann => {
                let cfg = self
                    .series
                    .as_ref()
                    .ok_or_else(|| Error::Invalid("Neumann kernel needs a series config".into()))?;
                let v = gbar_chart(eta, &c, self.ntheta) + kbar_chart(eta, &c, self.ntheta);
                finite(v + h_series(eta, xi, cfg)?)
            }
        }
    }
}

// ---------------------------------------------------------------------
// Meridian forms for n = 1: circular functions depend on (s, t) = (|z|², t)
// only, and both kernel arguments are given by such pairs.

/// A point of the meridian half-plane s ≥ 0.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Meridian {
    pub s: f64,
    pub t: f64,
}

impl Meridian {
    pub fn new(s: f64, t: f64) -> Self {
        Meridian { s, t }
    }

    /// From gauge radius and angle: s = ρ² cos ψ, t = ρ² sin ψ.
    pub fn polar(rho: f64, psi: f64) -> Self {
        let r = rho * rho;
        Meridian { s: r * psi.cos(), t: r * psi.sin() }
    }

    pub fn from_point(p: &Point) -> Self {
        Meridian { s: p.r2(), t: p.t }
    }

    pub fn to_point(self) -> Point {
        Point::meridian(1, self.s, self.t)
    }

    /// |w| = N².
    pub fn radius(self) -> f64 {
        self.s.hypot(self.t)
    }

    pub fn dist(self, o: Meridian) -> f64 {
        (self.s - o.s).hypot(self.t - o.t)
    }

    /// Kelvin image w ↦ w / |w|² (the singular point of the Kelvin term).
    pub fn image(self) -> Option<Meridian> {
        let r2 = self.s * self.s + self.t * self.t;
        (r2 > 1e-300).then(|| Meridian { s: self.s / r2, t: self.t / r2 })
    }
}

fn a0_1() -> f64 {
    0.5 / PI
}

/// a_0 |A|^{-1} F_1(4 s s' / |A|²) with |A|² given.
fn ring1<S: Scalar>(x: S, y: S) -> S {
    let m = y / x.clone();
    let (f, f1, f2) = ring_factor_to(1, m.value(), S::ORDER).expect("n = 1");
    x.powf(-0.5) * m.chain(f, f1, f2) * a0_1()
}

/// ḡ between a fixed meridian point and (s, t).
pub fn gbar_st<S: Scalar>(eta: Meridian, s: S, t: S) -> S {
    let a = s.clone() + eta.s;
    let b = t - eta.t;
    ring1(a.clone() * a + b.clone() * b, s * (4.0 * eta.s))
}

/// Kelvin term K(ḡ_η)(ξ⁻¹) between a fixed meridian point and (s, t).
pub fn kbar_st<S: Scalar>(eta: Meridian, s: S, t: S) -> S {
    let a = s.clone() * eta.s - t.clone() * eta.t + 1.0;
    let b = s.clone() * eta.t + t * eta.s;
    ring1(a.clone() * a + b.clone() * b, s * (4.0 * eta.s))
}

/// Symmetric log term of the unit-ball Neumann function of the Laplacian
/// in ℝ³, ring-averaged in the meridian picture and scaled by a_0. With it
/// the normal derivative of the Neumann function is independent of η.
///
/// The ring integrand is even in φ and can only be near-singular at φ = 0,
/// so the average uses Gauss panels graded geometrically toward 0.
pub fn ring_log(eta: Meridian, xi: Meridian) -> f64 {
    let rr = eta.radius() * xi.radius();
    let mut acc = 0.0;
    for &(phi, w) in ring_rule() {
        let dot = eta.s * xi.s * phi.cos() + eta.t * xi.t;
        let far = (rr * rr - 2.0 * dot + 1.0).max(0.0).sqrt();
        acc += w * (2.0 / (1.0 - dot + far)).ln();
    }
    a0_1() * acc / PI
}

fn ring_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut edges = vec![0.0];
        let mut e = PI / 4096.0;
        while e < PI / 2.0 {
            edges.push(e);
            e *= 4.0;
        }
        edges.push(PI);
        edges
            .windows(2)
            .flat_map(|p| gauss_on(RING_ORDER, p[0], p[1]))
            .collect()
    })
}

const RING_ORDER: usize = 8;

/// How the Neumann function's correction term is realized for n = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NeumannCorrection {
    /// The series with its default (zero) provider plus b_0.
    Series { b0: f64 },
    /// The exact ring-averaged log term.
    RingLog,
}

impl Default for NeumannCorrection {
    fn default() -> Self {
        NeumannCorrection::Series { b0: 0.0 }
    }
}

/// Circular kernels as functions of two meridian points (n = 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeridianKernel {
    Green,
    Neumann(NeumannCorrection),
    /// P(interior, boundary); either argument order is accepted and the
    /// one with |w| = 1 is taken as the boundary point.
    Poisson,
}

impl MeridianKernel {
    pub fn eval(&self, a: Meridian, b: Meridian) -> f64 {
        match self {
            MeridianKernel::Green => gbar_st(a, b.s, b.t) - kbar_st(a, b.s, b.t),
            MeridianKernel::Neumann(c) => {
                let base = gbar_st(a, b.s, b.t) + kbar_st(a, b.s, b.t);
                match c {
                    NeumannCorrection::Series { b0 } => base + b0,
                    NeumannCorrection::RingLog => base + ring_log(a, b),
                }
            }
            MeridianKernel::Poisson => {
                if (b.radius() - 1.0).abs() < (a.radius() - 1.0).abs() {
                    poisson_st(a, b)
                } else {
                    poisson_st(b, a)
                }
            }
        }
    }

    /// Points where the kernel is singular as a function of its second
    /// argument with the first held at `a`.
    pub fn singular_points(&self, a: Meridian) -> Vec<Meridian> {
        match self {
            MeridianKernel::Poisson => vec![a],
            _ => {
                let mut v = vec![a];
                if let Some(im) = a.image() {
                    if im.radius() < 4.0 {
                        v.push(im);
                    }
                }
                v
            }
        }
    }
}

/// Poisson kernel with interior source `eta` and boundary point `xi`:
/// on |w| = 1, ∂/∂n_0 = 2√s (s ∂_s + t ∂_t).
pub fn poisson_st(eta: Meridian, xi: Meridian) -> f64 {
    let s = Dual::<2>::variable(xi.s, 0);
    let t = Dual::<2>::variable(xi.t, 1);
    let g = gbar_st(eta, s, t) - kbar_st(eta, s, t);
    let r = xi.radius();
    -0.25 * 2.0 * xi.s.max(0.0).sqrt() * (xi.s * g.d[0] + xi.t * g.d[1]) / r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a0_examples() {
        assert!((a0(1) - 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert!((a0(2) - 1.0 / PI.powi(3)).abs() < 1e-16);
        for n in 1..=10 {
            assert!(a0(n) > 0.0);
        }
    }

    #[test]
    fn fundamental_examples() {
        let e = Point::identity(1);
        let v = fundamental(&e, &Point::h1(1.0, 0.0, 0.0)).unwrap();
        assert!((v - a0(1)).abs() < 1e-16);
        let v = fundamental(&e, &Point::h1(1.0, 0.0, 1.0)).unwrap();
        assert!((v - a0(1) / 2f64.sqrt()).abs() < 1e-16);
        assert_eq!(fundamental(&e, &e), Err(Error::KernelPole));
    }

    #[test]
    fn green_at_center_vanishes_on_sphere() {
        let e = Point::identity(1);
        let b = Point::h1(0.6f64.sqrt() * 0.6, 0.6f64.sqrt() * 0.8, 0.8);
        assert!(green(&e, &b).unwrap().abs() < 1e-15);
        assert!(green_raw(&e, &b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn meridian_forms_match_chart_forms() {
        let eta = Point::h1(0.4, -0.3, 0.2);
        let xi = Point::h1(-0.1, 0.5, -0.35);
        let me = Meridian::from_point(&eta);
        let mx = Meridian::from_point(&xi);
        let g1 = MeridianKernel::Green.eval(me, mx);
        let g2 = green(&eta, &xi).unwrap();
        assert!((g1 - g2).abs() < 1e-14);
        let n1 = MeridianKernel::Neumann(NeumannCorrection::default()).eval(me, mx);
        let n2 = neumann(&eta, &xi, &SeriesConfig::default()).unwrap();
        assert!((n1 - n2).abs() < 1e-14);
    }

    #[test]
    fn poisson_fast_path_matches_jets() {
        let eta = Point::h1(0.3, 0.1, -0.2);
        let psi: f64 = 0.4;
        let xi = Point::h1(psi.cos().sqrt() * 0.8, psi.cos().sqrt() * 0.6, psi.sin());
        let p1 = poisson(&eta, &xi).unwrap();
        let p2 = poisson_st(Meridian::from_point(&eta), Meridian::from_point(&xi));
        assert!((p1 - p2).abs() < 1e-13, "{p1} vs {p2}");
        assert!(p1 > 0.0);
    }

    #[test]
    fn ring_log_vanishes_at_center() {
        let e = Meridian::new(0.0, 0.0);
        assert_eq!(ring_log(e, Meridian::new(0.3, 0.2)), 0.0);
    }

    // Legendre expansion Σ_{l≥1} ρ^l/l P_l(cos θ_1) P_l(cos θ_2), ρ = |w_1||w_2|.
    fn ring_log_series(a: Meridian, b: Meridian) -> f64 {
        let (ra, rb) = (a.radius(), b.radius());
        let (ca, cb) = (a.t / ra, b.t / rb);
        let rho = ra * rb;
        let (mut p0a, mut p1a, mut p0b, mut p1b) = (1.0, ca, 1.0, cb);
        let mut acc = 0.0;
        let mut rl = rho;
        for l in 1..20000 {
            acc += rl / l as f64 * p1a * p1b;
            let lf = l as f64;
            let (na, nb) = (((2.0 * lf + 1.0) * ca * p1a - lf * p0a) / (lf + 1.0), ((2.0 * lf + 1.0) * cb * p1b - lf * p0b) / (lf + 1.0));
            (p0a, p1a, p0b, p1b) = (p1a, na, p1b, nb);
            rl *= rho;
            if rl < 1e-17 {
                break;
            }
        }
        acc / (2.0 * PI)
    }

    #[test]
    fn ring_log_matches_legendre_expansion() {
        let pairs = [
            (Meridian::polar(0.5, 0.3), Meridian::polar(0.7, -0.9)),
            (Meridian::polar(0.9, 0.1), Meridian::polar(0.95, 0.15)),
            (Meridian::polar(0.99, 0.4), Meridian::polar(0.985, 0.41)),
        ];
        for (a, b) in pairs {
            let v = ring_log(a, b);
            let r = ring_log_series(a, b);
            assert!((v - r).abs() < 1e-9 * r.abs().max(1.0), "{v} vs {r}");
        }
    }
}
