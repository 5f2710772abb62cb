//! Forward-mode derivatives: second-order jets over the real chart and a
//! light first-order dual number, unified under [`Scalar`] so kernels are
//! written once and evaluated with values, gradients or full Hessians.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Numeric type that kernel and expression code is generic over.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Highest derivative order carried: 0 for plain values.
    const ORDER: u8;

    fn value(&self) -> f64;

    /// A constant with the same derivative shape as `self`.
    fn lift(&self, c: f64) -> Self;

    /// Chain rule for a scalar function with value `f`, slope `df` and
    /// curvature `d2f` at `self.value()`.
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self;

    fn sqrt(&self) -> Self {
        let v = self.value();
        let s = v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * v))
    }

    fn powf(&self, p: f64) -> Self {
        let v = self.value();
        self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }

    fn powi(&self, k: i32) -> Self {
        match k {
            0 => self.lift(1.0),
            1 => self.clone(),
            2 => self.clone() * self.clone(),
            _ => {
                let v = self.value();
                let kf = k as f64;
                self.chain(
                    v.powi(k),
                    kf * v.powi(k - 1),
                    kf * (kf - 1.0) * v.powi(k - 2),
                )
            }
        }
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.chain(e, e, e)
    }

    fn ln(&self) -> Self {
        let v = self.value();
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    // Values must match plain f64 evaluation bit for bit. A fused sincos
    // can differ from sin in the last bit, so the derivative's argument is
    // hidden from the optimizer to keep the two calls apart.
    fn sin(&self) -> Self {
        let v = self.value();
        let s = v.sin();
        self.chain(s, std::hint::black_box(v).cos(), -s)
    }

    fn cos(&self) -> Self {
        let v = self.value();
        let c = v.cos();
        self.chain(c, -std::hint::black_box(v).sin(), -c)
    }

    fn recip(&self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Value and all carried derivatives are finite.
    fn is_finite(&self) -> bool {
        self.value().is_finite()
    }
}

impl Scalar for f64 {
    const ORDER: u8 = 0;
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn chain(&self, f: f64, _df: f64, _d2f: f64) -> Self {
        f
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
}

/// Value, gradient and symmetric Hessian of a scalar field in `dim` real
/// coordinates. For fields on H_n the coordinates are ordered
/// x_1..x_n, y_1..y_n, t.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `dim × dim`.
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(c: f64, dim: usize) -> Self {
        Jet2 { value: c, grad: vec![0.0; dim], hess: vec![0.0; dim * dim] }
    }

    /// The coordinate function `i` evaluated at `v`.
    pub fn variable(v: f64, i: usize, dim: usize) -> Self {
        let mut j = Self::constant(v, dim);
        j.grad[i] = 1.0;
        j
    }

    /// Jets of all coordinate functions at `coords`.
    pub fn seed(coords: &[f64]) -> Vec<Jet2> {
        let d = coords.len();
        coords.iter().enumerate().map(|(i, &v)| Self::variable(v, i, d)).collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn d(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    fn zip(&self, o: &Jet2, f: impl Fn(f64, f64) -> f64) -> Jet2 {
        assert_eq!(self.dim(), o.dim(), "jet dimension mismatch");
        Jet2 {
            value: f(self.value, o.value),
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| f(*a, *b)).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: self.hess.iter().map(|h| h * c).collect(),
        }
    }

    fn product(&self, o: &Jet2) -> Jet2 {
        let d = self.dim();
        assert_eq!(d, o.dim(), "jet dimension mismatch");
        let (a, b) = (self.value, o.value);
        let grad = (0..d).map(|i| a * o.grad[i] + b * self.grad[i]).collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let k = i * d + j;
                hess[k] = a * o.hess[k]
                    + b * self.hess[k]
                    + self.grad[i] * o.grad[j]
                    + o.grad[i] * self.grad[j];
            }
        }
        Jet2 { value: a * b, grad, hess }
    }
}

impl Scalar for Jet2 {
    const ORDER: u8 = 2;
    fn value(&self) -> f64 {
        self.value
    }
    fn lift(&self, c: f64) -> Self {
        Jet2::constant(c, self.dim())
    }
    fn is_finite(&self) -> bool {
        Jet2::is_finite(self)
    }
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let d = self.dim();
        let grad = self.grad.iter().map(|g| df * g).collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let k = i * d + j;
                hess[k] = df * self.hess[k] + d2f * self.grad[i] * self.grad[j];
            }
        }
        Jet2 { value: f, grad, hess }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        self.zip(&o, |a, b| a + b)
    }
}
impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self.zip(&o, |a, b| a - b)
    }
}
impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        self.product(&o)
    }
}
impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        // q = a/b with q' = (a' − q b')/b and
        // q'' = (a'' − q b'' − q'⊗b' − b'⊗q')/b, so the value is a/b exactly.
        let d = self.dim();
        assert_eq!(d, o.dim(), "jet dimension mismatch");
        let b = o.value;
        let q = self.value / b;
        let grad: Vec<f64> = (0..d).map(|i| (self.grad[i] - q * o.grad[i]) / b).collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let k = i * d + j;
                hess[k] = (self.hess[k] - q * o.hess[k] - grad[i] * o.grad[j] - o.grad[i] * grad[j]) / b;
            }
        }
        Jet2 { value: q, grad, hess }
    }
}
impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}
impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, c: f64) -> Jet2 {
        self.value += c;
        self
    }
}
impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, c: f64) -> Jet2 {
        self.value -= c;
        self
    }
}
impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}
impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value / c,
            grad: self.grad.iter().map(|g| g / c).collect(),
            hess: self.hess.iter().map(|h| h / c).collect(),
        }
    }
}

/// First-order dual number in `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub d: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(v: f64) -> Self {
        Dual { v, d: [0.0; N] }
    }
    pub fn variable(v: f64, i: usize) -> Self {
        let mut d = [0.0; N];
        d[i] = 1.0;
        Dual { v, d }
    }
    fn map(self, f: impl Fn(f64) -> f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x = f(*x);
        }
        Dual { v: f(self.v), d }
    }
}

impl<const N: usize> Scalar for Dual<N> {
    const ORDER: u8 = 1;
    fn value(&self) -> f64 {
        self.v
    }
    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d.iter().all(|x| x.is_finite())
    }
    fn lift(&self, c: f64) -> Self {
        Dual::constant(c)
    }
    fn chain(&self, f: f64, df: f64, _d2f: f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= df;
        }
        Dual { v: f, d }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut d = self.d;
        for i in 0..N {
            d[i] += o.d[i];
        }
        Dual { v: self.v + o.v, d }
    }
}
impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut d = self.d;
        for i in 0..N {
            d[i] -= o.d[i];
        }
        Dual { v: self.v - o.v, d }
    }
}
impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = self.v * o.d[i] + o.v * self.d[i];
        }
        Dual { v: self.v * o.v, d }
    }
}
impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v;
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = (self.d[i] - q * o.d[i]) / o.v;
        }
        Dual { v: q, d }
    }
}
impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}
impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.v += c;
        self
    }
}
impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.v -= c;
        self
    }
}
impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        self.map(|x| x * c)
    }
}
impl<const N: usize> Div<f64> for Dual<N> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        self.map(|x| x / c)
    }
}
