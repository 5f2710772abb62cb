//! The Heisenberg group H_n = ℂⁿ × ℝ: group law, gauge, dilations,
//! the conformal inversion, the Kelvin transform and circle averages.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::{Jet2, Scalar};

/// Group element [z, t] with z_j = x_j + i y_j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
        }
        if x.is_empty() {
            return Err(Error::Invalid("dimension n must be at least 1".into()));
        }
        let p = Point { x, y, t };
        if !p.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(p)
    }

    pub fn identity(n: usize) -> Self {
        Point { x: vec![0.0; n], y: vec![0.0; n], t: 0.0 }
    }

    /// Convenience constructor for n = 1.
    pub fn h1(x: f64, y: f64, t: f64) -> Self {
        Point { x: vec![x], y: vec![y], t }
    }

    /// Build from the real chart (x_1..x_n, y_1..y_n, t).
    pub fn from_chart(c: &[f64]) -> Result<Self> {
        if c.len() < 3 || c.len() % 2 == 0 {
            return Err(Error::Invalid(format!("chart of length {} is not 2n+1", c.len())));
        }
        let n = (c.len() - 1) / 2;
        Point::new(c[..n].to_vec(), c[n..2 * n].to_vec(), c[2 * n])
    }

    /// The point [√s, t] on the meridian half-plane (z along the first axis).
    pub fn meridian(n: usize, s: f64, t: f64) -> Self {
        let mut p = Point::identity(n);
        p.x[0] = s.max(0.0).sqrt();
        p.t = t;
        p
    }

    pub fn chart(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(2 * self.dim() + 1);
        c.extend_from_slice(&self.x);
        c.extend_from_slice(&self.y);
        c.push(self.t);
        c
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn z(&self, j: usize) -> Complex64 {
        Complex64::new(self.x[j], self.y[j])
    }

    /// |z|².
    pub fn r2(&self) -> f64 {
        self.x.iter().zip(&self.y).map(|(a, b)| a * a + b * b).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.t == 0.0 && self.x.iter().chain(&self.y).all(|v| *v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    /// Rotate by the circle action z ↦ e^{iθ} z.
    pub fn rotate(&self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point {
            x: self.x.iter().zip(&self.y).map(|(a, b)| c * a - s * b).collect(),
            y: self.x.iter().zip(&self.y).map(|(a, b)| s * a + c * b).collect(),
            t: self.t,
        }
    }
}

fn same_dim(p: &Point, q: &Point) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: q.dim() });
    }
    Ok(())
}

/// Twist term 2 Im(z·ζ̄).
fn twist(p: &Point, q: &Point) -> f64 {
    2.0 * (0..p.dim()).map(|j| p.y[j] * q.x[j] - p.x[j] * q.y[j]).sum::<f64>()
}

pub fn multiply(p: &Point, q: &Point) -> Result<Point> {
    same_dim(p, q)?;
    Ok(Point {
        x: p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect(),
        y: p.y.iter().zip(&q.y).map(|(a, b)| a + b).collect(),
        t: p.t + q.t + twist(p, q),
    })
}

pub fn inverse(p: &Point) -> Point {
    Point {
        x: p.x.iter().map(|v| -v).collect(),
        y: p.y.iter().map(|v| -v).collect(),
        t: -p.t,
    }
}

/// Korányi gauge (|z|⁴ + t²)^{1/4}.
pub fn koranyi_norm(p: &Point) -> f64 {
    let r2 = p.r2();
    (r2 * r2 + p.t * p.t).sqrt().sqrt()
}

/// Gauge distance N(p⁻¹q).
pub fn gauge_distance(p: &Point, q: &Point) -> Result<f64> {
    Ok(koranyi_norm(&multiply(&inverse(p), q)?))
}

pub fn dilate(r: f64, p: &Point) -> Result<Point> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::BadDilation(r));
    }
    Ok(Point {
        x: p.x.iter().map(|v| r * v).collect(),
        y: p.y.iter().map(|v| r * v).collect(),
        t: r * r * p.t,
    })
}

/// Conformal inversion h([z,t]) = [−z/(|z|² − it), −t/(|z|⁴ + t²)].
pub fn invert(p: &Point) -> Result<Point> {
    let s = p.r2();
    let rho = s * s + p.t * p.t;
    if rho == 0.0 {
        return Err(Error::PoleAtIdentity);
    }
    // −z (s + it) / (s² + t²)
    let x = (0..p.dim()).map(|j| -(p.x[j] * s - p.y[j] * p.t) / rho).collect();
    let y = (0..p.dim()).map(|j| -(p.y[j] * s + p.x[j] * p.t) / rho).collect();
    Ok(Point { x, y, t: -p.t / rho })
}

/// A real-valued field on H_n.
pub trait ScalarField: Send + Sync {
    fn eval(&self, p: &Point) -> Result<f64>;
}

impl<F> ScalarField for F
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    fn eval(&self, p: &Point) -> Result<f64> {
        Ok(self(p))
    }
}

/// A field with exact second-order jets.
pub trait JetField: ScalarField {
    fn jet(&self, p: &Point) -> Result<Jet2>;
}

/// A field given by one formula in the real chart, generic over the
/// number type so values and jets come from the same code.
pub trait ChartFn: Send + Sync {
    fn apply<S: Scalar>(&self, chart: &[S]) -> Result<S>;
}

/// Adapter turning a [`ChartFn`] into a field with exact jets.
#[derive(Clone, Debug)]
pub struct Analytic<T>(pub T);

impl<T: ChartFn> ScalarField for Analytic<T> {
    fn eval(&self, p: &Point) -> Result<f64> {
        self.0.apply(&p.chart())
    }
}

impl<T: ChartFn> JetField for Analytic<T> {
    fn jet(&self, p: &Point) -> Result<Jet2> {
        let j = self.0.apply(&Jet2::seed(&p.chart()))?;
        if !j.is_finite() {
            return Err(Error::Singular("non-finite jet".into()));
        }
        Ok(j)
    }
}

/// Kelvin transform N(p)^{−2n} f(h(p)).
pub fn kelvin(f: &dyn ScalarField, p: &Point) -> Result<f64> {
    let hp = invert(p)?;
    let np = koranyi_norm(p);
    Ok(np.powi(-2 * p.dim() as i32) * f.eval(&hp)?)
}

/// Periodic trapezoid average of θ ↦ f([e^{iθ}z, t]).
pub fn circular_average(f: &dyn ScalarField, p: &Point, ntheta: usize) -> Result<f64> {
    if ntheta < 4 {
        return Err(Error::Invalid(format!("ntheta = {ntheta} < 4")));
    }
    let mut acc = 0.0;
    for k in 0..ntheta {
        acc += f.eval(&p.rotate(2.0 * PI * k as f64 / ntheta as f64))?;
    }
    Ok(acc / ntheta as f64)
}

pub const DEFAULT_NTHETA: usize = 32;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_examples() {
        let p = Point::h1(0.0, 1.0, 0.0);
        let q = Point::h1(1.0, 0.0, 0.0);
        assert_eq!(multiply(&p, &q).unwrap(), Point::h1(1.0, 1.0, 2.0));
        let a = Point::h1(0.0, 0.0, 1.5);
        let b = Point::h1(0.0, 0.0, -0.25);
        assert_eq!(multiply(&a, &b).unwrap().t, 1.25);
    }

    #[test]
    fn mixing_dimensions_fails() {
        let p = Point::identity(1);
        let q = Point::identity(2);
        assert!(matches!(multiply(&p, &q), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gauge_examples() {
        assert_eq!(koranyi_norm(&Point::identity(1)), 0.0);
        assert_eq!(koranyi_norm(&Point::h1(1.0, 0.0, 0.0)), 1.0);
        assert_eq!(koranyi_norm(&Point::h1(0.0, 0.0, 4.0)), 2.0);
    }

    #[test]
    fn inversion_examples() {
        let p = invert(&Point::h1(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(p.t, -1.0);
        assert!(p.x[0] == 0.0 && p.y[0] == 0.0);
        assert_eq!(invert(&Point::identity(1)), Err(Error::PoleAtIdentity));
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(dilate(2.0, &Point::h1(1.0, 0.0, 1.0)).unwrap(), Point::h1(2.0, 0.0, 4.0));
        assert!(dilate(0.0, &Point::h1(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn circle_average_examples() {
        let p = Point::h1(1.0, 0.0, 0.3);
        let re = |q: &Point| q.x[0];
        assert!(circular_average(&re, &p, 32).unwrap().abs() < 1e-15);
        let t = |q: &Point| q.t;
        assert!((circular_average(&t, &p, 32).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn kelvin_of_one() {
        let one = |_: &Point| 1.0;
        assert!((kelvin(&one, &Point::h1(0.0, 0.0, 4.0)).unwrap() - 0.25).abs() < 1e-15);
        let p = Point::h1(0.6f64.sqrt(), 0.0, 0.8);
        assert!((kelvin(&one, &p).unwrap() - 1.0).abs() < 1e-14);
    }
}
