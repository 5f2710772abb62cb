//! Left-invariant calculus on H_n built on second-order jets: the fields
//! X_j, Y_j, Z_j, Z̄_j, T, the sub-Laplacian L_0 = ¼Σ(X_j² + Y_j²), the
//! horizontal gradient and the horizontal normal derivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hgroup::{ChartFn, JetField, Point, ScalarField};
use crate::jet::{Jet2, Scalar};

/// Default threshold on ‖∇_0F‖ below which a boundary point counts as
/// characteristic.
pub const EPS_CHAR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    X,
    Y,
    Z,
    Zbar,
    T,
}

/// A left-invariant vector field; `j` is 1-based and ignored for `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldId {
    pub kind: FieldKind,
    pub j: usize,
}

impl FieldId {
    pub fn new(kind: FieldKind, j: usize, n: usize) -> Result<Self> {
        if kind != FieldKind::T && (j == 0 || j > n) {
            return Err(Error::Invalid(format!("field index {j} outside 1..={n}")));
        }
        Ok(FieldId { kind, j })
    }
}

/// Coefficients of a horizontal vector along X_1..X_n, Y_1..Y_n.
#[derive(Clone, Debug, PartialEq)]
pub struct HVector {
    pub coefficients: Vec<f64>,
}

impl HVector {
    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, o: &HVector) -> f64 {
        self.coefficients.iter().zip(&o.coefficients).map(|(a, b)| a * b).sum()
    }
}

/// How a jet was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetMode {
    Analytic,
    FiniteDifference,
}

pub fn jet2(f: &dyn JetField, p: &Point) -> Result<Jet2> {
    f.jet(p)
}

/// Central-difference jet, the cross-check oracle for analytic jets.
/// Step per coordinate is `h_rel · (1 + |c_i|)`.
pub fn fd_jet2(f: &dyn ScalarField, p: &Point, h_rel: f64) -> Result<Jet2> {
    let c = p.chart();
    let d = c.len();
    let at = |shift: &[(usize, f64)]| -> Result<f64> {
        let mut q = c.clone();
        for &(i, h) in shift {
            q[i] += h;
        }
        f.eval(&Point::from_chart(&q)?)
    };
    let h: Vec<f64> = c.iter().map(|v| h_rel * (1.0 + v.abs())).collect();
    let f0 = at(&[])?;
    let mut jet = Jet2::constant(f0, d);
    for i in 0..d {
        let fp = at(&[(i, h[i])])?;
        let fm = at(&[(i, -h[i])])?;
        jet.grad[i] = (fp - fm) / (2.0 * h[i]);
        jet.hess[i * d + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let fpp = at(&[(i, h[i]), (j, h[j])])?;
            let fpm = at(&[(i, h[i]), (j, -h[j])])?;
            let fmp = at(&[(i, -h[i]), (j, h[j])])?;
            let fmm = at(&[(i, -h[i]), (j, -h[j])])?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            jet.hess[i * d + j] = v;
            jet.hess[j * d + i] = v;
        }
    }
    Ok(jet)
}

fn check_dim(jet: &Jet2, p: &Point) -> Result<usize> {
    let n = p.dim();
    if jet.dim() != 2 * n + 1 {
        return Err(Error::DimensionMismatch { expected: 2 * n + 1, found: jet.dim() });
    }
    Ok(n)
}

/// X_j f and Y_j f (0-based j) from a jet.
fn xy_derivs(jet: &Jet2, p: &Point, j: usize) -> (f64, f64) {
    let n = p.dim();
    let ft = jet.grad[2 * n];
    (jet.grad[j] + 2.0 * p.y[j] * ft, jet.grad[n + j] - 2.0 * p.x[j] * ft)
}

/// Applies a left-invariant field to the jet of f at p. Real fields return
/// `(value, 0)`; Z_j and Z̄_j return (real, imaginary) parts.
pub fn apply_field_jet(id: FieldId, jet: &Jet2, p: &Point) -> Result<(f64, f64)> {
    let n = check_dim(jet, p)?;
    if id.kind == FieldKind::T {
        return Ok((jet.grad[2 * n], 0.0));
    }
    if id.j == 0 || id.j > n {
        return Err(Error::Invalid(format!("field index {} outside 1..={n}", id.j)));
    }
    let (xf, yf) = xy_derivs(jet, p, id.j - 1);
    Ok(match id.kind {
        FieldKind::X => (xf, 0.0),
        FieldKind::Y => (yf, 0.0),
        FieldKind::Z => (0.5 * xf, -0.5 * yf),
        FieldKind::Zbar => (0.5 * xf, 0.5 * yf),
        FieldKind::T => unreachable!(),
    })
}

pub fn apply_field(id: FieldId, f: &dyn JetField, p: &Point) -> Result<(f64, f64)> {
    apply_field_jet(id, &f.jet(p)?, p)
}

/// L_0 f = ¼ Σ_j (∂²_{x_j} + ∂²_{y_j} + 4|z_j|²∂²_t + 4y_j∂_{x_j}∂_t − 4x_j∂_{y_j}∂_t) f.
pub fn sublaplacian_jet(jet: &Jet2, p: &Point) -> Result<f64> {
    let n = check_dim(jet, p)?;
    let ti = 2 * n;
    let mut acc = 0.0;
    for j in 0..n {
        let (x, y) = (p.x[j], p.y[j]);
        acc += jet.d2(j, j) + jet.d2(n + j, n + j) + 4.0 * (x * x + y * y) * jet.d2(ti, ti)
            + 4.0 * y * jet.d2(j, ti)
            - 4.0 * x * jet.d2(n + j, ti);
    }
    Ok(0.25 * acc)
}

pub fn sublaplacian(f: &dyn JetField, p: &Point) -> Result<f64> {
    sublaplacian_jet(&f.jet(p)?, p)
}

pub fn horizontal_gradient_jet(jet: &Jet2, p: &Point) -> Result<HVector> {
    let n = check_dim(jet, p)?;
    let mut c = vec![0.0; 2 * n];
    for j in 0..n {
        let (xf, yf) = xy_derivs(jet, p, j);
        c[j] = xf;
        c[n + j] = yf;
    }
    Ok(HVector { coefficients: c })
}

pub fn horizontal_gradient(f: &dyn JetField, p: &Point) -> Result<HVector> {
    horizontal_gradient_jet(&f.jet(p)?, p)
}

/// Defining function of the Korányi ball, |z|⁴ + t² − 1 (negative inside).
#[derive(Clone, Copy, Debug, Default)]
pub struct GaugeLevel;

impl ChartFn for GaugeLevel {
    fn apply<S: Scalar>(&self, c: &[S]) -> Result<S> {
        let n = (c.len() - 1) / 2;
        let mut r2 = c[0].lift(0.0);
        for v in &c[..2 * n] {
            r2 = r2 + v.clone() * v.clone();
        }
        let t = c[2 * n].clone();
        Ok(r2.clone() * r2 + t.clone() * t - 1.0)
    }
}

/// ⟨∇_0u, ∇_0F⟩ / ‖∇_0F‖ from jets of u and F.
pub fn normal_derivative_jet(f_jet: &Jet2, u_jet: &Jet2, p: &Point, eps_char: f64) -> Result<f64> {
    let gf = horizontal_gradient_jet(f_jet, p)?;
    let norm = gf.norm();
    if norm < eps_char {
        return Err(Error::Characteristic(norm));
    }
    let gu = horizontal_gradient_jet(u_jet, p)?;
    Ok(gu.dot(&gf) / norm)
}

pub fn normal_derivative(f: &dyn JetField, u: &dyn JetField, p: &Point) -> Result<f64> {
    normal_derivative_jet(&f.jet(p)?, &u.jet(p)?, p, EPS_CHAR)
}

pub fn is_characteristic(p: &Point, f: &dyn JetField, eps_char: f64) -> Result<bool> {
    Ok(horizontal_gradient(f, p)?.norm() < eps_char)
}
