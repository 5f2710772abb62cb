//! Chebyshev tensor interpolation on boxes of the polar meridian
//! coordinates (R, ψ) with R = |w| = ρ², plus the polar form of L_0.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};

/// First-kind Chebyshev nodes on [−1, 1] (descending) with barycentric
/// weights.
fn cheb(d: usize) -> (Vec<f64>, Vec<f64>) {
    (0..=d)
        .map(|k| {
            let th = (2 * k + 1) as f64 * PI / (2 * d + 2) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            (th.cos(), sign * th.sin())
        })
        .unzip()
}

fn diff_matrix(x: &[f64], w: &[f64]) -> Array2<f64> {
    let n = x.len();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d[[i, j]] = v;
                diag -= v;
            }
        }
        d[[i, i]] = diag;
    }
    d
}

fn bary(x: &[f64], w: &[f64], at: f64) -> Vec<f64> {
    if let Some(k) = x.iter().position(|xk| *xk == at) {
        let mut e = vec![0.0; x.len()];
        e[k] = 1.0;
        return e;
    }
    let raw: Vec<f64> = x.iter().zip(w).map(|(xk, wk)| wk / (at - xk)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / s).collect()
}

/// A box [r0, r1] × [p0, p1] in (R, ψ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarBox {
    pub r0: f64,
    pub r1: f64,
    pub p0: f64,
    pub p1: f64,
}

impl PolarBox {
    /// The whole meridian half-disc.
    pub fn full() -> Self {
        PolarBox { r0: 0.0, r1: 1.0, p0: -PI / 2.0, p1: PI / 2.0 }
    }

    pub fn around(r: f64, p: f64, half: f64) -> Self {
        PolarBox { r0: r - half, r1: r + half, p0: p - half, p1: p + half }
    }
}

/// Values and derivatives in (R, ψ).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PolarJet {
    pub u: f64,
    pub ur: f64,
    pub up: f64,
    pub urr: f64,
    pub urp: f64,
    pub upp: f64,
}

impl PolarJet {
    /// L_0 U = U_s + s (U_ss + U_tt) for U(s, t), s = R cos ψ, t = R sin ψ.
    pub fn sublaplacian(&self, r: f64, psi: f64) -> f64 {
        let (sn, c) = psi.sin_cos();
        2.0 * c * self.ur - sn * self.up / r + r * c * self.urr + c * self.upp / r
    }

    /// (U_s, U_t).
    pub fn gradient(&self, r: f64, psi: f64) -> (f64, f64) {
        let (sn, c) = psi.sin_cos();
        (c * self.ur - sn * self.up / r, sn * self.ur + c * self.up / r)
    }

    /// ∂U/∂n_0 on |w| = 1: 2√s R U_R / |w|.
    pub fn normal_derivative(&self, psi: f64) -> f64 {
        2.0 * psi.cos().max(0.0).sqrt() * self.ur
    }
}

/// Tensor interpolant of degree `d` in each variable.
#[derive(Clone, Debug)]
pub struct Cheb2 {
    pub domain: PolarBox,
    pub degree: usize,
    x: Vec<f64>,
    w: Vec<f64>,
    /// values[i][j] at (R_i, ψ_j)
    values: Array2<f64>,
    derivs: [Array2<f64>; 5],
}

impl Cheb2 {
    /// Sample points in row-major (R, ψ) order.
    pub fn points(domain: PolarBox, degree: usize) -> Vec<(f64, f64)> {
        let (x, _) = cheb(degree);
        let mut out = Vec::with_capacity(x.len() * x.len());
        for xr in &x {
            for xp in &x {
                out.push((map(xr, domain.r0, domain.r1), map(xp, domain.p0, domain.p1)));
            }
        }
        out
    }

    pub fn new(domain: PolarBox, degree: usize, values: &[f64]) -> Result<Self> {
        let m = degree + 1;
        if values.len() != m * m {
            return Err(Error::Interpolation(format!("{} samples for degree {degree}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Interpolation("non-finite sample".into()));
        }
        let (x, w) = cheb(degree);
        let d = diff_matrix(&x, &w);
        let sr = 2.0 / (domain.r1 - domain.r0);
        let sp = 2.0 / (domain.p1 - domain.p0);
        let v = Array2::from_shape_vec((m, m), values.to_vec()).map_err(|e| Error::Interpolation(e.to_string()))?;
        let dr = d.dot(&v) * sr;
        let dp = v.dot(&d.t()) * sp;
        let drr = d.dot(&dr) * sr;
        let drp = dr.dot(&d.t()) * sp;
        let dpp = dp.dot(&d.t()) * sp;
        Ok(Cheb2 { domain, degree, x, w, values: v, derivs: [dr, dp, drr, drp, dpp] })
    }

    fn local(&self, r: f64, p: f64) -> (Vec<f64>, Vec<f64>) {
        let b = self.domain;
        let xr = (2.0 * r - b.r0 - b.r1) / (b.r1 - b.r0);
        let xp = (2.0 * p - b.p0 - b.p1) / (b.p1 - b.p0);
        (bary(&self.x, &self.w, xr), bary(&self.x, &self.w, xp))
    }

    fn contract(a: &Array2<f64>, lr: &[f64], lp: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, ci) in lr.iter().enumerate() {
            let row: f64 = lp.iter().enumerate().map(|(j, cj)| cj * a[[i, j]]).sum();
            acc += ci * row;
        }
        acc
    }

    pub fn value(&self, r: f64, p: f64) -> f64 {
        let (lr, lp) = self.local(r, p);
        Self::contract(&self.values, &lr, &lp)
    }

    pub fn jet(&self, r: f64, p: f64) -> PolarJet {
        let (lr, lp) = self.local(r, p);
        let c = |a: &Array2<f64>| Self::contract(a, &lr, &lp);
        PolarJet {
            u: c(&self.values),
            ur: c(&self.derivs[0]),
            up: c(&self.derivs[1]),
            urr: c(&self.derivs[2]),
            urp: c(&self.derivs[3]),
            upp: c(&self.derivs[4]),
        }
    }

    /// The interpolant of L_0 applied at the nodes.
    pub fn apply_sublaplacian(&self) -> Result<Cheb2> {
        let pts = Self::points(self.domain, self.degree);
        let m = self.degree + 1;
        let vals: Vec<f64> = pts
            .iter()
            .enumerate()
            .map(|(k, (r, p))| {
                let (i, j) = (k / m, k % m);
                let jet = PolarJet {
                    u: self.values[[i, j]],
                    ur: self.derivs[0][[i, j]],
                    up: self.derivs[1][[i, j]],
                    urr: self.derivs[2][[i, j]],
                    urp: self.derivs[3][[i, j]],
                    upp: self.derivs[4][[i, j]],
                };
                jet.sublaplacian(*r, *p)
            })
            .collect();
        Cheb2::new(self.domain, self.degree, &vals)
    }
}

fn map(x: &f64, a: f64, b: f64) -> f64 {
    0.5 * (a + b) + 0.5 * (b - a) * x
}
