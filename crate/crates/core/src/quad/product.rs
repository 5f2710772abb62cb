//! Product integration on meridian grids (n = 1).
//!
//! Grid values are extended to a piecewise bilinear function of (ρ, ψ)
//! (linear in ψ on the boundary) and the kernel is integrated against each
//! hat exactly up to a small relative tolerance. Column entries are the hat
//! moments divided by the node weight, so applying a column with the grid
//! weights reproduces the integral of the kernel times the interpolant.
//!
//! Each quarter cell is handled by a tier chosen from its distance to the
//! kernel's singular points: 2×2 Gauss far away, 3×3 Gauss at moderate
//! distance, adaptive refinement close by, and Duffy triangles when a
//! singular point lies inside the quarter. Every tier is accurate to about
//! 1e−7 of the quarter's contribution, so columns vary smoothly with the
//! target point.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::adapt::{adapt1_rel, adapt2_rel, Rect};
use super::grid::{BoundaryGrid, GridKind, VolumeGrid};
use crate::error::{Error, Result};
use crate::kernels::Meridian;
use crate::special::gauss_on;

const REL_TOL: f64 = 1e-7;
const NEAR: f64 = 3.0;
const MID: f64 = 8.0;
const DEPTH: u32 = 14;
const DUFFY_PANELS: usize = 12;

/// A kernel as a function of the integration point, with its singular points.
pub trait Integrand: Sync {
    fn value(&self, zeta: Meridian) -> f64;
}

impl<F: Fn(Meridian) -> f64 + Sync> Integrand for F {
    fn value(&self, zeta: Meridian) -> f64 {
        self(zeta)
    }
}

fn check_meridian(n: usize, kind: GridKind) -> Result<()> {
    if n != 1 || kind != GridKind::Meridian {
        return Err(Error::Unsupported("product integration needs a meridian grid with n = 1".into()));
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct Quarter {
    rect: Rect,
    /// self, ρ-neighbour, ψ-neighbour, diagonal
    node: [usize; 4],
    r0: f64,
    dr: f64,
    p0: f64,
    dp: f64,
    center: Meridian,
    diam: f64,
}

impl Quarter {
    fn basis(&self, rho: f64, psi: f64) -> [f64; 4] {
        let a = (rho - self.r0) / self.dr;
        let b = (psi - self.p0) / self.dp;
        [(1.0 - a) * (1.0 - b), a * (1.0 - b), (1.0 - a) * b, a * b]
    }
}

fn jac(rho: f64) -> f64 {
    2.0 * PI * rho * rho * rho
}

type Pt4 = (Meridian, [f64; 4]);

/// Product-integration rule for volume integrals on a meridian grid.
#[derive(Clone, Debug)]
pub struct VolumeRule {
    pub resolution: usize,
    pub weights: Vec<f64>,
    pub nodes: Vec<Meridian>,
    quarters: Vec<Quarter>,
    far: Vec<Pt4>,
    mid: Vec<Pt4>,
}

fn tensor_points(q: &Quarter, order: usize) -> Vec<Pt4> {
    let mut out = Vec::with_capacity(order * order);
    for (r, wr) in gauss_on(order, q.rect.x0, q.rect.x1) {
        for (p, wp) in gauss_on(order, q.rect.y0, q.rect.y1) {
            let b = q.basis(r, p);
            let s = wr * wp * jac(r);
            out.push((Meridian::polar(r, p), b.map(|v| v * s)));
        }
    }
    out
}

impl VolumeRule {
    pub fn new(grid: &VolumeGrid) -> Result<Self> {
        check_meridian(grid.n, grid.kind)?;
        let m = grid.resolution;
        let h = 1.0 / m as f64;
        let k = PI / m as f64;
        let mut quarters = Vec::with_capacity(4 * m * m);
        for i in 0..m {
            for j in 0..m {
                let r = (i as f64 + 0.5) * h;
                let p = -PI / 2.0 + (j as f64 + 0.5) * k;
                for (di, dj) in [(-1i64, -1i64), (1, -1), (-1, 1), (1, 1)] {
                    let ii = i as i64 + di;
                    let jj = j as i64 + dj;
                    let ri = if ii < 0 || ii >= m as i64 { i } else { ii as usize };
                    let pj = if jj < 0 || jj >= m as i64 { j } else { jj as usize };
                    let (x0, x1) = if di < 0 { (r - h / 2.0, r) } else { (r, r + h / 2.0) };
                    let (y0, y1) = if dj < 0 { (p - k / 2.0, p) } else { (p, p + k / 2.0) };
                    let rc = 0.5 * (x0 + x1);
                    let diam = (2.0 * rc * h / 2.0).hypot(rc * rc * k / 2.0);
                    quarters.push(Quarter {
                        rect: Rect::new(x0, x1, y0, y1),
                        node: [i * m + j, ri * m + j, i * m + pj, ri * m + pj],
                        r0: r,
                        dr: di as f64 * h,
                        p0: p,
                        dp: dj as f64 * k,
                        center: Meridian::polar(rc, 0.5 * (y0 + y1)),
                        diam,
                    });
                }
            }
        }
        let far = quarters.iter().flat_map(|q| tensor_points(q, 2)).collect();
        let mid = quarters.iter().flat_map(|q| tensor_points(q, 3)).collect();
        Ok(VolumeRule { resolution: m, weights: grid.weights.clone(), nodes: grid.meridians(), quarters, far, mid })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Column of hat moments of `f` divided by the node weights.
    pub fn column(&self, f: &dyn Integrand, singular: &[Meridian]) -> Vec<f64> {
        let polar: Vec<(f64, f64)> = singular.iter().map(|s| (s.radius().sqrt(), s.t.atan2(s.s))).collect();
        let mut col = vec![0.0; self.len()];
        let far: Vec<[f64; 4]> = (0..self.quarters.len()).map(|qi| fixed(f, &self.far[4 * qi..4 * qi + 4])).collect();
        // Tolerance floor for near quarters: a fraction of the mean quarter
        // contribution, so that tiny quarters close to a singular point are
        // not refined to a relative accuracy nobody sees.
        let mean = far.iter().map(|m| m.iter().map(|v| v.abs()).sum::<f64>()).sum::<f64>() / far.len() as f64;
        let floor = REL_TOL * mean;
        for (qi, q) in self.quarters.iter().enumerate() {
            let d = singular.iter().map(|s| s.dist(q.center)).fold(f64::INFINITY, f64::min) / q.diam;
            let mom = if d >= MID {
                far[qi]
            } else if d >= NEAR {
                fixed(f, &self.mid[9 * qi..9 * qi + 9])
            } else {
                near_quarter(f, q, &polar, floor)
            };
            for k in 0..4 {
                col[q.node[k]] += mom[k];
            }
        }
        for (c, w) in col.iter_mut().zip(&self.weights) {
            *c /= w;
        }
        col
    }
}

fn fixed(f: &dyn Integrand, pts: &[Pt4]) -> [f64; 4] {
    let mut acc = [0.0; 4];
    for (z, b) in pts {
        let v = f.value(*z);
        for k in 0..4 {
            acc[k] += v * b[k];
        }
    }
    acc
}

fn near_quarter(f: &dyn Integrand, q: &Quarter, polar: &[(f64, f64)], floor: f64) -> [f64; 4] {
    let mut g = |r: f64, p: f64| {
        let v = f.value(Meridian::polar(r, p)) * jac(r);
        q.basis(r, p).map(|b| b * v)
    };
    let r = q.rect;
    let tol_r = 1e-12 * (r.x1 - r.x0);
    let tol_p = 1e-12 * (r.y1 - r.y0);
    let apex = polar.iter().find(|(pr, pp)| {
        *pr > 1e-9 && *pr >= r.x0 - tol_r && *pr <= r.x1 + tol_r && *pp >= r.y0 - tol_p && *pp <= r.y1 + tol_p
    });
    let Some(&(ar, ap)) = apex else {
        return adapt2_rel(&mut g, r, REL_TOL, floor, DEPTH);
    };
    let ar = ar.clamp(r.x0, r.x1);
    let ap = ap.clamp(r.y0, r.y1);
    let corners = [(r.x0, r.y0), (r.x1, r.y0), (r.x1, r.y1), (r.x0, r.y1)];
    let area = (r.x1 - r.x0) * (r.y1 - r.y0);
    let mut acc = [0.0; 4];
    for e in 0..4 {
        let (e0, e1) = (corners[e], corners[(e + 1) % 4]);
        let (ax, ay) = (e0.0 - ar, e0.1 - ap);
        let (bx, by) = (e1.0 - e0.0, e1.1 - e0.1);
        let cross = (ax * by - ay * bx).abs();
        if cross < 1e-12 * area {
            continue;
        }
        for &(u, wu) in duffy_u() {
            for &(v, wv) in duffy_v() {
                let x = ar + u * (ax + v * bx);
                let y = ap + u * (ay + v * by);
                let s = wu * wv * u * cross;
                let part = g(x, y);
                for k in 0..4 {
                    acc[k] += s * part[k];
                }
            }
        }
    }
    acc
}

/// Radial rule for Duffy triangles: Gauss panels graded by 1/3 toward the
/// apex, where the integrand behaves like u log u.
fn duffy_u() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut out = Vec::new();
        let mut hi = 1.0;
        for p in 0..DUFFY_PANELS {
            let lo = if p + 1 == DUFFY_PANELS { 0.0 } else { hi / 3.0 };
            out.extend(gauss_on(6, lo, hi));
            hi = lo;
        }
        out
    })
}

fn duffy_v() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_on(8, 0.0, 1.0))
}

#[derive(Clone, Debug)]
struct Segment {
    a: f64,
    b: f64,
    left: usize,
    right: usize,
    edge: bool,
    mid: Meridian,
    pts: Vec<(Meridian, [f64; 2])>,
}

impl Segment {
    fn hats(&self, psi: f64) -> [f64; 2] {
        if self.edge {
            return [1.0, 0.0];
        }
        let l = (psi - self.a) / (self.b - self.a);
        [1.0 - l, l]
    }
}

fn bjac(psi: f64) -> f64 {
    2.0 * PI * psi.cos().max(0.0).sqrt()
}

const BOUNDARY_ORDER: usize = 6;

/// Product-integration rule for boundary integrals on a meridian boundary
/// grid. Columns are hat moments over raw weights and are meant to be
/// applied with the calibrated weights.
#[derive(Clone, Debug)]
pub struct BoundaryRule {
    pub psi: Vec<f64>,
    pub raw_weights: Vec<f64>,
    pub weights: Vec<f64>,
    pub nodes: Vec<Meridian>,
    spacing: f64,
    segments: Vec<Segment>,
}

impl BoundaryRule {
    pub fn new(grid: &BoundaryGrid) -> Result<Self> {
        check_meridian(grid.n, grid.kind)?;
        let psi = grid.angles();
        let m = psi.len();
        let cap = super::grid::cap_angle(grid.delta_cap)?;
        let spacing = 2.0 * cap / m as f64;
        let mut segments = Vec::with_capacity(m + 1);
        let mut push = |a: f64, b: f64, left: usize, right: usize, edge: bool| {
            let pts = gauss_on(BOUNDARY_ORDER, a, b)
                .into_iter()
                .map(|(p, w)| {
                    let seg_hats = if edge { [1.0, 0.0] } else { [(b - p) / (b - a), (p - a) / (b - a)] };
                    (Meridian::new(p.cos(), p.sin()), seg_hats.map(|h| h * w * bjac(p)))
                })
                .collect();
            let c = 0.5 * (a + b);
            segments.push(Segment { a, b, left, right, edge, mid: Meridian::new(c.cos(), c.sin()), pts });
        };
        push(-cap, psi[0], 0, 0, true);
        for i in 0..m - 1 {
            push(psi[i], psi[i + 1], i, i + 1, false);
        }
        push(psi[m - 1], cap, m - 1, m - 1, true);
        Ok(BoundaryRule {
            psi,
            raw_weights: grid.raw_weights.clone(),
            weights: grid.weights.clone(),
            nodes: grid.meridians(),
            spacing,
            segments,
        })
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn column(&self, f: &dyn Integrand, singular: &[Meridian]) -> Vec<f64> {
        let mut col = vec![0.0; self.len()];
        for seg in &self.segments {
            let d = singular.iter().map(|s| s.dist(seg.mid)).fold(f64::INFINITY, f64::min);
            let mom = if seg.edge || d < NEAR * self.spacing {
                let mut g = |p: f64| {
                    let v = f.value(Meridian::new(p.cos(), p.sin())) * bjac(p);
                    seg.hats(p).map(|h| h * v)
                };
                adapt1_rel(&mut g, seg.a, seg.b, REL_TOL, DEPTH + 6)
            } else {
                let mut acc = [0.0; 2];
                for (z, w) in &seg.pts {
                    let v = f.value(*z);
                    acc[0] += v * w[0];
                    acc[1] += v * w[1];
                }
                acc
            };
            col[seg.left] += mom[0];
            col[seg.right] += mom[1];
        }
        for (c, w) in col.iter_mut().zip(&self.raw_weights) {
            *c /= w;
        }
        col
    }
}
