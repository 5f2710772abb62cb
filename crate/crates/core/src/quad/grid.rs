use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hgroup::{Point, ScalarField};
use crate::kernels::{poisson, Meridian};
use crate::special::sphere_area;

/// Tensor layout of a grid.
///
/// `Full` grids carry every coordinate of H_n. `Meridian` grids only
/// sample (ρ, ψ) and fold the sphere directions into the weights, which
/// is exact for functions of (|z|², t).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Full,
    Meridian,
}

/// Quadrature nodes in the open unit Korányi ball.
///
/// Nodes sit at midpoints in gauge radius ρ and in the angle ψ with
/// |z|² = ρ² cos ψ, t = ρ² sin ψ; the volume element is
/// ρ^{2n+1} cos^{n−1}ψ dρ dψ dω.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeGrid {
    pub n: usize,
    pub kind: GridKind,
    pub resolution: usize,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

/// Quadrature nodes on the unit sphere ∂B minus gauge caps of radius
/// `delta_cap` around the characteristic points [0, ±1].
///
/// `weights` are the calibrated horizontal-perimeter weights,
/// `raw_weights` the same before calibration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    pub n: usize,
    pub kind: GridKind,
    pub resolution: usize,
    pub delta_cap: f64,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub raw_weights: Vec<f64>,
    pub calibration: f64,
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 4 {
        return Err(Error::Invalid(format!("resolution {resolution} < 4")));
    }
    Ok(())
}

fn midpoints(a: f64, b: f64, m: usize) -> Vec<f64> {
    let h = (b - a) / m as f64;
    (0..m).map(|i| a + (i as f64 + 0.5) * h).collect()
}

/// Relative midpoint weights with end corrections that cancel the
/// Euler–Maclaurin end terms, estimated from the outermost nodes.
fn end_corrections(m: usize) -> Vec<f64> {
    const WIDE: [f64; 6] = [184831.0, -532379.0, 681550.0, -497086.0, 195203.0, -32119.0];
    const NARROW: [f64; 3] = [2.0, -3.0, 1.0];
    let mut c = vec![1.0; m];
    let (stencil, scale): (&[f64], f64) = match m {
        12.. => (&WIDE, 967680.0),
        6.. => (&NARROW, 24.0),
        _ => return c,
    };
    for (k, d) in stencil.iter().enumerate() {
        c[k] += d / scale;
        c[m - 1 - k] += d / scale;
    }
    c
}

/// Directions on S^{2n−1} ⊂ ℂⁿ by hyperspherical midpoints, with weights
/// summing to the sphere area.
fn sphere_directions(n: usize, m: usize) -> Vec<(Vec<f64>, f64)> {
    let d = 2 * n;
    // d − 2 polar angles in (0, π) and one azimuth in (0, 2π).
    let polar = midpoints(0.0, PI, m);
    let azim = midpoints(0.0, 2.0 * PI, m);
    let mut out = vec![(Vec::new(), 1.0)];
    for k in 0..d - 2 {
        let pow = (d - 2 - k) as i32;
        let mut next = Vec::with_capacity(out.len() * m);
        for (angles, w) in &out {
            for &th in &polar {
                let mut a = angles.clone();
                a.push(th);
                next.push((a, w * th.sin().powi(pow) * PI / m as f64));
            }
        }
        out = next;
    }
    let mut dirs = Vec::with_capacity(out.len() * m);
    for (angles, w) in &out {
        for &ph in &azim {
            let mut u = Vec::with_capacity(d);
            let mut sprod = 1.0;
            for &th in angles {
                u.push(sprod * th.cos());
                sprod *= th.sin();
            }
            u.push(sprod * ph.cos());
            u.push(sprod * ph.sin());
            dirs.push((u, w * 2.0 * PI / m as f64));
        }
    }
    dirs
}

fn point_from(n: usize, u: &[f64], r: f64, t: f64) -> Point {
    // u = (x_1, y_1, x_2, y_2, ...) on the unit sphere
    let x = (0..n).map(|j| r * u[2 * j]).collect();
    let y = (0..n).map(|j| r * u[2 * j + 1]).collect();
    Point { x, y, t }
}

impl VolumeGrid {
    /// Full tensor grid: `resolution` nodes per coordinate.
    pub fn ball(n: usize, resolution: usize) -> Result<Self> {
        check_resolution(resolution)?;
        let m = resolution;
        let rho = midpoints(0.0, 1.0, m);
        let psi = midpoints(-PI / 2.0, PI / 2.0, m);
        let dirs = sphere_directions(n, m);
        let cell = (1.0 / m as f64) * (PI / m as f64);
        let mut nodes = Vec::with_capacity(m * m * dirs.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for &r in &rho {
            for &p in &psi {
                let c = p.cos();
                let w = r.powi(2 * n as i32 + 1) * c.powi(n as i32 - 1) * cell;
                let zr = r * c.sqrt();
                for (u, wd) in &dirs {
                    nodes.push(point_from(n, u, zr, r * r * p.sin()));
                    weights.push(w * wd);
                }
            }
        }
        Ok(VolumeGrid { n, kind: GridKind::Full, resolution, nodes, weights })
    }

    /// Reduced (ρ, ψ) grid; node index is i·resolution + j for ρ_i, ψ_j.
    pub fn meridian(n: usize, resolution: usize) -> Result<Self> {
        check_resolution(resolution)?;
        let m = resolution;
        let area = sphere_area(n);
        let cell = (1.0 / m as f64) * (PI / m as f64);
        let mut nodes = Vec::with_capacity(m * m);
        let mut weights = Vec::with_capacity(m * m);
        for &r in &midpoints(0.0, 1.0, m) {
            for &p in &midpoints(-PI / 2.0, PI / 2.0, m) {
                let c = p.cos();
                nodes.push(Point::meridian(n, r * r * c, r * r * p.sin()));
                weights.push(r.powi(2 * n as i32 + 1) * c.powi(n as i32 - 1) * cell * area);
            }
        }
        Ok(VolumeGrid { n, kind: GridKind::Meridian, resolution, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn id(&self) -> String {
        let kind = match self.kind {
            GridKind::Full => "ball",
            GridKind::Meridian => "ball-meridian",
        };
        format!("{kind}(n={},res={})", self.n, self.resolution)
    }

    /// Weights of the midpoint rule with end corrections in both ρ and ψ,
    /// high-order accurate for integrands smooth in (ρ, ψ).
    /// Full grids return their plain weights.
    pub fn corrected_weights(&self) -> Vec<f64> {
        if self.kind == GridKind::Full {
            return self.weights.clone();
        }
        let m = self.resolution;
        let c = end_corrections(m);
        self.weights.iter().enumerate().map(|(k, w)| w * c[k / m] * c[k % m]).collect()
    }

    pub fn meridians(&self) -> Vec<Meridian> {
        self.nodes.iter().map(Meridian::from_point).collect()
    }
}

/// Closed-form volume of the unit Korányi ball of H_n.
pub fn ball_volume(n: usize) -> f64 {
    // |S^{2n−1}| ∫ρ^{2n+1}dρ ∫cos^{n−1}ψ dψ
    let e = n - 1;
    let (mut cos_int, mut j) = if e % 2 == 0 { (PI, 0) } else { (2.0, 1) };
    while j < e {
        j += 2;
        cos_int *= (j - 1) as f64 / j as f64;
    }
    sphere_area(n) * cos_int / (2 * n + 2) as f64
}

/// Largest |ψ| kept on the boundary: the gauge distance from
/// [√cos ψ ω, sin ψ] to [0, ±1] is (2(1 − |sin ψ|))^{1/4}.
pub fn cap_angle(delta_cap: f64) -> Result<f64> {
    if !(delta_cap > 0.0) || delta_cap >= 2f64.powf(0.25) {
        return Err(Error::Invalid(format!("delta_cap = {delta_cap} out of range")));
    }
    Ok((1.0 - delta_cap.powi(4) / 2.0).asin())
}

impl BoundaryGrid {
    pub fn sphere(n: usize, resolution: usize, delta_cap: f64) -> Result<Self> {
        Self::build(n, resolution, delta_cap, GridKind::Full)
    }

    pub fn meridian(n: usize, resolution: usize, delta_cap: f64) -> Result<Self> {
        Self::build(n, resolution, delta_cap, GridKind::Meridian)
    }

    fn build(n: usize, resolution: usize, delta_cap: f64, kind: GridKind) -> Result<Self> {
        check_resolution(resolution)?;
        let pc = cap_angle(delta_cap)?;
        let m = resolution;
        let dpsi = 2.0 * pc / m as f64;
        let dirs = match kind {
            GridKind::Full => sphere_directions(n, m),
            GridKind::Meridian => {
                let mut u = vec![0.0; 2 * n];
                u[0] = 1.0;
                vec![(u, sphere_area(n))]
            }
        };
        let mut nodes = Vec::new();
        let mut raw = Vec::new();
        for &p in &midpoints(-pc, pc, m) {
            let c = p.cos();
            let w = c.powf(n as f64 - 0.5) * dpsi;
            for (u, wd) in &dirs {
                nodes.push(point_from(n, u, c.sqrt(), p.sin()));
                raw.push(w * wd);
            }
        }
        let centre = Point::identity(n);
        let mut mass = 0.0;
        for (p, w) in nodes.iter().zip(&raw) {
            mass += w * poisson(&centre, p)?;
        }
        let calibration = 1.0 / mass;
        let weights = raw.iter().map(|w| w * calibration).collect();
        Ok(BoundaryGrid { n, kind, resolution, delta_cap, nodes, weights, raw_weights: raw, calibration })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn id(&self) -> String {
        let kind = match self.kind {
            GridKind::Full => "sphere",
            GridKind::Meridian => "sphere-meridian",
        };
        format!("{kind}(n={},res={},cap={})", self.n, self.resolution, self.delta_cap)
    }

    pub fn meridians(&self) -> Vec<Meridian> {
        self.nodes.iter().map(Meridian::from_point).collect()
    }

    /// ψ of each node for meridian grids.
    pub fn angles(&self) -> Vec<f64> {
        self.nodes.iter().map(|p| p.t.asin()).collect()
    }
}

pub fn ball_grid(n: usize, resolution: usize) -> Result<VolumeGrid> {
    VolumeGrid::ball(n, resolution)
}

pub fn boundary_grid(n: usize, resolution: usize, delta_cap: f64) -> Result<BoundaryGrid> {
    BoundaryGrid::sphere(n, resolution, delta_cap)
}

fn weighted_sum(f: &dyn ScalarField, nodes: &[Point], weights: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (p, w)) in nodes.iter().zip(weights).enumerate() {
        let v = f.eval(p)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteNode { node: i });
        }
        acc += w * v;
    }
    Ok(acc)
}

pub fn integrate_volume(f: &dyn ScalarField, grid: &VolumeGrid) -> Result<f64> {
    weighted_sum(f, &grid.nodes, &grid.weights)
}

/// Integral against the calibrated boundary measure.
pub fn integrate_boundary(f: &dyn ScalarField, grid: &BoundaryGrid) -> Result<f64> {
    weighted_sum(f, &grid.nodes, &grid.weights)
}

/// Σ w_i v_i with the same finiteness check as the field integrals.
pub fn weighted_values(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: weights.len(), found: values.len() });
    }
    let mut acc = 0.0;
    for (i, (v, w)) in values.iter().zip(weights).enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteNode { node: i });
        }
        acc += w * v;
    }
    Ok(acc)
}
