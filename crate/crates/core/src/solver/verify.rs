use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::engine::build_stages;
use super::interp::Cheb2;
use super::report::SolutionField;
use super::spec::Problem;
use crate::error::Result;
use crate::exprdsl::{eval, Expr};
use crate::kernels::Meridian;
use crate::quad::cap_angle;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ResidualStats {
    pub sup: f64,
    pub l2: f64,
    /// sup of the reference data; relative = sup / scale, or sup when the
    /// data vanish.
    pub scale: f64,
    pub relative: f64,
    pub probes: usize,
}

impl ResidualStats {
    fn from(res: &[f64], reference: &[f64]) -> Self {
        let sup = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let l2 = (res.iter().map(|r| r * r).sum::<f64>() / res.len().max(1) as f64).sqrt();
        let scale = reference.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let relative = if scale < 1e-12 { sup } else { sup / scale };
        ResidualStats { sup, l2, scale, relative, probes: res.len() }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BoundaryResidual {
    pub condition: String,
    pub stats: ResidualStats,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VerifyReport {
    pub interior: ResidualStats,
    pub boundary: Vec<BoundaryResidual>,
    pub seed: u64,
}

/// Interior probes with gauge in [0.3, 0.9] away from the axis ends.
pub fn interior_probes(count: usize, seed: u64) -> Vec<Meridian> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r: f64 = rng.gen_range(0.09..0.81);
            let p: f64 = rng.gen_range(-1.3..1.3);
            Meridian::new(r * p.cos(), r * p.sin())
        })
        .collect()
}

fn data_at(e: &Expr, m: Meridian) -> Result<f64> {
    eval(e, &m.to_point())
}

/// Residuals of L_0^{p+q} u = f at interior probes and of every boundary
/// condition at non-characteristic boundary probes, from the Chebyshev
/// interpolant of the solution. L_0 is iterated on the sample grid.
pub fn verify(field: &SolutionField, problem: &Problem, probes: usize, seed: u64) -> Result<VerifyReport> {
    let spec = &problem.spec;
    let stages = build_stages(spec.kind, spec.p, spec.q, false)?;
    let order = spec.total_order();
    let mut iterates = vec![field.interpolant()?];
    for _ in 0..order {
        let next = iterates.last().expect("nonempty").apply_sublaplacian()?;
        iterates.push(next);
    }
    let pts = interior_probes(probes, seed);
    let top: &Cheb2 = &iterates[order - 1];
    let mut res = Vec::with_capacity(pts.len());
    let mut reference = Vec::with_capacity(pts.len());
    for m in &pts {
        let (r, p) = (m.radius(), m.t.atan2(m.s));
        let f = data_at(&problem.f, *m)?;
        res.push(top.jet(r, p).sublaplacian(r, p) - f);
        reference.push(f);
    }
    let interior = ResidualStats::from(&res, &reference);

    let cap = cap_angle(spec.resolution.delta_cap)?;
    let bpsi: Vec<f64> = (0..probes).map(|k| -cap + (k as f64 + 0.5) * 2.0 * cap / probes as f64).collect();
    let mut boundary = Vec::new();
    for &(j, idx) in &stages.neumann {
        let (mut res, mut reference) = (Vec::new(), Vec::new());
        for &p in &bpsi {
            let g = data_at(&problem.g[j], Meridian::new(p.cos(), p.sin()))?;
            res.push(iterates[idx].jet(1.0, p).normal_derivative(p) - g);
            reference.push(g);
        }
        boundary.push(BoundaryResidual { condition: format!("neumann g{j} on L0^{idx} u"), stats: ResidualStats::from(&res, &reference) });
    }
    for &(s, idx) in &stages.dirichlet {
        let (mut res, mut reference) = (Vec::new(), Vec::new());
        for &p in &bpsi {
            let h = data_at(&problem.h[s], Meridian::new(p.cos(), p.sin()))?;
            res.push(iterates[idx].value(1.0, p) - h);
            reference.push(h);
        }
        boundary.push(BoundaryResidual { condition: format!("dirichlet h{s} on L0^{idx} u"), stats: ResidualStats::from(&res, &reference) });
    }
    Ok(VerifyReport { interior, boundary, seed })
}
