use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{ball_volume, VolumeGrid};
use super::product::{BoundaryRule, VolumeRule};
use crate::error::{Error, Result};
use crate::hgroup::{invert, inverse, koranyi_norm, Point};
use crate::kernels::{a0, fundamental, ring_log, KernelId, KernelKind, Meridian, MeridianKernel, NeumannCorrection};

/// How singular entries were treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularRule {
    /// Plain kernel values; no source and target coincide.
    None,
    /// Self entries replaced by the mean of the gauge-power singularity over
    /// a gauge ball with the cell's volume.
    CapAverage,
    /// Entries are hat moments of the kernel (see [`super::product`]).
    Product,
    /// Products of other matrices.
    Composed,
}

/// Dense kernel matrix, rows indexed by source nodes and columns by targets.
///
/// Applying it to source values f with source weights w gives the targets'
/// values Σ_a M[a][b] w_a f_a.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    pub src: String,
    pub dst: String,
    pub values: Array2<f64>,
    pub rule: SingularRule,
}

impl KernelMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn apply(&self, weights: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        apply(&self.values, weights, f)
    }

    pub fn transpose(&self) -> KernelMatrix {
        KernelMatrix {
            src: self.dst.clone(),
            dst: self.src.clone(),
            values: self.values.t().to_owned(),
            rule: self.rule,
        }
    }
}

pub fn apply(m: &Array2<f64>, weights: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != m.nrows() || f.len() != m.nrows() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: f.len().min(weights.len()) });
    }
    let wf: ndarray::Array1<f64> = weights.iter().zip(f).map(|(w, v)| w * v).collect();
    Ok(m.t().dot(&wf).to_vec())
}

/// a · diag(w) · b
pub fn weighted_product(a: &Array2<f64>, w: &[f64], b: &Array2<f64>) -> Result<Array2<f64>> {
    if a.ncols() != w.len() || b.nrows() != w.len() {
        return Err(Error::DimensionMismatch { expected: w.len(), found: if a.ncols() != w.len() { a.ncols() } else { b.nrows() } });
    }
    let mut bw = b.clone();
    for (mut row, wi) in bw.axis_iter_mut(Axis(0)).zip(w) {
        row *= *wi;
    }
    Ok(a.dot(&bw))
}

/// Iterated kernel K_k = K_{k−1} · diag(w) · K_1 for a square base matrix.
///
/// The first factor enters transposed so that both factors are integrated
/// against their hats in the shared variable; for symmetric kernels this is
/// the same product up to discretization.
pub fn iterate(base: &KernelMatrix, weights: &[f64], k: usize) -> Result<KernelMatrix> {
    if k == 0 {
        return Err(Error::Invalid("iteration order must be at least 1".into()));
    }
    if base.rows() != base.cols() {
        return Err(Error::DimensionMismatch { expected: base.rows(), found: base.cols() });
    }
    if k == 1 {
        return Ok(base.clone());
    }
    let mut acc = weighted_product(&base.values.t().to_owned(), weights, &base.values)?;
    for _ in 2..k {
        acc = weighted_product(&acc, weights, &base.values)?;
    }
    Ok(KernelMatrix { src: base.src.clone(), dst: base.dst.clone(), values: acc, rule: SingularRule::Composed })
}

/// lead · W · m_1 · W · m_2 · …
pub fn chain(lead: &Array2<f64>, weights: &[f64], rest: &[&Array2<f64>]) -> Result<Array2<f64>> {
    let mut acc = lead.clone();
    for m in rest {
        acc = weighted_product(&acc, weights, m)?;
    }
    Ok(acc)
}

/// M_{k,j} = N_k · W · G_j (or S_{k,j} with P_j). `None` is the identity
/// kernel, so M_{k,0} = N_k.
pub fn mixed_kernels(nk: &KernelMatrix, other: Option<&KernelMatrix>, weights: &[f64]) -> Result<KernelMatrix> {
    let Some(gj) = other else {
        return Ok(nk.clone());
    };
    let values = weighted_product(&nk.values, weights, &gj.values)?;
    Ok(KernelMatrix { src: nk.src.clone(), dst: gj.dst.clone(), values, rule: SingularRule::Composed })
}

/// Nyström matrix of point values from a full volume grid to arbitrary
/// targets. Targets that coincide with a source node get the cap-average
/// self entry, which needs a kernel whose singularity is a_0 N^{−2n}.
pub fn nystrom(kernel: &KernelId, src: &VolumeGrid, dst: &[Point], dst_id: &str) -> Result<KernelMatrix> {
    let coincide = |b: &Point| src.nodes.iter().position(|a| a == b);
    let any_self = dst.iter().any(|b| coincide(b).is_some());
    if any_self {
        let ok = matches!(kernel.kind, KernelKind::Fundamental | KernelKind::Green) && !kernel.circularize;
        if !ok {
            return Err(Error::Unsupported(
                "coincident nodes need a kernel with a pure gauge-power singularity (raw fundamental or raw Green)".into(),
            ));
        }
    }
    let n = src.n;
    let cols: Vec<Result<Vec<f64>>> = dst
        .par_iter()
        .map(|b| {
            src.nodes
                .iter()
                .zip(&src.weights)
                .map(|(a, w)| {
                    if a == b {
                        let r = (w / ball_volume(n)).powf(1.0 / (2 * n + 2) as f64);
                        let singular = a0(n) * (n + 1) as f64 / r.powi(2 * n as i32);
                        let regular = if kernel.kind == KernelKind::Green { -kelvin_self(a)? } else { 0.0 };
                        Ok(singular + regular)
                    } else {
                        kernel.eval(a, b)
                    }
                })
                .collect()
        })
        .collect();
    let rule = if any_self { SingularRule::CapAverage } else { SingularRule::None };
    assemble(src.id(), dst_id.to_string(), cols, rule)
}

/// Kelvin term of the raw Green function on the diagonal.
fn kelvin_self(eta: &Point) -> Result<f64> {
    if eta.is_identity() {
        return Ok(a0(eta.dim()));
    }
    let star = invert(eta)?;
    Ok(koranyi_norm(eta).powi(-2 * eta.dim() as i32) * fundamental(&star, &inverse(eta))?)
}

fn assemble(src: String, dst: String, cols: Vec<Result<Vec<f64>>>, rule: SingularRule) -> Result<KernelMatrix> {
    let nb = cols.len();
    let mut values = None;
    for (b, col) in cols.into_iter().enumerate() {
        let col = col?;
        let v = values.get_or_insert_with(|| Array2::zeros((col.len(), nb)));
        for (a, x) in col.into_iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteNode { node: a });
            }
            v[[a, b]] = x;
        }
    }
    let values = values.unwrap_or_else(|| Array2::zeros((0, nb)));
    Ok(KernelMatrix { src, dst, values, rule })
}

/// Splits a meridian kernel into its product-integrated part and a smooth
/// part taken by the point rule.
fn split_kernel(kernel: MeridianKernel) -> (MeridianKernel, Option<NeumannCorrection>) {
    match kernel {
        MeridianKernel::Neumann(c) => (MeridianKernel::Neumann(NeumannCorrection::Series { b0: 0.0 }), Some(c)),
        k => (k, None),
    }
}

fn correction(c: NeumannCorrection, a: Meridian, b: Meridian) -> f64 {
    match c {
        NeumannCorrection::Series { b0 } => b0,
        NeumannCorrection::RingLog => ring_log(a, b),
    }
}

/// Volume-source matrix on a meridian grid by product integration.
///
/// The Neumann correction term is smooth for interior points and is added
/// with the point rule.
pub fn volume_matrix(rule: &VolumeRule, src_id: &str, kernel: MeridianKernel, dst: &[Meridian], dst_id: &str) -> Result<KernelMatrix> {
    let (main, corr) = split_kernel(kernel);
    let cols: Vec<Result<Vec<f64>>> = dst
        .par_iter()
        .map(|&b| {
            let f = move |z: Meridian| main.eval(b, z);
            let mut col = rule.column(&f, &main.singular_points(b));
            if let Some(c) = corr {
                for (x, a) in col.iter_mut().zip(&rule.nodes) {
                    *x += correction(c, *a, b);
                }
            }
            Ok(col)
        })
        .collect();
    assemble(src_id.to_string(), dst_id.to_string(), cols, SingularRule::Product)
}

/// Boundary-source matrix on a meridian boundary grid; apply it with the
/// calibrated boundary weights.
pub fn boundary_matrix(rule: &BoundaryRule, src_id: &str, kernel: MeridianKernel, dst: &[Meridian], dst_id: &str) -> Result<KernelMatrix> {
    let cols: Vec<Result<Vec<f64>>> = dst
        .par_iter()
        .map(|&b| {
            let f = move |z: Meridian| kernel.eval(b, z);
            Ok(rule.column(&f, &kernel.singular_points(b)))
        })
        .collect();
    assemble(src_id.to_string(), dst_id.to_string(), cols, SingularRule::Product)
}
