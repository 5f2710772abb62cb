use serde::Serialize;

use super::engine::EvalPath;
use crate::kernels::Meridian;
use crate::solver::interp::{Cheb2, PolarBox, PolarJet};
use crate::error::Result;

/// Relative residual with the absolute fallback for tiny right sides.
pub fn relative(residual: f64, rhs: f64) -> f64 {
    if rhs.abs() < 1e-12 {
        residual.abs()
    } else {
        residual.abs() / rhs.abs()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TermValue {
    pub term: String,
    pub value: f64,
}

/// One solvability condition ∫_B u_{j+1} dv = ∫ g_j dσ/4.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Condition {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub relative_residual: f64,
    pub pass: bool,
    /// The same with boundary measures taken before calibration.
    pub lhs_uncalibrated: f64,
    pub rhs_uncalibrated: f64,
    pub relative_residual_uncalibrated: f64,
    pub pass_uncalibrated: bool,
    pub terms: Vec<TermValue>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SolvabilityReport {
    pub conditions: Vec<Condition>,
    pub tolerance: f64,
    pub calibration: f64,
    pub path: EvalPath,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl SolvabilityReport {
    pub fn max_relative(&self) -> f64 {
        self.conditions.iter().map(|c| c.relative_residual).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FieldMeta {
    pub kind: String,
    pub p: usize,
    pub q: usize,
    pub volume_grid: String,
    pub boundary_grid: String,
    pub calibration: f64,
    pub correction: String,
    pub path: EvalPath,
    pub strict: bool,
    pub forced: bool,
    pub max_condition_residual: Option<f64>,
    pub degree: usize,
}

/// Solution values at the sample points. The first (degree + 1)² samples
/// form the Chebyshev grid on the meridian half-disc, row-major in (R, ψ);
/// any further samples are extra probes.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SolutionField {
    pub samples: Vec<Meridian>,
    pub values: Vec<f64>,
    pub meta: FieldMeta,
}

impl SolutionField {
    pub fn interpolant(&self) -> Result<Cheb2> {
        let m = (self.meta.degree + 1).pow(2);
        Cheb2::new(PolarBox::full(), self.meta.degree, &self.values[..m.min(self.values.len())])
    }

    /// u at any point of the meridian half-disc.
    pub fn value_at(&self, at: Meridian) -> Result<f64> {
        let (r, p) = polar(at);
        Ok(self.interpolant()?.value(r, p))
    }

    pub fn jet_at(&self, at: Meridian) -> Result<PolarJet> {
        let (r, p) = polar(at);
        Ok(self.interpolant()?.jet(r, p))
    }
}

/// (R, ψ) of a meridian point.
pub fn polar(m: Meridian) -> (f64, f64) {
    (m.radius(), m.t.atan2(m.s))
}
