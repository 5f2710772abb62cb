use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exprdsl::{is_circular, parse, Expr};
use crate::kernels::NeumannCorrection;

/// Problem families. `Dirichlet` is the polyharmonic Dirichlet helper
/// used inside the mixed problems, exposed for direct use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    #[serde(alias = "Neumann-m", alias = "neumann-m")]
    Neumann,
    #[serde(alias = "NeumannDirichlet")]
    NeumannDirichlet,
    #[serde(alias = "DirichletNeumann")]
    DirichletNeumann,
    Dirichlet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolutionSpec {
    /// Volume nodes per coordinate (ρ and ψ).
    pub volume: usize,
    /// Boundary nodes in ψ; 0 means twice the volume resolution.
    pub boundary: usize,
    pub delta_cap: f64,
    /// Degree of the Chebyshev sample grid used for fields and verify.
    pub degree: usize,
}

impl Default for ResolutionSpec {
    fn default() -> Self {
        ResolutionSpec { volume: 16, boundary: 0, delta_cap: 0.05, degree: 20 }
    }
}

impl ResolutionSpec {
    pub fn boundary_nodes(&self) -> usize {
        if self.boundary == 0 {
            2 * self.volume
        } else {
            self.boundary
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionMode {
    /// Exact ring-averaged log term: normal derivative independent of η.
    RingLog,
    /// The series with the configured coefficients (only b_0 for n = 1).
    Series,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesSpec {
    pub correction: CorrectionMode,
    pub b0: f64,
    pub k_max: usize,
    pub m_max: usize,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        SeriesSpec { correction: CorrectionMode::RingLog, b0: 0.0, k_max: 0, m_max: 0 }
    }
}

impl SeriesSpec {
    pub fn correction(&self) -> NeumannCorrection {
        match self.correction {
            CorrectionMode::RingLog => NeumannCorrection::RingLog,
            CorrectionMode::Series => NeumannCorrection::Series { b0: self.b0 },
        }
    }
}

/// Problem specification as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvpSpec {
    pub kind: ProblemKind,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default)]
    pub p: usize,
    #[serde(default)]
    pub q: usize,
    pub f: String,
    /// Neumann data g_0..g_{p−1}.
    #[serde(default)]
    pub g: Vec<String>,
    /// Dirichlet data h_0..h_{q−1}.
    #[serde(default)]
    pub h: Vec<String>,
    #[serde(default)]
    pub resolution: ResolutionSpec,
    #[serde(default)]
    pub series: SeriesSpec,
}

fn one() -> usize {
    1
}

pub const CIRCULARITY_TOL: f64 = 1e-8;

/// A validated problem with parsed data.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: BvpSpec,
    pub f: Expr,
    pub g: Vec<Expr>,
    pub h: Vec<Expr>,
}

impl BvpSpec {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Validation(format!("problem spec: {e}")))
    }

    pub fn total_order(&self) -> usize {
        self.p + self.q
    }

    pub fn validate(&self) -> Result<Problem> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.n != 1 {
            return Err(Error::Unsupported(format!("solvers run on meridian grids for n = 1, got n = {}", self.n)));
        }
        let (p, q) = (self.p, self.q);
        match self.kind {
            ProblemKind::Neumann if p == 0 || q != 0 => return bad(format!("neumann problem needs p ≥ 1 and q = 0, got p = {p}, q = {q}")),
            ProblemKind::Dirichlet if q == 0 || p != 0 => return bad(format!("dirichlet problem needs q ≥ 1 and p = 0, got p = {p}, q = {q}")),
            ProblemKind::NeumannDirichlet | ProblemKind::DirichletNeumann if p == 0 || q == 0 => {
                return bad(format!("mixed problems need p, q ≥ 1, got p = {p}, q = {q}"))
            }
            _ => {}
        }
        if self.g.len() != p {
            return bad(format!("expected {p} Neumann data g, got {}", self.g.len()));
        }
        if self.h.len() != q {
            return bad(format!("expected {q} Dirichlet data h, got {}", self.h.len()));
        }
        if self.resolution.volume < 4 || self.resolution.boundary_nodes() < 4 {
            return bad("resolutions must be at least 4".into());
        }
        if self.resolution.degree < 4 {
            return bad("sample degree must be at least 4".into());
        }
        let expr = |name: String, src: &str| -> Result<Expr> {
            let e = parse(src, self.n).map_err(|e| Error::Validation(format!("{name}: {e}")))?;
            if !is_circular(&e, CIRCULARITY_TOL, self.n) {
                return Err(Error::Validation(format!("{name} = `{src}` is not circular")));
            }
            Ok(e)
        };
        let f = expr("f".into(), &self.f)?;
        let g = self.g.iter().enumerate().map(|(j, s)| expr(format!("g_{j}"), s)).collect::<Result<_>>()?;
        let h = self.h.iter().enumerate().map(|(j, s)| expr(format!("h_{j}"), s)).collect::<Result<_>>()?;
        Ok(Problem { spec: self.clone(), f, g, h })
    }
}
