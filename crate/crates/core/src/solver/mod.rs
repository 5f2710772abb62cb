//! Representation-formula solvers for circular data on the Korányi ball of
//! H_1: polyharmonic Neumann, Neumann–Dirichlet, Dirichlet–Neumann and the
//! polyharmonic Dirichlet helper, with solvability reports and a residual
//! verifier.
//!
//! Orders are p (Neumann) and q (Dirichlet); g always denotes Neumann
//! data and h Dirichlet data. Stage j of a solution is L_0^j u.

mod engine;
pub mod interp;
mod report;
mod spec;
mod verify;

pub use engine::{build_stages, dirichlet_block, neumann_block, Data, DataValues, Discretization, EvalPath, Op, Stages, Target, Term};
pub use report::{polar, relative, Condition, FieldMeta, SolutionField, SolvabilityReport, TermValue};
pub use spec::{BvpSpec, CorrectionMode, Problem, ProblemKind, ResolutionSpec, SeriesSpec, CIRCULARITY_TOL};
pub use verify::{interior_probes, verify, BoundaryResidual, ResidualStats, VerifyReport};

use crate::error::{Error, Result};
use crate::kernels::Meridian;
use crate::quad::{BoundaryGrid, VolumeGrid};
use interp::{Cheb2, PolarBox};

pub const DEFAULT_TAU: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub tau: f64,
    pub path: EvalPath,
    /// Dirichlet–Neumann only: pair the Poisson terms with g as printed.
    pub strict: bool,
    /// Evaluate solutions even when a condition fails.
    pub force: bool,
    /// Extra sample points appended after the Chebyshev grid.
    pub probes: Vec<Meridian>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { tau: DEFAULT_TAU, path: EvalPath::Direct, strict: false, force: false, probes: Vec::new() }
    }
}

/// A validated problem bound to its discretization.
pub struct Solver {
    pub problem: Problem,
    pub disc: Discretization,
    pub data: DataValues,
    pub stages: Stages,
    pub settings: Settings,
}

/// Sample points: the Chebyshev grid of the given degree, then `extra`.
pub fn sample_points(degree: usize, extra: &[Meridian]) -> Vec<Meridian> {
    let mut pts: Vec<Meridian> = Cheb2::points(PolarBox::full(), degree)
        .into_iter()
        .map(|(r, p)| Meridian::new(r * p.cos(), r * p.sin()))
        .collect();
    pts.extend_from_slice(extra);
    pts
}

impl Solver {
    pub fn new(problem: Problem, settings: Settings) -> Result<Self> {
        let r = &problem.spec.resolution;
        let volume = VolumeGrid::meridian(1, r.volume)?;
        let boundary = BoundaryGrid::meridian(1, r.boundary_nodes(), r.delta_cap)?;
        Self::with_grids(problem, volume, boundary, settings)
    }

    pub fn with_grids(problem: Problem, volume: VolumeGrid, boundary: BoundaryGrid, settings: Settings) -> Result<Self> {
        let spec = &problem.spec;
        let stages = build_stages(spec.kind, spec.p, spec.q, settings.strict)?;
        let samples = sample_points(spec.resolution.degree, &settings.probes);
        let disc = Discretization::new(volume, boundary, samples, spec.series.correction())?;
        let data = disc.data_values(&problem)?;
        Ok(Solver { problem, disc, data, stages, settings })
    }

    /// Solvability conditions of the Neumann block. Problems without
    /// Neumann data have none and pass.
    pub fn check(&self) -> Result<SolvabilityReport> {
        let c = self.disc.calibration();
        let mut conditions = Vec::new();
        for &(j, idx) in &self.stages.neumann {
            let mut terms = Vec::new();
            let (mut lhs, mut lhs_raw) = (0.0, 0.0);
            for t in &self.stages.stages[idx + 1] {
                let v = self.disc.volume_integral(&self.disc.eval_term(t, &self.data, Target::V, self.settings.path)?);
                lhs += v;
                lhs_raw += if t.data == Data::F { v } else { v / c };
                terms.push(TermValue { term: t.to_string(), value: v });
            }
            let rhs: f64 = self.data.g[j].iter().zip(&self.disc.boundary.weights).map(|(g, w)| 0.25 * g * w).sum();
            let rhs_raw = rhs / c;
            let rel = relative(lhs - rhs, rhs);
            let rel_raw = relative(lhs_raw - rhs_raw, rhs_raw);
            conditions.push(Condition {
                index: j,
                lhs,
                rhs,
                abs_residual: (lhs - rhs).abs(),
                relative_residual: rel,
                pass: rel < self.settings.tau,
                lhs_uncalibrated: lhs_raw,
                rhs_uncalibrated: rhs_raw,
                relative_residual_uncalibrated: rel_raw,
                pass_uncalibrated: rel_raw < self.settings.tau,
                terms,
            });
        }
        let mut notes = Vec::new();
        if self.settings.strict && self.problem.spec.kind == ProblemKind::DirichletNeumann {
            notes.push("strict mode: Poisson terms pair with Neumann data g_(q-1-r) as printed; the composition-consistent choice uses h_r".into());
        }
        let pass = conditions.iter().all(|c| c.pass);
        Ok(SolvabilityReport { conditions, tolerance: self.settings.tau, calibration: c, path: self.settings.path, pass, notes })
    }

    /// Stage `idx` (L_0^idx u) at the sample points.
    pub fn stage(&self, idx: usize, target: Target) -> Result<Vec<f64>> {
        let terms = self
            .stages
            .stages
            .get(idx)
            .ok_or_else(|| Error::Invalid(format!("stage {idx} beyond total order")))?;
        self.disc.eval_stage(terms, &self.data, target, self.settings.path)
    }

    /// Stage 0 at the sample points by the two-stage route of the mixed
    /// theorems: the lower problem is solved at the volume nodes and its
    /// tabulated solution becomes the interior data of the upper one.
    /// Single-block problems apply their kernels one at a time.
    pub fn two_stage(&self) -> Result<Vec<f64>> {
        let path = EvalPath::Composition;
        let spec = &self.problem.spec;
        let (lower, upper) = match spec.kind {
            ProblemKind::NeumannDirichlet => (
                build_stages(ProblemKind::Dirichlet, 0, spec.q, false)?,
                build_stages(ProblemKind::Neumann, spec.p, 0, false)?,
            ),
            ProblemKind::DirichletNeumann if !self.settings.strict => (
                build_stages(ProblemKind::Neumann, spec.p, 0, false)?,
                build_stages(ProblemKind::Dirichlet, 0, spec.q, false)?,
            ),
            ProblemKind::DirichletNeumann => {
                return Err(Error::Unsupported("strict mode has no two-stage form".into()));
            }
            _ => return self.disc.eval_stage(&self.stages.stages[0], &self.data, Target::X, path),
        };
        let w = self.disc.eval_stage(&lower.stages[0], &self.data, Target::V, path)?;
        let data = DataValues { f_volume: w, f_samples: Vec::new(), ..self.data.clone() };
        self.disc.eval_stage(&upper.stages[0], &data, Target::X, path)
    }

    /// Evaluates the solution; fails with `Unsolvable` when a condition
    /// fails and `force` is off.
    pub fn solve(&self, report: &SolvabilityReport) -> Result<SolutionField> {
        if !report.pass && !self.settings.force {
            let worst = report.conditions.iter().find(|c| !c.pass).expect("a failing condition");
            return Err(Error::Unsolvable(format!(
                "condition {} has relative residual {:.4e} ≥ {}",
                worst.index, worst.relative_residual, report.tolerance
            )));
        }
        let values = match self.settings.path {
            EvalPath::Direct => self.stage(0, Target::X)?,
            EvalPath::Composition => self.two_stage()?,
        };
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteNode { node: k });
        }
        let spec = &self.problem.spec;
        let correction = match spec.series.correction {
            CorrectionMode::RingLog => "ring-log".to_string(),
            CorrectionMode::Series => format!("series(b0={})", spec.series.b0),
        };
        Ok(SolutionField {
            samples: self.disc.samples.clone(),
            values,
            meta: FieldMeta {
                kind: serde_json::to_value(spec.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                p: spec.p,
                q: spec.q,
                volume_grid: self.disc.volume.id(),
                boundary_grid: self.disc.boundary.id(),
                calibration: self.disc.calibration(),
                correction,
                path: self.settings.path,
                strict: self.settings.strict,
                forced: !report.pass,
                max_condition_residual: (!report.conditions.is_empty()).then(|| report.max_relative()),
                degree: spec.resolution.degree,
            },
        })
    }

    pub fn check_and_solve(&self) -> Result<(SolvabilityReport, SolutionField)> {
        let report = self.check()?;
        let field = self.solve(&report)?;
        Ok((report, field))
    }
}

fn expect_kind(problem: &Problem, kind: ProblemKind) -> Result<()> {
    if problem.spec.kind != kind {
        return Err(Error::Invalid(format!("expected a {kind:?} problem, got {:?}", problem.spec.kind)));
    }
    Ok(())
}

pub fn check_neumann(problem: &Problem, settings: &Settings) -> Result<SolvabilityReport> {
    expect_kind(problem, ProblemKind::Neumann)?;
    Solver::new(problem.clone(), settings.clone())?.check()
}

pub fn solve_neumann(problem: &Problem, settings: &Settings) -> Result<SolutionField> {
    expect_kind(problem, ProblemKind::Neumann)?;
    Ok(Solver::new(problem.clone(), settings.clone())?.check_and_solve()?.1)
}

pub fn solve_dirichlet(problem: &Problem, settings: &Settings) -> Result<SolutionField> {
    expect_kind(problem, ProblemKind::Dirichlet)?;
    Ok(Solver::new(problem.clone(), settings.clone())?.check_and_solve()?.1)
}

pub fn check_and_solve_nd(problem: &Problem, settings: &Settings) -> Result<(SolvabilityReport, SolutionField)> {
    expect_kind(problem, ProblemKind::NeumannDirichlet)?;
    Solver::new(problem.clone(), settings.clone())?.check_and_solve()
}

pub fn check_and_solve_dn(problem: &Problem, settings: &Settings) -> Result<(SolvabilityReport, SolutionField)> {
    expect_kind(problem, ProblemKind::DirichletNeumann)?;
    Solver::new(problem.clone(), settings.clone())?.check_and_solve()
}
