use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hpot::hgroup::koranyi_norm;
use hpot::kernels::{KernelId, KernelKind};
use hpot::quad::{ball_volume, BoundaryGrid, GridCache, GridKind, VolumeGrid};
use hpot::solver::{self, BvpSpec, EvalPath, Settings, SolutionField, SolvabilityReport, Solver};
use hpot::sphharm::{SeriesConfig, TableProvider};
use hpot::{Error, Point, Result};
use serde_json::json;

use crate::args::{self, Command, Common, GridWhich, KernelType, Layout};
use crate::output::{chart_names, header, write_csv, write_json};

pub struct Done {
    pub summary: String,
    pub code: u8,
}

fn ok(summary: String) -> Done {
    Done { summary, code: 0 }
}

pub fn run(command: &Command) -> Result<Done> {
    let common = match command {
        Command::Solve(a) => &a.problem.common,
        Command::Check(a) => &a.problem.common,
        Command::Verify(a) => &a.problem.common,
        Command::Kernel(a) => &a.common,
        Command::Calibrate(a) => &a.common,
        Command::Grid(a) => &a.common,
    };
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Invalid(format!("threads: {e}")))?;
    }
    match command {
        Command::Solve(a) => solve(command, a),
        Command::Check(a) => check(command, a),
        Command::Verify(a) => verify(command, a),
        Command::Kernel(a) => kernel(command, a),
        Command::Calibrate(a) => calibrate(command, a),
        Command::Grid(a) => grid(command, a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_spec(a: &args::Problem) -> Result<BvpSpec> {
    let mut spec = BvpSpec::from_json(&read(&a.spec)?)?;
    let c = &a.common;
    if let Some(r) = c.resolution {
        spec.resolution.volume = r;
    }
    if let Some(b) = c.boundary_resolution {
        spec.resolution.boundary = b;
    }
    if let Some(d) = c.delta_cap {
        spec.resolution.delta_cap = d;
    }
    Ok(spec)
}

fn build_solver(a: &args::Problem, spec: &BvpSpec, force: bool) -> Result<Solver> {
    let problem = spec.validate()?;
    let settings = Settings {
        tau: a.tau,
        path: if a.composition { EvalPath::Composition } else { EvalPath::Direct },
        strict: a.strict,
        force,
        probes: Vec::new(),
    };
    match &a.common.grid_cache {
        None => Solver::new(problem, settings),
        Some(dir) => {
            let cache = GridCache::open(dir)?;
            let r = &spec.resolution;
            let volume = cache.volume(1, GridKind::Meridian, r.volume)?;
            let boundary = cache.boundary(1, GridKind::Meridian, r.boundary_nodes(), r.delta_cap)?;
            Solver::with_grids(problem, volume, boundary, settings)
        }
    }
}

fn kind_name(spec: &BvpSpec) -> String {
    serde_json::to_value(spec.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn verdict(rep: &SolvabilityReport) -> String {
    let abs = rep.conditions.iter().map(|c| c.abs_residual).fold(0.0, f64::max);
    format!(
        "{} condition(s), max residual {:.4e} (relative {:.4e}), {}",
        rep.conditions.len(),
        abs,
        rep.max_relative(),
        if rep.pass { "solvable" } else { "UNSOLVABLE" }
    )
}

fn check(command: &Command, a: &args::CheckArgs) -> Result<Done> {
    let spec = load_spec(&a.problem)?;
    let s = build_solver(&a.problem, &spec, false)?;
    let rep = s.check()?;
    if let Some(path) = &a.report {
        let mut r = header(command, a.problem.common.seed);
        r.insert("spec".into(), json!(spec));
        r.insert("calibration".into(), json!(rep.calibration));
        r.insert("solvability".into(), json!(rep));
        write_json(path, r)?;
    }
    Ok(Done { summary: format!("check {}: {}", kind_name(&spec), verdict(&rep)), code: if rep.pass { 0 } else { 2 } })
}

fn field_rows(field: &SolutionField) -> impl Iterator<Item = (f64, f64, f64, f64, f64)> + '_ {
    field.samples.iter().zip(&field.values).map(|(m, u)| {
        let (r, psi) = solver::polar(*m);
        (r.sqrt(), psi, m.s, m.t, *u)
    })
}

fn solve(command: &Command, a: &args::SolveArgs) -> Result<Done> {
    let spec = load_spec(&a.problem)?;
    let s = build_solver(&a.problem, &spec, a.force)?;
    let rep = s.check()?;
    let mut r = header(command, a.problem.common.seed);
    r.insert("spec".into(), json!(spec));
    r.insert("calibration".into(), json!(rep.calibration));
    r.insert("solvability".into(), json!(rep));
    if !rep.pass && !a.force {
        r.insert("solution".into(), json!(null));
        if let Some(path) = &a.report {
            write_json(path, r)?;
        }
        eprintln!("hpot: solvability conditions fail; rerun with --force to evaluate anyway");
        return Ok(Done { summary: format!("solve {}: {}", kind_name(&spec), verdict(&rep)), code: 2 });
    }
    let field = s.solve(&rep)?;
    if let Some(path) = &a.out {
        let head: Vec<String> = ["rho", "psi", "s", "t", "u"].iter().map(|h| h.to_string()).collect();
        write_csv(path, &head, field_rows(&field).map(|(rho, psi, s, t, u)| vec![rho, psi, s, t, u]))?;
    }
    if let Some(path) = &a.emit_plot_data {
        let head: Vec<String> = ["rho", "psi", "u"].iter().map(|h| h.to_string()).collect();
        write_csv(path, &head, field_rows(&field).map(|(rho, psi, _, _, u)| vec![rho, psi, u]))?;
    }
    let (lo, hi) = field.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    r.insert("solution".into(), json!({ "meta": field.meta, "samples": field.values.len(), "min": lo, "max": hi }));
    if let Some(path) = &a.report {
        write_json(path, r)?;
    }
    Ok(ok(format!(
        "solve {}: {} samples, u in [{lo:.6}, {hi:.6}]; {}{}",
        kind_name(&spec),
        field.values.len(),
        verdict(&rep),
        if field.meta.forced { " (forced)" } else { "" }
    )))
}

fn verify(command: &Command, a: &args::VerifyArgs) -> Result<Done> {
    let spec = load_spec(&a.problem)?;
    let s = build_solver(&a.problem, &spec, a.force)?;
    let (rep, field) = s.check_and_solve()?;
    let v = solver::verify(&field, &s.problem, a.probes, a.problem.common.seed)?;
    let worst = v.boundary.iter().map(|b| b.stats.relative).fold(0.0, f64::max);
    if let Some(path) = &a.report {
        let mut r = header(command, a.problem.common.seed);
        r.insert("spec".into(), json!(spec));
        r.insert("calibration".into(), json!(rep.calibration));
        r.insert("solvability".into(), json!(rep));
        r.insert("verify".into(), json!(v));
        write_json(path, r)?;
    }
    Ok(ok(format!(
        "verify {}: interior relative residual {:.3e} over {} probes, worst boundary relative residual {:.3e}",
        kind_name(&spec),
        v.interior.relative,
        v.interior.probes,
        worst
    )))
}

fn parse_eta(src: &str) -> Result<Point> {
    let c = src
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Invalid(format!("--eta `{x}`: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    Point::from_chart(&c)
}

fn series(a: &args::KernelArgs) -> Result<SeriesConfig> {
    let Some(src) = &a.series_coeffs else {
        return Ok(SeriesConfig { k_max: a.series_kmax, m_max: a.series_mmax, b0: a.series_b0, ..Default::default() });
    };
    let text = if src.trim_start().starts_with('[') { src.clone() } else { read(Path::new(src))? };
    let table = TableProvider::from_json(&text)?;
    Ok(SeriesConfig::with_provider(a.series_kmax, a.series_mmax, Arc::new(table), a.series_b0))
}

fn resolution(c: &Common, default: usize) -> Result<usize> {
    let r = c.resolution.unwrap_or(default);
    if r < 4 {
        return Err(Error::Invalid(format!("resolution {r} < 4")));
    }
    Ok(r)
}

/// Rows at gauge ρ = i/m (i = 1..m, so the last row lies on ∂B) and ψ at
/// midpoints of (−π/2, π/2). Poisson kernels only get the boundary row.
fn kernel(command: &Command, a: &args::KernelArgs) -> Result<Done> {
    let eta = parse_eta(&a.eta)?;
    let n = eta.dim();
    let m = resolution(&a.common, 16)?;
    let kind = match a.kind {
        KernelType::Fundamental => KernelKind::Fundamental,
        KernelType::Green => KernelKind::Green,
        KernelType::Poisson => KernelKind::Poisson,
        KernelType::Neumann => KernelKind::Neumann,
    };
    let id = KernelId {
        kind,
        circularize: !a.raw,
        ntheta: a.ntheta,
        series: (kind == KernelKind::Neumann).then(|| series(a)).transpose()?,
    };
    let first = if kind == KernelKind::Poisson { m } else { 1 };
    let mut rows = Vec::new();
    let (mut skipped, mut boundary_max) = (0usize, 0.0f64);
    for i in first..=m {
        let rho = i as f64 / m as f64;
        for j in 0..m {
            let psi = -PI / 2.0 + (j as f64 + 0.5) * PI / m as f64;
            let r = rho * rho;
            let xi = Point::meridian(n, r * psi.cos(), r * psi.sin());
            let value = match id.eval(&eta, &xi) {
                Ok(v) => v,
                Err(Error::KernelPole | Error::Characteristic(_) | Error::Singular(_)) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if i == m {
                boundary_max = boundary_max.max(value.abs());
            }
            let mut row = vec![rho, psi];
            row.extend(xi.chart());
            row.push(value);
            rows.push(row);
        }
    }
    let mut head = vec!["rho".to_string(), "psi".to_string()];
    head.extend(chart_names(n));
    head.push("value".into());
    write_csv(&a.out, &head, rows.iter().cloned())?;
    if let Some(path) = &a.report {
        let mut r = header(command, a.common.seed);
        r.insert("rows".into(), json!(rows.len()));
        r.insert("skipped".into(), json!(skipped));
        r.insert("max_abs_on_boundary".into(), json!(boundary_max));
        write_json(path, r)?;
    }
    Ok(ok(format!(
        "kernel {:?}: {} rows ({} skipped at singular points), max |value| on gauge 1 = {:.3e}",
        kind,
        rows.len(),
        skipped,
        boundary_max
    )))
}

fn boundary_params(c: &Common) -> Result<(usize, f64)> {
    let res = match c.boundary_resolution {
        Some(b) => b,
        None => 2 * resolution(c, 16)?,
    };
    Ok((res, c.delta_cap.unwrap_or(0.05)))
}

fn calibrate(command: &Command, a: &args::CalibrateArgs) -> Result<Done> {
    let dir = a.common.grid_cache.clone().unwrap_or_else(|| PathBuf::from("hpot-cache"));
    let cache = GridCache::open(&dir)?;
    let (res, cap) = boundary_params(&a.common)?;
    let g = cache.boundary(a.n, GridKind::Meridian, res, cap)?;
    if let Some(path) = &a.report {
        let mut r = header(command, a.common.seed);
        r.insert("calibration".into(), json!(g.calibration));
        r.insert("grid".into(), json!(g.id()));
        write_json(path, r)?;
    }
    Ok(ok(format!(
        "calibration n={} boundary={res} delta_cap={cap}: {:.12} stored in {}",
        a.n,
        g.calibration,
        dir.display()
    )))
}

fn grid(command: &Command, a: &args::GridArgs) -> Result<Done> {
    let kind = match a.layout {
        Layout::Meridian => GridKind::Meridian,
        Layout::Full => GridKind::Full,
    };
    let cache = a.common.grid_cache.as_ref().map(GridCache::open).transpose()?;
    let (nodes, weights, id, summary, extra) = match a.which {
        GridWhich::Volume => {
            let res = resolution(&a.common, 16)?;
            let g = match (&cache, kind) {
                (Some(c), _) => c.volume(a.n, kind, res)?,
                (None, GridKind::Full) => VolumeGrid::ball(a.n, res)?,
                (None, GridKind::Meridian) => VolumeGrid::meridian(a.n, res)?,
            };
            let total = g.total_weight();
            let exact = ball_volume(a.n);
            let summary = format!(
                "volume grid {}: {} nodes, total weight {total:.10} vs |B| {exact:.10} (relative error {:.3e})",
                g.id(),
                g.len(),
                (total - exact).abs() / exact
            );
            let extra = json!({ "total_weight": total, "ball_volume": exact });
            (g.nodes.clone(), g.weights.clone(), g.id(), summary, extra)
        }
        GridWhich::Boundary => {
            let (res, cap) = boundary_params(&a.common)?;
            let g = match (&cache, kind) {
                (Some(c), _) => c.boundary(a.n, kind, res, cap)?,
                (None, GridKind::Full) => BoundaryGrid::sphere(a.n, res, cap)?,
                (None, GridKind::Meridian) => BoundaryGrid::meridian(a.n, res, cap)?,
            };
            let total: f64 = g.weights.iter().sum();
            let summary = format!(
                "boundary grid {}: {} nodes, total weight {total:.10}, calibration {:.10}",
                g.id(),
                g.len(),
                g.calibration
            );
            let extra = json!({ "total_weight": total, "calibration": g.calibration });
            (g.nodes.clone(), g.weights.clone(), g.id(), summary, extra)
        }
    };
    if let Some(path) = &a.out {
        let mut head = chart_names(a.n);
        head.extend(["rho", "psi", "weight"].iter().map(|h| h.to_string()));
        let rows = nodes.iter().zip(&weights).map(|(p, w)| {
            let mut row = p.chart();
            row.push(koranyi_norm(p));
            row.push(p.t.atan2(p.r2()));
            row.push(*w);
            row
        });
        write_csv(path, &head, rows)?;
    }
    if let Some(path) = &a.report {
        let mut r = header(command, a.common.seed);
        r.insert("grid".into(), json!(id));
        r.insert("nodes".into(), json!(nodes.len()));
        r.insert("totals".into(), extra);
        write_json(path, r)?;
    }
    Ok(ok(summary))
}
