//! Acceptance gate: one line per criterion, exit status 1 if any fails.
//!
//! Everything runs with n = 1 and resolutions of at most 32.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hpot::hcalc::sublaplacian;
use hpot::hgroup::*;
use hpot::jet::Scalar;
use hpot::kernels::*;
use hpot::quad::adapt::{adapt2_rel, Rect};
use hpot::quad::product::VolumeRule;
use hpot::quad::*;
use hpot::solver::interp::{Cheb2, PolarBox};
use hpot::solver::*;
use hpot::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_point(r: &mut ChaCha8Rng, n: usize, scale: f64) -> Point {
    let mut c = || r.gen_range(-scale..scale);
    let x = (0..n).map(|_| c()).collect();
    let y = (0..n).map(|_| c()).collect();
    Point::new(x, y, c()).unwrap()
}

/// A point of the open ball with gauge below `max`.
fn ball_point(r: &mut ChaCha8Rng, max: f64) -> Point {
    loop {
        let p = random_point(r, 1, 1.0);
        if koranyi_norm(&p) < max {
            return p;
        }
    }
}

fn point_err(a: &Point, b: &Point) -> f64 {
    let ca = a.chart();
    let cb = b.chart();
    ca.iter().zip(&cb).map(|(u, v)| (u - v).abs() / (1.0 + u.abs())).fold(0.0, f64::max)
}

fn algebra() -> Result<Outcome> {
    let mut r = rng(1);
    let mut worst = [0.0f64; 5];
    for case in 0..1000 {
        let n = 1 + case % 2;
        let (p, q, s) = (random_point(&mut r, n, 2.0), random_point(&mut r, n, 2.0), random_point(&mut r, n, 2.0));
        let e = Point::identity(n);
        let assoc = point_err(&multiply(&multiply(&p, &q)?, &s)?, &multiply(&p, &multiply(&q, &s)?)?);
        let unit = point_err(&multiply(&p, &e)?, &p).max(point_err(&multiply(&e, &p)?, &p));
        worst[0] = worst[0].max(assoc.max(unit));
        worst[1] = worst[1].max(point_err(&multiply(&p, &inverse(&p))?, &e).max(point_err(&multiply(&inverse(&p), &p)?, &e)));
        let d: f64 = r.gen_range(0.1..5.0);
        let np = koranyi_norm(&p);
        worst[2] = worst[2].max((koranyi_norm(&dilate(d, &p)?) - d * np).abs() / (d * np));
        let hp = invert(&p)?;
        worst[3] = worst[3].max(point_err(&invert(&hp)?, &p));
        worst[4] = worst[4].max((koranyi_norm(&hp) * np - 1.0).abs());
    }
    let max = worst.iter().cloned().fold(0.0, f64::max);
    outcome(
        max < 1e-12,
        format!(
            "group {:.1e}, inverse {:.1e}, dilation {:.1e}, involution {:.1e}, reciprocity {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn kelvin_identity() -> Result<Outcome> {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let eta = ball_point(&mut r, 0.95);
        let p = random_point(&mut r, 1, 1.5);
        let lhs = kelvin(&|x: &Point| fundamental(&eta, x).unwrap_or(f64::NAN), &p)?;
        let rhs = koranyi_norm(&eta).powi(-2) * fundamental(&invert(&eta)?, &p)?;
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
    }
    outcome(worst < 1e-10, format!("max relative error {worst:.2e} over 500 pairs"))
}

struct Fundamental(Point);
impl ChartFn for Fundamental {
    fn apply<S: Scalar>(&self, c: &[S]) -> Result<S> {
        Ok(fundamental_chart(&self.0, c))
    }
}

struct Green(Point);
impl ChartFn for Green {
    fn apply<S: Scalar>(&self, c: &[S]) -> Result<S> {
        Ok(green_chart(&self.0, c, DEFAULT_NTHETA))
    }
}

fn harmonicity() -> Result<Outcome> {
    let mut r = rng(3);
    let (mut wf, mut wg) = (0.0f64, 0.0f64);
    let mut pairs = 0;
    while pairs < 500 {
        let eta = ball_point(&mut r, 0.9);
        let xi = ball_point(&mut r, 0.99);
        if gauge_distance(&eta, &xi)? <= 0.1 {
            continue;
        }
        pairs += 1;
        wf = wf.max(sublaplacian(&Analytic(Fundamental(eta.clone())), &xi)?.abs());
        wg = wg.max(sublaplacian(&Analytic(Green(eta)), &xi)?.abs());
    }
    outcome(wf < 1e-6 && wg < 1e-6, format!("max |L_0 g| {wf:.1e}, max |L_0 G| {wg:.1e}"))
}

fn green_vanishing() -> Result<Outcome> {
    let mut r = rng(4);
    let mut boundary = Vec::new();
    for i in 0..8 {
        let psi = -PI / 2.0 + (i as f64 + 0.5) * PI / 8.0;
        for j in 0..8 {
            let phi = 2.0 * PI * j as f64 / 8.0;
            let a = psi.cos().sqrt();
            boundary.push(Point::h1(a * phi.cos(), a * phi.sin(), psi.sin()));
        }
    }
    let mut poles = vec![Point::identity(1)];
    poles.extend((0..19).map(|_| ball_point(&mut r, 0.9)));
    let green = KernelId::new(KernelKind::Green);
    let mut worst = 0.0f64;
    for eta in &poles {
        for xi in &boundary {
            worst = worst.max(green.eval(eta, xi)?.abs());
        }
    }
    outcome(worst < 1e-9, format!("sup |G| on 64 boundary points over 20 poles: {worst:.1e}"))
}

fn volume_oracle() -> Result<Outcome> {
    let exact = PI * PI / 2.0;
    let e16 = (VolumeGrid::meridian(1, 16)?.total_weight() - exact).abs() / exact;
    let e32 = (VolumeGrid::meridian(1, 32)?.total_weight() - exact).abs() / exact;
    let ratio = e16 / e32;
    outcome(e32 < 5e-3 && ratio >= 1.8, format!("error {e32:.2e} at 32, ratio 16->32 {ratio:.2}"))
}

fn spec(json: &str) -> Result<Problem> {
    BvpSpec::from_json(json)?.validate()
}

/// Probes with gauge below 0.7.
fn inner_probes(count: usize, seed: u64) -> Vec<Meridian> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| Meridian::polar(r.gen_range(0.2..0.69f64).sqrt(), r.gen_range(-1.4..1.4)))
        .collect()
}

/// Solves and returns the values at the extra probes.
fn probe_values(problem: &Problem, probes: &[Meridian], force: bool) -> Result<Vec<f64>> {
    let settings = Settings { probes: probes.to_vec(), force, ..Default::default() };
    let solver = Solver::new(problem.clone(), settings)?;
    let field = solver.check_and_solve()?.1;
    Ok(field.values[field.values.len() - probes.len()..].to_vec())
}

fn poisson_reproduction() -> Result<Outcome> {
    let probes = inner_probes(30, 6);
    let one = probe_values(&spec(r#"{"kind":"dirichlet","q":1,"f":"0","h":["1"]}"#)?, &probes, false)?;
    let e1 = one.iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
    let t = probe_values(&spec(r#"{"kind":"dirichlet","q":1,"f":"0","h":["t"]}"#)?, &probes, false)?;
    let scale = probes.iter().map(|p| p.t.abs()).fold(0.0, f64::max);
    let et = t.iter().zip(&probes).map(|(u, p)| (u - p.t).abs()).fold(0.0, f64::max) / scale;
    let cals: Vec<f64> = [32, 48, 64].iter().map(|&m| BoundaryGrid::meridian(1, m, 0.05).map(|g| g.calibration)).collect::<Result<_>>()?;
    let (lo, hi) = cals.iter().fold((f64::MAX, f64::MIN), |(a, b), c| (a.min(*c), b.max(*c)));
    let spread = (hi - lo) / lo;
    outcome(
        e1 < 0.01 && et < 0.02 && spread < 5e-3,
        format!("u=1 error {e1:.2e}, u=t error {et:.2e}, calibration spread {spread:.1e} over 32/48/64 nodes"),
    )
}

const ITERATION_PAIRS: [((f64, f64), (f64, f64)); 5] = [
    ((0.5, 0.3), (0.7, -0.6)),
    ((0.3, -0.2), (0.6, 0.9)),
    ((0.8, 0.0), (0.4, 0.5)),
    ((0.6, -1.0), (0.75, 0.2)),
    ((0.45, 0.7), (0.55, -0.4)),
];

fn kernel_iteration() -> Result<Outcome> {
    let kernel = MeridianKernel::Neumann(NeumannCorrection::RingLog);
    let pairs: Vec<(Meridian, Meridian)> =
        ITERATION_PAIRS.iter().map(|&((a, b), (c, d))| (Meridian::polar(a, b), Meridian::polar(c, d))).collect();
    let domain = Rect::new(0.0, 1.0, -PI / 2.0, PI / 2.0);
    let nested: Vec<f64> = pairs
        .iter()
        .map(|&(eta, xi)| {
            let mut f = |rho: f64, psi: f64| {
                let z = Meridian::polar(rho, psi);
                [2.0 * PI * rho.powi(3) * kernel.eval(eta, z) * kernel.eval(z, xi)]
            };
            adapt2_rel(&mut f, domain, 1e-8, 1e-9, 16)[0]
        })
        .collect();

    let grid = VolumeGrid::meridian(1, 16)?;
    let rule = VolumeRule::new(&grid)?;
    let etas: Vec<Meridian> = pairs.iter().map(|p| p.0).collect();
    let xis: Vec<Meridian> = pairs.iter().map(|p| p.1).collect();
    let a = volume_matrix(&rule, "v", kernel, &etas, "eta")?;
    let b = volume_matrix(&rule, "v", kernel, &xis, "xi")?;
    let iterated = weighted_product(&a.values.t().to_owned(), &grid.weights, &b.values)?;
    let quad_err = (0..pairs.len()).map(|i| (iterated[[i, i]] - nested[i]).abs() / nested[i].abs()).fold(0.0, f64::max);

    // L_0 in ξ of N_2(η, ·) on a small Chebyshev patch around ξ.
    let mut defects = Vec::new();
    for m in [16, 24, 32] {
        let grid = VolumeGrid::meridian(1, m)?;
        let rule = VolumeRule::new(&grid)?;
        let mut worst = 0.0f64;
        for &(eta, xi) in &pairs {
            let (r, p) = (xi.radius(), xi.t.atan2(xi.s));
            let patch = PolarBox::around(r, p, 0.12);
            let pts: Vec<Meridian> = Cheb2::points(patch, 6).into_iter().map(|(r, p)| Meridian::new(r * p.cos(), r * p.sin())).collect();
            let to_patch = volume_matrix(&rule, "v", kernel, &pts, "patch")?;
            let to_eta = volume_matrix(&rule, "v", kernel, &[eta], "eta")?;
            let n2 = weighted_product(&to_eta.values.t().to_owned(), &grid.weights, &to_patch.values)?;
            let interp = Cheb2::new(patch, 6, &n2.row(0).to_vec())?;
            let l0 = interp.jet(r, p).sublaplacian(r, p);
            // positive kernels: L_0 N_2 = −N_1
            worst = worst.max((l0 + kernel.eval(eta, xi)).abs() / kernel.eval(eta, xi).abs());
        }
        defects.push(worst);
    }
    let converging = defects.windows(2).all(|w| w[1] < w[0]);
    outcome(
        quad_err < 0.01 && converging,
        format!(
            "iteration vs nested {quad_err:.2e}; L_0 N_2 + N_1 relative defect {:.2e}, {:.2e}, {:.2e} at 16/24/32",
            defects[0], defects[1], defects[2]
        ),
    )
}

const MANUFACTURED_F: &str = "r2*(20*gauge^4 - 12)";

fn solvability_detector() -> Result<Outcome> {
    let s = |json: &str| -> Result<SolvabilityReport> { Solver::new(spec(json)?, Settings::default())?.check() };
    let bad = s(r#"{"kind":"neumann","p":1,"f":"1","g":["0"]}"#)?;
    let good = s(&format!(r#"{{"kind":"neumann","p":1,"f":"{MANUFACTURED_F}","g":["0"]}}"#))?;
    let vol = PI * PI / 2.0;
    let rb = bad.conditions[0].abs_residual;
    let dev = (rb - vol).abs() / vol;
    let rg = good.conditions[0].relative_residual;
    outcome(
        !bad.pass && dev < 0.01 && good.pass && rg < 0.02,
        format!("f=1 residual {rb:.4} (vol {vol:.4}, off {dev:.1e}); manufactured residual {rg:.1e}"),
    )
}

fn manufactured_gradient() -> Result<Outcome> {
    let problem = spec(&format!(r#"{{"kind":"neumann","p":1,"f":"{MANUFACTURED_F}","g":["0"]}}"#))?;
    let field = Solver::new(problem, Settings::default())?.check_and_solve()?.1;
    let interp = field.interpolant()?;
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for p in inner_probes(40, 9) {
        let (r, psi) = polar(p);
        let (us, ut) = interp.jet(r, psi).gradient(r, psi);
        // u₀ = (1 − s² − t²)²
        let k = -4.0 * (1.0 - p.s * p.s - p.t * p.t);
        let (es, et) = (k * p.s, k * p.t);
        let h = 2.0 * p.s.sqrt();
        err = err.max((h * (us - es)).hypot(h * (ut - et)));
        scale = scale.max((h * es).hypot(h * et));
    }
    let rel = err / scale;
    outcome(rel < 0.05, format!("sup |grad_0 u - grad_0 u0| / sup |grad_0 u0| = {rel:.2e}"))
}

fn composition() -> Result<Outcome> {
    let mut worst = Vec::new();
    for kind in ["neumann-dirichlet", "dirichlet-neumann"] {
        let problem = spec(&format!(r#"{{"kind":"{kind}","p":1,"q":1,"f":"{MANUFACTURED_F}","g":["t"],"h":["r2"]}}"#))?;
        let mut fields = Vec::new();
        for path in [EvalPath::Direct, EvalPath::Composition] {
            let solver = Solver::new(problem.clone(), Settings { path, force: true, ..Default::default() })?;
            fields.push(solver.check_and_solve()?.1.values);
        }
        let scale = fields[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
        let diff = fields[0].iter().zip(&fields[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst.push(diff / scale);
    }
    outcome(
        worst.iter().all(|w| *w < 0.01),
        format!("direct vs two-stage: neumann-dirichlet {:.1e}, dirichlet-neumann {:.1e}", worst[0], worst[1]),
    )
}

fn circularity() -> Result<Outcome> {
    let mut r = rng(11);
    let probes: Vec<Point> = (0..10).map(|_| ball_point(&mut r, 0.8)).collect();

    let problem = spec(r#"{"kind":"dirichlet","q":1,"f":"0","h":["t + r2"]}"#)?;
    let field = Solver::new(problem, Settings::default())?.check_and_solve()?.1;
    let interp = field.interpolant()?;
    let solved = |p: &Point| {
        let (r, psi) = polar(Meridian::from_point(p));
        interp.value(r, psi)
    };

    let grid = VolumeGrid::ball(1, 6)?;
    let kernel = KernelId::new(KernelKind::Green);
    let data: Vec<f64> = grid.nodes.iter().map(|a| a.r2() - a.t * a.t).collect();
    let nystrom = |p: &Point| -> f64 {
        grid.nodes.iter().zip(&grid.weights).zip(&data).map(|((a, w), f)| kernel.eval(a, p).unwrap_or(f64::NAN) * w * f).sum()
    };

    let (mut ws, mut wn) = (0.0f64, 0.0f64);
    for p in &probes {
        ws = ws.max((circular_average(&solved, p, DEFAULT_NTHETA)? - solved(p)).abs());
        wn = wn.max((circular_average(&nystrom, p, 16)? - nystrom(p)).abs());
    }
    outcome(ws < 1e-6 && wn < 1e-6, format!("solution field {ws:.1e}, full-grid Green sum {wn:.1e}"))
}

/// Samples within this gauge margin of ∂B sit next to the excised caps and
/// are reported separately.
const CAP_MARGIN: f64 = 0.05;

fn cap_robustness() -> Result<Outcome> {
    let cases = [
        r#""kind":"neumann","p":1,"f":"6*r2","g":["4*sqrt(r2)"]"#,
        r#""kind":"neumann","p":1,"f":"1","g":["0"]"#,
        r#""kind":"dirichlet","q":1,"f":"0","h":["t"]"#,
        r#""kind":"neumann-dirichlet","p":1,"q":1,"f":"1","g":["r2"],"h":["t"]"#,
        r#""kind":"dirichlet-neumann","p":1,"q":1,"f":"1","g":["r2"],"h":["t"]"#,
    ];
    let rel = |a: &[f64], b: &[f64]| {
        let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
    };
    let (mut checks, mut inner, mut edge) = (0.0f64, 0.0f64, 0.0f64);
    for case in cases {
        let mut runs = Vec::new();
        for cap in [0.05, 0.025] {
            let problem = spec(&format!(r#"{{{case},"resolution":{{"delta_cap":{cap}}}}}"#))?;
            let solver = Solver::new(problem, Settings { force: true, ..Default::default() })?;
            runs.push(solver.check_and_solve()?);
        }
        let conds = |r: &SolvabilityReport| -> Vec<f64> { r.conditions.iter().flat_map(|c| [c.lhs, c.rhs, c.abs_residual]).collect() };
        checks = checks.max(rel(&conds(&runs[0].0), &conds(&runs[1].0)));
        let (a, b) = (&runs[0].1, &runs[1].1);
        let keep: Vec<bool> = a.samples.iter().map(|m| m.radius().sqrt() < 1.0 - CAP_MARGIN).collect();
        let pick = |v: &[f64]| -> Vec<f64> { v.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect() };
        inner = inner.max(rel(&pick(&a.values), &pick(&b.values)));
        edge = edge.max(rel(&a.values, &b.values));
    }
    outcome(
        checks < 0.01 && inner < 0.01,
        format!(
            "relative change halving delta_cap: conditions {checks:.1e}, solutions at gauge < {} {inner:.1e} (all samples {edge:.1e})",
            1.0 - CAP_MARGIN
        ),
    )
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 12] = [
        ("algebra suite", algebra),
        ("kelvin identity", kelvin_identity),
        ("off-pole harmonicity", harmonicity),
        ("green boundary vanishing", green_vanishing),
        ("volume oracle", volume_oracle),
        ("poisson reproduction", poisson_reproduction),
        ("kernel iteration", kernel_iteration),
        ("solvability detector", solvability_detector),
        ("manufactured neumann gradient", manufactured_gradient),
        ("mixed-problem composition", composition),
        ("circularity preservation", circularity),
        ("characteristic-cap robustness", cap_robustness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {} ({:.1}s) {detail}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
