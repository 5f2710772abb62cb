//! Worked examples with independently derived values.

use std::f64::consts::PI;

use hpot::exprdsl::{eval, is_circular, jet_eval, parse};
use hpot::hcalc::{apply_field, horizontal_gradient, is_characteristic, sublaplacian, FieldId, FieldKind, GaugeLevel, EPS_CHAR};
use hpot::hgroup::{circular_average, dilate, invert, inverse, kelvin, koranyi_norm, multiply, Analytic};
use hpot::kernels::{a0, fundamental, green, neumann, poisson, KernelId, KernelKind};
use hpot::quad::{integrate_boundary, integrate_volume, iterate, nystrom, BoundaryGrid, VolumeGrid};
use hpot::sphharm::{cq_coefficients, h_series, jacobi_direct, jacobi_like, spherical_harmonic, HarmonicSpec, SeriesConfig};
use hpot::{Error, Point};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Point {
    let x = (0..n).map(|_| rng.gen_range(-scale..scale)).collect();
    let y = (0..n).map(|_| rng.gen_range(-scale..scale)).collect();
    Point::new(x, y, rng.gen_range(-scale..scale)).unwrap()
}

/// Interior point of the unit ball with gauge in [lo, hi].
fn ball_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Point {
    loop {
        let p = random_point(rng, 1, 1.0);
        let g = koranyi_norm(&p);
        if g > lo && g < hi {
            return p;
        }
    }
}

fn field(src: &str) -> hpot::exprdsl::Expr {
    parse(src, 1).unwrap()
}

// group law

#[test]
fn vertical_points_add() {
    let p = multiply(&Point::h1(0.0, 0.0, 1.5), &Point::h1(0.0, 0.0, -0.25)).unwrap();
    assert_eq!(p, Point::h1(0.0, 0.0, 1.25));
}

#[test]
fn twist_term_of_i_times_one() {
    // [i, 0]·[1, 0] = [1 + i, 2 Im(i · 1)]
    let p = multiply(&Point::h1(0.0, 1.0, 0.0), &Point::h1(1.0, 0.0, 0.0)).unwrap();
    assert_eq!(p, Point::h1(1.0, 1.0, 2.0));
}

#[test]
fn identity_inverse_and_norm_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let p = random_point(&mut rng, 2, 3.0);
        assert_eq!(multiply(&p, &Point::identity(2)).unwrap(), p);
        let e = multiply(&p, &inverse(&p)).unwrap();
        assert!(e.chart().iter().all(|c| c.abs() < 1e-14));
    }
    assert_eq!(inverse(&Point::h1(1.0, 1.0, 3.0)), Point::h1(-1.0, -1.0, -3.0));
    assert_eq!(koranyi_norm(&Point::identity(1)), 0.0);
    assert_eq!(koranyi_norm(&Point::h1(1.0, 0.0, 0.0)), 1.0);
    assert!(close(koranyi_norm(&Point::h1(0.0, 0.0, 4.0)), 2.0, 1e-15));
}

#[test]
fn dilation_and_inversion_values() {
    let p = Point::h1(1.0, 0.0, 1.0);
    assert_eq!(dilate(1.0, &p).unwrap(), p);
    assert_eq!(dilate(2.0, &p).unwrap(), Point::h1(2.0, 0.0, 4.0));
    let q = invert(&Point::h1(0.0, 0.0, 1.0)).unwrap();
    assert!(close(q.t, -1.0, 1e-15) && q.r2() == 0.0);
    assert!(matches!(invert(&Point::identity(1)), Err(Error::PoleAtIdentity)));
}

#[test]
fn kelvin_and_circular_average_values() {
    let one = |_: &Point| 1.0;
    assert!(close(kelvin(&one, &Point::h1(1.0, 0.0, 0.0)).unwrap(), 1.0, 1e-15));
    // N([0, 4]) = 2, so N^{-2n} = 1/4 for n = 1
    assert!(close(kelvin(&one, &Point::h1(0.0, 0.0, 4.0)).unwrap(), 0.25, 1e-15));
    let p = Point::h1(1.0, 0.0, 0.3);
    let re_z = |q: &Point| q.x[0];
    assert!(circular_average(&re_z, &p, 32).unwrap().abs() < 1e-15);
    let t = |q: &Point| q.t;
    assert!(close(circular_average(&t, &p, 32).unwrap(), 0.3, 1e-15));
    let p = Point::h1(0.6, -0.8, 0.1);
    let r2 = |q: &Point| q.r2();
    assert!(close(circular_average(&r2, &p, 32).unwrap(), 1.0, 1e-14));
}

// calculus

#[test]
fn fields_applied_to_t() {
    let p = Point::h1(1.0, 2.0, 3.0);
    let t = field("t");
    let x = apply_field(FieldId::new(FieldKind::X, 1, 1).unwrap(), &t, &p).unwrap();
    let y = apply_field(FieldId::new(FieldKind::Y, 1, 1).unwrap(), &t, &p).unwrap();
    assert!(close(x.0, 4.0, 1e-14) && close(y.0, -2.0, 1e-14));
    let tr = apply_field(FieldId::new(FieldKind::T, 0, 1).unwrap(), &field("r2"), &p).unwrap();
    assert_eq!(tr.0, 0.0);
    let g = horizontal_gradient(&t, &p).unwrap();
    assert!(close(g.coefficients[0], 4.0, 1e-14) && close(g.coefficients[1], -2.0, 1e-14));
}

#[test]
fn sublaplacian_of_r2_and_t() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=3 {
        let r2 = parse("r2", n).unwrap();
        let t = parse("t", n).unwrap();
        for _ in 0..10 {
            let p = random_point(&mut rng, n, 2.0);
            assert!(close(sublaplacian(&r2, &p).unwrap(), n as f64, 1e-12));
            assert!(sublaplacian(&t, &p).unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn gauge_gradient_identity() {
    // ρ = |z|⁴ + t²: X ρ = 4(x|z|² + y t), Y ρ = 4(y|z|² − x t), ‖∇_0ρ‖² = 16|z|²ρ
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = Analytic(GaugeLevel);
    for _ in 0..50 {
        let p = random_point(&mut rng, 1, 1.5);
        let (x, y, t, r2) = (p.x[0], p.y[0], p.t, p.r2());
        let g = horizontal_gradient(&f, &p).unwrap();
        assert!(close(g.coefficients[0], 4.0 * (x * r2 + y * t), 1e-12));
        assert!(close(g.coefficients[1], 4.0 * (y * r2 - x * t), 1e-12));
        let rho = r2 * r2 + t * t;
        let want = 16.0 * r2 * rho;
        assert!((g.norm().powi(2) - want).abs() <= 1e-10 * want.max(1.0));
    }
}

#[test]
fn characteristic_points_of_the_sphere() {
    let f = Analytic(GaugeLevel);
    assert!(is_characteristic(&Point::h1(0.0, 0.0, 1.0), &f, EPS_CHAR).unwrap());
    assert!(is_characteristic(&Point::h1(0.0, 0.0, -1.0), &f, EPS_CHAR).unwrap());
    let e1 = Point::h1(1.0, 0.0, 0.0);
    assert!(!is_characteristic(&e1, &f, EPS_CHAR).unwrap());
    assert!(close(horizontal_gradient(&f, &e1).unwrap().norm(), 4.0, 1e-14));
}

// harmonics and polynomials

#[test]
fn harmonic_coefficients() {
    assert_eq!(cq_coefficients(0, 3, 2).unwrap(), vec![1.0]);
    assert_eq!(cq_coefficients(1, 1, 2).unwrap(), vec![1.0, -1.0]);
    assert_eq!(cq_coefficients(1, 1, 3).unwrap(), vec![1.0, -0.5]);
    let z = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
    let y11 = spherical_harmonic(&HarmonicSpec::new(1, 1, 2).unwrap(), &z).unwrap();
    assert!(y11.norm() < 1e-15);
    let z = [Complex64::new(0.3, -0.7), Complex64::new(0.2, 0.1)];
    let y10 = spherical_harmonic(&HarmonicSpec::new(1, 0, 2).unwrap(), &z).unwrap();
    assert!((y10 - z[0]).norm() < 1e-15);
}

#[test]
fn jacobi_values() {
    let w = Complex64::new(0.3, -0.4);
    assert_eq!(jacobi_like(0, 0.5, 0.5, w), Complex64::new(1.0, 0.0));
    for a in [0.0, 0.5, 2.0] {
        assert!((jacobi_like(1, a, a, w) - (a + 1.0) * w).norm() < 1e-15);
    }
    for (a, b) in [(0.5, 1.5), (1.0, 0.0), (2.5, 3.0)] {
        let r = jacobi_like(5, a, b, w);
        let d = jacobi_direct(5, a, b, w);
        assert!((r - d).norm() < 1e-12 * d.norm().max(1.0));
    }
}

#[test]
fn series_with_zero_provider_is_b0() {
    let eta = Point::new(vec![0.2, 0.1], vec![0.0, -0.3], 0.1).unwrap();
    let xi = Point::new(vec![-0.1, 0.4], vec![0.2, 0.0], -0.2).unwrap();
    let cfg = SeriesConfig { k_max: 3, m_max: 6, ..Default::default() };
    assert_eq!(h_series(&eta, &xi, &cfg).unwrap(), 0.0);
    let cfg = SeriesConfig { b0: 0.7, ..cfg };
    assert!(close(h_series(&eta, &xi, &cfg).unwrap(), 0.7, 1e-15));
}

// kernels

#[test]
fn normalizing_constants() {
    assert!(close(a0(1), 1.0 / (2.0 * PI), 1e-16));
    assert!(close(a0(2), 1.0 / PI.powi(3), 1e-16));
    assert!((1..=10).all(|n| a0(n) > 0.0));
}

#[test]
fn fundamental_values() {
    let e = Point::identity(1);
    assert!(close(fundamental(&e, &Point::h1(1.0, 0.0, 0.0)).unwrap(), 1.0 / (2.0 * PI), 1e-15));
    let v = fundamental(&e, &Point::h1(1.0, 0.0, 1.0)).unwrap();
    assert!(close(v, 1.0 / (2.0 * PI * 2f64.sqrt()), 1e-15));
    let xi = Point::h1(0.3, -0.2, 0.5);
    let r = 1.7;
    let scaled = fundamental(&e, &dilate(r, &xi).unwrap()).unwrap();
    assert!(close(scaled, r.powi(-2) * fundamental(&e, &xi).unwrap(), 1e-14));
    assert!(matches!(fundamental(&xi, &xi), Err(Error::KernelPole)));
}

#[test]
fn green_is_positive_inside() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let eta = ball_point(&mut rng, 0.05, 0.95);
        let xi = ball_point(&mut rng, 0.05, 0.95);
        assert!(green(&eta, &xi).unwrap() > 0.0);
    }
}

#[test]
fn poisson_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..200 {
        let eta = ball_point(&mut rng, 0.0, 0.95);
        let psi = rng.gen_range(-1.5..1.5f64);
        let phi = rng.gen_range(0.0..2.0 * PI);
        let r = psi.cos().sqrt();
        let xi = Point::h1(r * phi.cos(), r * phi.sin(), psi.sin());
        assert!(poisson(&eta, &xi).unwrap() >= 0.0);
    }
}

#[test]
fn neumann_at_the_centre() {
    // Kelvin term of g_e is the constant a_0, so N(e, ξ) = a_0 N(ξ)^{-2} + a_0 + b_0
    let cfg = SeriesConfig { b0: 0.25, ..Default::default() };
    let e = Point::identity(1);
    for xi in [Point::h1(0.3, 0.1, 0.2), Point::h1(-0.5, 0.4, -0.1), Point::h1(0.0, 0.0, 0.6)] {
        let want = a0(1) / koranyi_norm(&xi).powi(2) + a0(1) + 0.25;
        assert!(close(neumann(&e, &xi, &cfg).unwrap(), want, 1e-12));
    }
}

#[test]
fn neumann_is_circular_in_xi() {
    let cfg = SeriesConfig::default();
    let eta = Point::h1(0.4, -0.1, 0.2);
    let xi = Point::h1(-0.3, 0.5, -0.35);
    let base = neumann(&eta, &xi, &cfg).unwrap();
    for k in 1..8 {
        let v = neumann(&eta, &xi.rotate(0.7 * k as f64), &cfg).unwrap();
        assert!(close(v, base, 1e-10));
    }
}

// quadrature

#[test]
fn ball_volume_and_second_moment() {
    let g = VolumeGrid::ball(1, 32).unwrap();
    let vol = PI * PI / 2.0;
    assert!((g.total_weight() - vol).abs() < 5e-3 * vol);
    assert!(g.nodes.iter().all(|p| koranyi_norm(p) < 1.0));
    // ∫ N² dv = ∫ 2π ρ⁵ dρ dψ = π²/3
    let n2 = |p: &Point| koranyi_norm(p).powi(2);
    let m = integrate_volume(&n2, &g).unwrap();
    assert!((m - PI * PI / 3.0).abs() < 5e-3 * PI * PI / 3.0);
    let zero = |_: &Point| 0.0;
    assert_eq!(integrate_volume(&zero, &g).unwrap(), 0.0);
}

#[test]
fn integrable_singularity_converges() {
    // ∫ g_e dv = a_0 ∫ 2π ρ dρ dψ = a_0 π² = π/2
    let e = Point::identity(1);
    let ge = |p: &Point| fundamental(&e, p).unwrap();
    let a = integrate_volume(&ge, &VolumeGrid::ball(1, 16).unwrap()).unwrap();
    let b = integrate_volume(&ge, &VolumeGrid::ball(1, 32).unwrap()).unwrap();
    assert!((a - b).abs() < 0.01 * b);
    assert!((b - PI / 2.0).abs() < 0.01);
}

#[test]
fn boundary_grid_properties() {
    let g = BoundaryGrid::sphere(1, 32, 0.05).unwrap();
    let f = Analytic(GaugeLevel);
    for p in &g.nodes {
        assert!(close(koranyi_norm(p), 1.0, 1e-12));
        assert!(!is_characteristic(p, &f, EPS_CHAR).unwrap());
    }
    let e = Point::identity(1);
    let pe = |p: &Point| poisson(&e, p).unwrap();
    let mass = integrate_boundary(&pe, &g).unwrap();
    assert!((mass - 1.0).abs() < 0.01, "{mass}");
}

#[test]
fn nystrom_shapes_and_iteration() {
    let src = VolumeGrid::ball(1, 4).unwrap();
    let id = KernelId { circularize: false, ..KernelId::new(KernelKind::Green) };
    let m = nystrom(&id, &src, &src.nodes, &src.id()).unwrap();
    assert_eq!((m.rows(), m.cols()), (src.len(), src.len()));
    // off-diagonal entries are plain kernel values
    let v = id.eval(&src.nodes[3], &src.nodes[10]).unwrap();
    assert_eq!(m.values[[3, 10]], v);
    assert_eq!(iterate(&m, &src.weights, 1).unwrap(), m);
}

// expressions

#[test]
fn expression_examples() {
    assert!(matches!(parse("x1*", 1), Err(Error::Syntax { offset: 3, .. })));
    assert!(close(eval(&field("r2"), &Point::h1(1.0, 2.0, 0.0)).unwrap(), 5.0, 1e-15));
    assert!(close(eval(&field("gauge"), &Point::h1(0.0, 0.0, 4.0)).unwrap(), 2.0, 1e-15));
    let j = jet_eval(&field("t^2"), &Point::h1(0.3, 0.2, 0.7)).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            assert_eq!(j.d2(a, b), if a == 2 && b == 2 { 2.0 } else { 0.0 });
        }
    }
    assert!(is_circular(&field("t + r2^2"), 1e-10, 1));
    assert!(!is_circular(&field("x1"), 1e-10, 1));
    assert!(is_circular(&field("sin(gauge)"), 1e-10, 1));
}
