//! Special functions and fixed quadrature rules.

use std::f64::consts::PI;

/// Complete elliptic integral of the first kind K(m) (parameter m = k²)
/// with its first two derivatives in m, for 0 ≤ m < 1.
pub fn ellip_k(m: f64) -> (f64, f64, f64) {
    if m <= 0.05 {
        // K = π/2 Σ a_k m^k with a_k = ((2k-1)!!/(2k)!!)².
        let mut a = 1.0;
        let mut s = [0.0f64; 3];
        let mut mk = 1.0; // m^k
        let mut mk1 = 0.0; // m^(k-1)
        let mut mk2 = 0.0; // m^(k-2)
        for k in 0..200 {
            let kf = k as f64;
            s[0] += a * mk;
            s[1] += kf * a * mk1;
            s[2] += kf * (kf - 1.0) * a * mk2;
            let r = (2.0 * kf + 1.0) / (2.0 * kf + 2.0);
            a *= r * r;
            mk2 = mk1;
            mk1 = mk;
            mk *= m;
            if k > 4 && a * kf * kf * mk2 < 1e-18 {
                break;
            }
        }
        (PI / 2.0 * s[0], PI / 2.0 * s[1], PI / 2.0 * s[2])
    } else {
        let m = m.min(M_MAX);
        let (k, e) = ellip_ke_agm(m);
        let q = 1.0 - m;
        let k1 = (e - q * k) / (2.0 * m * q);
        let k2 = (k / 4.0 - (1.0 - 2.0 * m) * k1) / (m * q);
        (k, k1, k2)
    }
}

/// Largest parameter used; rounding can push m past 1 when two ring
/// points nearly coincide, where K only grows logarithmically.
const M_MAX: f64 = 1.0 - 1e-16;

/// K(m) alone by the arithmetic-geometric mean.
pub fn ellip_k_value(m: f64) -> f64 {
    let mut a = 1.0;
    let mut b = (1.0 - m.min(M_MAX)).sqrt();
    for _ in 0..64 {
        if (a - b).abs() < 1e-15 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (a + b)
}

/// K(m) and E(m) by the arithmetic-geometric mean.
pub fn ellip_ke_agm(m: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow2 = 0.5;
    for _ in 0..64 {
        if c.abs() < 1e-15 * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

/// Ring-average factor F_n(m) = 2F1(n/2, n/2; 1; m) with first and second
/// derivatives, which equals the circle mean of |A − B e^{iφ}|^{-n} times
/// |A|^n when m = |B|²/|A|². Closed forms exist for n = 1 and even n.
pub fn ring_factor(n: usize, m: f64) -> Option<(f64, f64, f64)> {
    ring_factor_to(n, m, 2)
}

/// As [`ring_factor`], computing derivatives only up to `order`; the
/// skipped slots are zero.
pub fn ring_factor_to(n: usize, m: f64, order: u8) -> Option<(f64, f64, f64)> {
    if n == 1 && order == 0 {
        return Some((2.0 / PI * ellip_k_value(m), 0.0, 0.0));
    }
    if n == 1 {
        let (k, k1, k2) = ellip_k(m);
        let c = 2.0 / PI;
        return Some((c * k, c * k1, c * k2));
    }
    if n % 2 == 1 {
        return None;
    }
    // Euler transformation turns 2F1(h, h; 1; m) into (1-m)^{1-2h} times
    // the terminating series Σ C(h-1, j)² m^j.
    let h = n / 2;
    let mut q = [0.0f64; 3];
    let mut binom = 1.0f64;
    for j in 0..h {
        if j > 0 {
            binom = binom * ((h - j) as f64) / (j as f64);
        }
        let c = binom * binom;
        let jf = j as f64;
        q[0] += c * m.powi(j as i32);
        if j >= 1 {
            q[1] += c * jf * m.powi(j as i32 - 1);
        }
        if j >= 2 {
            q[2] += c * jf * (jf - 1.0) * m.powi(j as i32 - 2);
        }
    }
    let e = 1.0 - 2.0 * h as f64;
    let u = 1.0 - m;
    let p0 = u.powf(e);
    let p1 = -e * u.powf(e - 1.0);
    let p2 = e * (e - 1.0) * u.powf(e - 2.0);
    Some((
        p0 * q[0],
        p1 * q[0] + p0 * q[1],
        p2 * q[0] + 2.0 * p1 * q[1] + p0 * q[2],
    ))
}

/// Γ(n/2) for a positive integer n.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n >= 1);
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 1e-12 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Area of the unit sphere S^{2n-1} ⊂ ℂⁿ.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powi(n as i32) / (1..n).map(|k| k as f64).product::<f64>()
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..order {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = order as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[order - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_on(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    x.iter().zip(&w).map(|(xi, wi)| (c + h * xi, h * wi)).collect()
}
