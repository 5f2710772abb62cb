//! Adaptive rules: tensor Gauss on rectangles and Gauss–Kronrod on
//! intervals, both for small fixed-size vectors of integrands.

const G4_X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const G4_W: [f64; 4] = [0.347_854_845_137_453_8, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_8];

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn add<const M: usize>(a: &mut [f64; M], b: &[f64; M], s: f64) {
    for k in 0..M {
        a[k] += s * b[k];
    }
}

fn max_diff<const M: usize>(a: &[f64; M], b: &[f64; M]) -> f64 {
    (0..M).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    fn split(&self) -> [Rect; 4] {
        let xm = 0.5 * (self.x0 + self.x1);
        let ym = 0.5 * (self.y0 + self.y1);
        [
            Rect::new(self.x0, xm, self.y0, ym),
            Rect::new(xm, self.x1, self.y0, ym),
            Rect::new(self.x0, xm, ym, self.y1),
            Rect::new(xm, self.x1, ym, self.y1),
        ]
    }
}

/// 4×4 Gauss tensor rule.
pub fn gauss4<const M: usize>(f: &mut impl FnMut(f64, f64) -> [f64; M], r: Rect) -> [f64; M] {
    let hx = 0.5 * (r.x1 - r.x0);
    let hy = 0.5 * (r.y1 - r.y0);
    let cx = 0.5 * (r.x0 + r.x1);
    let cy = 0.5 * (r.y0 + r.y1);
    let mut acc = [0.0; M];
    for i in 0..4 {
        for j in 0..4 {
            let v = f(cx + hx * G4_X[i], cy + hy * G4_X[j]);
            add(&mut acc, &v, G4_W[i] * G4_W[j] * hx * hy);
        }
    }
    acc
}

/// Adaptive quadrature over a rectangle: a cell is accepted when its 4×4
/// Gauss value agrees with the sum over its four children to `tol`.
pub fn adapt2<const M: usize>(f: &mut impl FnMut(f64, f64) -> [f64; M], r: Rect, tol: f64, max_depth: u32) -> [f64; M] {
    let est = gauss4(f, r);
    refine2(f, r, est, tol, max_depth)
}

fn refine2<const M: usize>(
    f: &mut impl FnMut(f64, f64) -> [f64; M],
    r: Rect,
    est: [f64; M],
    tol: f64,
    depth: u32,
) -> [f64; M] {
    let kids = r.split();
    let parts: Vec<[f64; M]> = kids.iter().map(|k| gauss4(f, *k)).collect();
    let mut sum = [0.0; M];
    for p in &parts {
        add(&mut sum, p, 1.0);
    }
    if depth == 0 || max_diff(&sum, &est) <= tol {
        return sum;
    }
    let mut out = [0.0; M];
    for (k, p) in kids.iter().zip(parts) {
        let v = refine2(f, *k, p, 0.5 * tol, depth - 1);
        add(&mut out, &v, 1.0);
    }
    out
}

/// [`adapt2`] with the tolerance taken relative to the first estimate.
/// The tolerance never drops below `floor`.
pub fn adapt2_rel<const M: usize>(f: &mut impl FnMut(f64, f64) -> [f64; M], r: Rect, rel: f64, floor: f64, max_depth: u32) -> [f64; M] {
    let est = gauss4(f, r);
    let scale = est.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    refine2(f, r, est, (rel * scale).max(floor) + 1e-300, max_depth)
}

/// Gauss–Kronrod 7/15 on [a, b]: (Kronrod value, |Kronrod − Gauss|).
pub fn gk15<const M: usize>(f: &mut impl FnMut(f64) -> [f64; M], a: f64, b: f64) -> ([f64; M], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; M];
    let mut g = [0.0; M];
    for i in 0..8 {
        let pts: &[f64] = if i == 7 { &[0.0] } else { &[-1.0, 1.0] };
        for s in pts {
            let v = f(c + s * h * XGK[i]);
            add(&mut k, &v, WGK[i] * h);
            if i % 2 == 1 {
                add(&mut g, &v, WG[i / 2] * h);
            }
        }
    }
    let err = max_diff(&k, &g);
    (k, err)
}

pub fn adapt1<const M: usize>(f: &mut impl FnMut(f64) -> [f64; M], a: f64, b: f64, tol: f64, max_depth: u32) -> [f64; M] {
    let (v, err) = gk15(f, a, b);
    if err <= tol || max_depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    let mut out = adapt1(f, a, m, 0.5 * tol, max_depth - 1);
    let right = adapt1(f, m, b, 0.5 * tol, max_depth - 1);
    add(&mut out, &right, 1.0);
    out
}

/// [`adapt1`] with the tolerance taken relative to the first estimate.
pub fn adapt1_rel<const M: usize>(f: &mut impl FnMut(f64) -> [f64; M], a: f64, b: f64, rel: f64, max_depth: u32) -> [f64; M] {
    let (v, err) = gk15(f, a, b);
    let tol = rel * v.iter().fold(0.0f64, |a, x| a.max(x.abs())) + 1e-300;
    if err <= tol || max_depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    let mut out = adapt1(f, a, m, 0.5 * tol, max_depth - 1);
    let right = adapt1(f, m, b, 0.5 * tol, max_depth - 1);
    add(&mut out, &right, 1.0);
    out
}
