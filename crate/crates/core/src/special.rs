//! Special functions and quadrature used by the asymptotic formulas.

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Bernoulli numbers B_2, B_4, ..., B_16.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Riemann zeta for real `s > 1`, by Euler-Maclaurin summation with eight
/// Bernoulli correction terms.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta requires s > 1, got {s}");
    const N: usize = 24;
    let nf = N as f64;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    let mut total = head + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising product s(s+1)...(s+2j-2) / (2j)!, times N^{-s-2j+1}
    let mut coef = s / 2.0;
    let mut npow = nf.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        total += b * coef * npow;
        let m = 2.0 * (j as f64 + 1.0);
        coef *= (s + m - 1.0) * (s + m) / ((m + 1.0) * (m + 2.0));
        npow /= nf * nf;
    }
    total
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, err: f64, tol: f64, depth: u32) -> f64 {
        if err <= tol.max(1e-15 * whole.abs()) || depth == 0 {
            return whole;
        }
        let m = 0.5 * (a + b);
        let (l, el) = gk15(f, a, m);
        let (r, er) = gk15(f, m, b);
        rec(f, a, m, l, el, tol / 2.0, depth - 1) + rec(f, m, b, r, er, tol / 2.0, depth - 1)
    }
    let (whole, err) = gk15(&f, a, b);
    rec(&f, a, b, whole, err, tol, 40)
}
