//! Auxiliary sums `A_s`, `A_{s,t}`, Hayman functionals and the saddle-point equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{LnAcc, LOG_ZERO};
use crate::weights::{Radius, WeightSequence};

/// Smallest admissible `chi = ln(rho/r)` for series with a finite radius.
pub const CHI_MIN: f64 = 1e-8;
/// Upper bound on the number of terms in one adaptive sum.
pub const MAX_TERMS: usize = 200_000_000;
const LN_REL_TAIL: f64 = -36.841_361_487_904_734; // ln(1e-16)

/// Generating function whose Hayman functionals are requested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FSpec {
    /// `S(x) C(x)^ell`.
    Set { ell: u32 },
    /// `G(x) prod_i sum_j j^{p_i} C(x^j)`.
    Multiset { p: Vec<u32> },
}

fn check_domain(w: &WeightSequence, at: Radius) -> Result<()> {
    if at.ln_r.is_nan() || at.chi.is_nan() {
        return Err(Error::InvalidParameter("radius is NaN".into()));
    }
    match w.support_len() {
        Some(_) => Ok(()),
        None if at.chi >= CHI_MIN => Ok(()),
        None => Err(Error::Divergence(format!("chi = {} is below the cap {CHI_MIN}", at.chi))),
    }
}

/// `ln A_s(r) = ln sum_k k^s c_k r^k`.
pub fn eval_a_s(w: &WeightSequence, at: Radius, s: u32) -> Result<f64> {
    check_domain(w, at)?;
    let sf = s as f64;
    let mut acc = LnAcc::new();
    if let Some(len) = w.support_len() {
        for k in 1..=len {
            let t = w.ln_term(k, at);
            if t != LOG_ZERO {
                acc.push(sf * (k as f64).ln() + t);
            }
        }
        return Ok(acc.value());
    }
    let ln_floor = -at.chi;
    let mut prev = LOG_ZERO;
    for k in 1..=MAX_TERMS {
        let t = sf * (k as f64).ln() + w.ln_term(k, at);
        acc.push(t);
        if k >= 10 {
            let lq = (t - prev).max(ln_floor);
            if lq < 0.0 {
                let tail = t + lq - (-lq.exp_m1()).ln();
                if tail < acc.value() + LN_REL_TAIL {
                    return Ok(acc.value());
                }
            }
        }
        prev = t;
    }
    Err(Error::Divergence(format!("A_{s} did not converge within {MAX_TERMS} terms at chi = {}", at.chi)))
}

/// `ln (k^s c_k r^k)` for `k = 1..K`, with `K` chosen by the same tail rule as [`eval_a_s`].
pub(crate) fn adaptive_ln_terms(w: &WeightSequence, at: Radius, s: u32) -> Result<Vec<f64>> {
    check_domain(w, at)?;
    let sf = s as f64;
    if let Some(len) = w.support_len() {
        return Ok((1..=len).map(|k| sf * (k as f64).ln() + w.ln_term(k, at)).collect());
    }
    let mut out = Vec::new();
    let mut acc = LnAcc::new();
    let mut prev = LOG_ZERO;
    for k in 1..=MAX_TERMS {
        let t = sf * (k as f64).ln() + w.ln_term(k, at);
        acc.push(t);
        out.push(t);
        if k >= 10 {
            let lq = (t - prev).max(-at.chi);
            if lq < 0.0 && t + lq - (-lq.exp_m1()).ln() < acc.value() + LN_REL_TAIL {
                return Ok(out);
            }
        }
        prev = t;
    }
    Err(Error::Divergence(format!("term list did not converge at chi = {}", at.chi)))
}

/// `ln A_{s,t}(r) = ln sum_j j^{t-1} A_s(r^j)`.
pub fn eval_a_st(w: &WeightSequence, at: Radius, s: u32, t: u32) -> Result<f64> {
    if !(at.ln_r < 0.0) {
        return Err(Error::Divergence(format!("A_{{{s},{t}}} needs r < 1, got r = {}", at.r())));
    }
    let tm1 = t as f64 - 1.0;
    let m = w.first_positive() as f64;
    let mut acc = LnAcc::new();
    for j in 1..=MAX_TERMS {
        let jf = j as f64;
        let term = tm1 * jf.ln() + eval_a_s(w, w.radius_pow(at, j), s)?;
        acc.push(term);
        // A_s(x)/x^m increases in x, so term_{j+1}/term_j <= ((j+1)/j)^{t-1} r^m
        let lq = tm1 * (1.0 / jf).ln_1p() + m * at.ln_r;
        if lq < 0.0 {
            let tail = term + lq - (-lq.exp_m1()).ln();
            if tail < acc.value() + LN_REL_TAIL {
                return Ok(acc.value());
            }
        }
    }
    Err(Error::Divergence(format!("A_{{{s},{t}}} did not converge")))
}

/// Hayman functionals `a = x f'`, `b = x a'`, `c = x b'` of `f = ln F`, and `ln F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub ln_f: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Evaluates the Hayman functionals of `fspec` at radius `at`.
pub fn hayman_functionals(fspec: &FSpec, w: &WeightSequence, at: Radius) -> Result<Functionals> {
    match fspec {
        FSpec::Set { ell } => {
            let l = *ell as f64;
            let ln0 = eval_a_s(w, at, 0)?;
            // ratios A_s/A_0
            let [a1, a2, a3] = [eval_a_s(w, at, 1)? - ln0, eval_a_s(w, at, 2)? - ln0, eval_a_s(w, at, 3)? - ln0].map(f64::exp);
            let big = ln0.exp();
            Ok(Functionals {
                ln_f: big + l * ln0,
                a: big * a1 + l * a1,
                b: big * a2 + l * (a2 - a1 * a1),
                c: big * a3 + l * (a3 - 3.0 * a1 * a2 + 2.0 * a1 * a1 * a1),
            })
        }
        FSpec::Multiset { p } => {
            let mut out = Functionals {
                ln_f: eval_a_st(w, at, 0, 0)?.exp(),
                a: eval_a_st(w, at, 1, 1)?.exp(),
                b: eval_a_st(w, at, 2, 2)?.exp(),
                c: eval_a_st(w, at, 3, 3)?.exp(),
            };
            for &pi in p {
                let ln0 = eval_a_st(w, at, 0, 1 + pi)?;
                let r1 = (eval_a_st(w, at, 1, 2 + pi)? - ln0).exp();
                let r2 = (eval_a_st(w, at, 2, 3 + pi)? - ln0).exp();
                let r3 = (eval_a_st(w, at, 3, 4 + pi)? - ln0).exp();
                out.ln_f += ln0;
                out.a += r1;
                out.b += r2 - r1 * r1;
                out.c += r3 - 3.0 * r1 * r2 + 2.0 * r1 * r1 * r1;
            }
            Ok(out)
        }
    }
}

/// Which saddle equation was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SaddleKind {
    /// `A_1(r) = n`.
    Set,
    /// `A_{1,1}(r) = n`.
    Multiset,
    /// `A_1(r)/A_0(r) = n/N`.
    Ratio,
}

/// A solved saddle-point equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub r: f64,
    pub ln_r: f64,
    /// `ln(rho/r)`, or `-ln r` for weights without a radius.
    pub chi: f64,
    pub target: f64,
    pub residual: f64,
    pub a_val: f64,
    pub b_val: f64,
    pub kind: SaddleKind,
}

impl SaddlePoint {
    pub fn radius(&self) -> Radius {
        Radius { ln_r: self.ln_r, chi: self.chi }
    }
}

/// Tolerance on the relative residual of a solved saddle.
pub const SADDLE_TOL: f64 = 1e-9;

/// Solves `objective(chi) = target` for an objective decreasing in `chi`.
/// `eval` returns `(ln objective, d ln objective / d chi)`.
fn solve_decreasing(
    target: f64,
    chi_floor: Option<f64>,
    eval: impl Fn(f64) -> Result<(f64, f64)>,
) -> Result<(f64, f64)> {
    let lt = target.ln();
    let above = |chi: f64| -> Result<bool> { Ok(eval(chi)?.0 > lt) };
    // bracket lo < hi with objective(lo) >= target > objective(hi)
    let (mut lo, mut hi);
    if above(1.0)? {
        lo = 1.0;
        hi = 2.0;
        while above(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::UnreachableTarget { target, detail: "objective stays above the target".into() });
            }
        }
    } else {
        hi = 1.0;
        match chi_floor {
            Some(floor) => {
                lo = 0.25;
                loop {
                    if lo <= floor {
                        lo = floor;
                        if !above(lo)? && eval(lo)?.0 < lt {
                            return Err(Error::UnreachableTarget {
                                target,
                                detail: format!("objective is below the target on the whole admissible range (chi >= {floor})"),
                            });
                        }
                        break;
                    }
                    if above(lo)? {
                        break;
                    }
                    hi = lo;
                    lo *= 0.25;
                }
            }
            None => {
                let mut step = 1.0;
                lo = 0.0;
                while !above(lo)? {
                    hi = lo;
                    lo -= step;
                    step *= 2.0;
                    if lo < -1e6 {
                        return Err(Error::UnreachableTarget { target, detail: "objective is bounded".into() });
                    }
                }
            }
        }
    }
    for _ in 0..400 {
        let width = hi - lo;
        if width <= 1e-15 * lo.abs().max(hi.abs()).max(1e-300) {
            break;
        }
        let mid = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { lo + 0.5 * width };
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut chi = 0.5 * (lo + hi);
    for _ in 0..2 {
        let (lv, d) = eval(chi)?;
        if d == 0.0 {
            break;
        }
        let next = chi - (lv - lt) / d;
        if next.is_finite() && next >= lo - (hi - lo) && next <= hi + (hi - lo) {
            chi = next;
        }
    }
    let (lv, _) = eval(chi)?;
    let residual = lv.exp() - target;
    if residual.abs() > SADDLE_TOL * target.max(1.0) {
        return Err(Error::UnreachableTarget { target, detail: format!("solver stalled with residual {residual}") });
    }
    Ok((chi, residual))
}

fn chi_floor(w: &WeightSequence, need_unit_disc: bool) -> Option<f64> {
    if w.rho().is_some() || w.support_len().is_none() || need_unit_disc {
        Some(CHI_MIN)
    } else {
        None
    }
}

/// Solves `z C'(z) = n`.
pub fn solve_set_saddle(w: &WeightSequence, n: f64) -> Result<SaddlePoint> {
    if !(n >= 1.0) {
        return Err(Error::InvalidParameter(format!("n must be >= 1, got {n}")));
    }
    let eval = |chi: f64| -> Result<(f64, f64)> {
        let at = w.radius_from_chi(chi);
        let l1 = eval_a_s(w, at, 1)?;
        let l2 = eval_a_s(w, at, 2)?;
        Ok((l1, -(l2 - l1).exp()))
    };
    let (chi, residual) = solve_decreasing(n, chi_floor(w, false), eval)?;
    let at = w.radius_from_chi(chi);
    let (a, b) = (eval_a_s(w, at, 1)?.exp(), eval_a_s(w, at, 2)?.exp());
    Ok(SaddlePoint { r: at.r(), ln_r: at.ln_r, chi, target: n, residual, a_val: a, b_val: b, kind: SaddleKind::Set })
}

/// Solves `sum_j q^j C'(q^j) = n`.
pub fn solve_multiset_saddle(w: &WeightSequence, n: f64) -> Result<SaddlePoint> {
    if !(n >= 1.0) {
        return Err(Error::InvalidParameter(format!("n must be >= 1, got {n}")));
    }
    // chi is measured from min(rho, 1); A_{s,t} needs r < 1
    let eval = |chi: f64| -> Result<(f64, f64)> {
        let at = w.radius_from_chi(chi);
        let l1 = eval_a_st(w, at, 1, 1)?;
        let l2 = eval_a_st(w, at, 2, 2)?;
        Ok((l1, -(l2 - l1).exp()))
    };
    let (chi, residual) = solve_decreasing(n, chi_floor(w, true), eval)?;
    let at = w.radius_from_chi(chi);
    let (a, b) = (eval_a_st(w, at, 1, 1)?.exp(), eval_a_st(w, at, 2, 2)?.exp());
    Ok(SaddlePoint {
        r: at.r(),
        ln_r: at.ln_r,
        chi,
        target: n,
        residual,
        a_val: a,
        b_val: b,
        kind: SaddleKind::Multiset,
    })
}

/// Solves `r C'(r)/C(r) = n/N`.
pub fn solve_ratio_saddle(w: &WeightSequence, n: f64, big_n: f64) -> Result<SaddlePoint> {
    if !(big_n >= 1.0 && n >= big_n) {
        return Err(Error::InvalidParameter(format!("need 1 <= N <= n, got n = {n}, N = {big_n}")));
    }
    let target = n / big_n;
    let m = w.first_positive() as f64;
    if target <= m {
        return Err(Error::UnreachableTarget { target, detail: format!("n/N must exceed the first positive index {m}") });
    }
    let eval = |chi: f64| -> Result<(f64, f64)> {
        let at = w.radius_from_chi(chi);
        let l0 = eval_a_s(w, at, 0)?;
        let l1 = eval_a_s(w, at, 1)?;
        let l2 = eval_a_s(w, at, 2)?;
        Ok((l1 - l0, -((l2 - l1).exp() - (l1 - l0).exp())))
    };
    let (chi, residual) = solve_decreasing(target, chi_floor(w, false), eval)?;
    let at = w.radius_from_chi(chi);
    let l0 = eval_a_s(w, at, 0)?;
    let a = (eval_a_s(w, at, 1)? - l0).exp();
    let b = (eval_a_s(w, at, 2)? - l0).exp() - a * a;
    Ok(SaddlePoint { r: at.r(), ln_r: at.ln_r, chi, target, residual, a_val: a, b_val: b, kind: SaddleKind::Ratio })
}
