//! Saddle-point estimates of coefficients and limit laws.

mod hadm;
mod lemmas;

pub use hadm::{h_admissibility_diagnostics, HadmConfig, HadmReport};
pub use lemmas::{d1_integral, em_direct_sum, euler_maclaurin_sum_asympt, karamata_rhs, EmPrediction, Regime};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::logspace::LnAcc;
use crate::saddle::{
    eval_a_s, eval_a_st, hayman_functionals, solve_multiset_saddle, solve_ratio_saddle, solve_set_saddle, FSpec,
    SaddlePoint,
};
use crate::series::Model;
use crate::special::{gamma, ln_gamma, zeta};
use crate::weights::{Radius, WeightSequence};

/// The formula an estimate was produced by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// `[x^n] S C^ell` at `z_n`.
    SetCoeff,
    /// Multiset coefficients with `rho < 1`, at `z_n`.
    MultisetCoeffRhoLt1,
    /// Multiset coefficients with `rho = 1`, at `q_n`.
    MultisetCoeffRho1,
    /// `s_n = n! [x^n] S`.
    SetCount,
    /// `g_n = [x^n] G`.
    MultisetCount,
    /// Hayman's coefficient formula at an arbitrary radius.
    Hayman,
    /// `[x^n y^N] S(x, y)` at the ratio saddle `r_n`.
    Bivariate,
    /// Local limit for the number of clusters.
    LocalLimit,
    /// Gumbel law for the largest cluster.
    Gumbel,
    /// Limit law of the smallest cluster.
    Smallest,
    /// Moments of the number of clusters.
    Moments,
    SumRegimes,
    Karamata,
}

/// A positive quantity in log-space together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEstimate {
    pub log_value: f64,
    pub source: Source,
    pub saddle: Option<SaddlePoint>,
    /// Set when the input lies outside the family the formula is meant for.
    pub degenerate: bool,
}

impl AsymptoticEstimate {
    fn new(log_value: f64, source: Source, saddle: SaddlePoint) -> Self {
        AsymptoticEstimate { log_value, source, saddle: Some(saddle), degenerate: false }
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

fn half_ln_2pi(b: f64) -> f64 {
    0.5 * (2.0 * PI * b).ln()
}

/// `[x^n] S(x) C(x)^ell ~ S(z) C(z)^ell / sqrt(2 pi b(z)) z^{-n}` with `b = A_2(z)`.
pub fn coeff_estimate_set(w: &WeightSequence, n: usize, ell: u32) -> Result<AsymptoticEstimate> {
    let sp = solve_set_saddle(w, n as f64)?;
    let ln_c = eval_a_s(w, sp.radius(), 0)?;
    let log_value = ln_c.exp() + ell as f64 * ln_c - half_ln_2pi(sp.b_val) - n as f64 * sp.ln_r;
    Ok(AsymptoticEstimate::new(log_value, Source::SetCoeff, sp))
}

/// `sum_{j>=2} C(rho^j)/j` for weights with a finite radius below 1.
pub fn euler_tail_at_rho(w: &WeightSequence) -> Result<f64> {
    let Some(rho) = w.rho().filter(|r| *r < 1.0) else {
        return invalid("the j >= 2 Euler tail needs 0 < rho < 1");
    };
    let base = w.radius_from_chi(0.0);
    let lq = w.first_positive() as f64 * rho.ln();
    let mut acc = LnAcc::new();
    for j in 2.. {
        let term = eval_a_s(w, w.radius_pow(base, j), 0)? - (j as f64).ln();
        acc.push(term);
        if term + lq - (-lq.exp_m1()).ln() < acc.value() - 36.8 {
            break;
        }
    }
    Ok(acc.value().exp())
}

fn uses_rho_lt_one_branch(w: &WeightSequence) -> bool {
    matches!(w.rho(), Some(r) if r < 1.0)
}

/// Multiset coefficient `[x^n] G(x) prod_i sum_j j^{p_i} C(x^j)`.
///
/// For `rho < 1` this uses the set saddle `z_n` and the `j >= 2` Euler tail
/// at `rho`; otherwise the multiset saddle `q_n` with variance `A_{2,2}(q_n)`.
pub fn coeff_estimate_multiset(w: &WeightSequence, n: usize, p: &[u32]) -> Result<AsymptoticEstimate> {
    let degenerate = w.support_len().is_some() && w.rho().is_none();
    let mut est = if uses_rho_lt_one_branch(w) {
        let sp = solve_set_saddle(w, n as f64)?;
        let ln_c = eval_a_s(w, sp.radius(), 0)?;
        let log_value = euler_tail_at_rho(w)? + ln_c.exp() + p.len() as f64 * ln_c - half_ln_2pi(sp.b_val)
            - n as f64 * sp.ln_r;
        AsymptoticEstimate::new(log_value, Source::MultisetCoeffRhoLt1, sp)
    } else {
        let sp = solve_multiset_saddle(w, n as f64)?;
        let at = sp.radius();
        let mut log_value = eval_a_st(w, at, 0, 0)?.exp() - half_ln_2pi(sp.b_val) - n as f64 * sp.ln_r;
        for &pi in p {
            log_value += eval_a_st(w, at, 0, 1 + pi)?;
        }
        AsymptoticEstimate::new(log_value, Source::MultisetCoeffRho1, sp)
    };
    est.degenerate = degenerate;
    Ok(est)
}

/// `ln s_n` (sets, including `n!`) or `ln g_n` (multisets).
pub fn count_estimate(w: &WeightSequence, n: usize, model: Model) -> Result<AsymptoticEstimate> {
    match model {
        Model::Set => {
            let mut e = coeff_estimate_set(w, n, 0)?;
            e.log_value += ln_gamma(n as f64 + 1.0);
            e.source = Source::SetCount;
            Ok(e)
        }
        Model::Multiset => {
            let mut e = coeff_estimate_multiset(w, n, &[])?;
            e.source = Source::MultisetCount;
            Ok(e)
        }
    }
}

/// Hayman's estimate of `[x^n] F` at an arbitrary radius, Gaussian factor included.
pub fn hayman_coeff_general(fspec: &FSpec, w: &WeightSequence, n: usize, at: Radius) -> Result<AsymptoticEstimate> {
    let f = hayman_functionals(fspec, w, at)?;
    if !(f.b > 0.0) {
        return Err(Error::ContractViolation(format!("b(r) = {} is not positive", f.b)));
    }
    let nf = n as f64;
    let log_value = f.ln_f - half_ln_2pi(f.b) - nf * at.ln_r - (f.a - nf).powi(2) / (2.0 * f.b);
    Ok(AsymptoticEstimate { log_value, source: Source::Hayman, saddle: None, degenerate: false })
}

fn require_alpha(w: &WeightSequence) -> Result<f64> {
    w.alpha().ok_or_else(|| Error::InvalidParameter("alpha must be supplied for explicit weights".into()))
}

/// `[x^n y^N] S(x,y)` at the ratio saddle.
pub fn bivariate_set_estimate(w: &WeightSequence, n: usize, big_n: usize) -> Result<AsymptoticEstimate> {
    let alpha = require_alpha(w)?;
    if big_n == 0 {
        return invalid("N must be at least 1");
    }
    let sp = solve_ratio_saddle(w, n as f64, big_n as f64)?;
    let at = sp.radius();
    let l0 = eval_a_s(w, at, 0)?;
    let a1 = eval_a_s(w, at, 1)?.exp();
    let a2 = eval_a_s(w, at, 2)?.exp();
    let nn = big_n as f64;
    // r^2 C''(r) = A_2 - A_1
    let var = nn * (a2 - a1) / ((alpha + 1.0) * l0.exp());
    let log_value = -ln_gamma(nn + 1.0) + nn * l0 - half_ln_2pi(var) - n as f64 * sp.ln_r;
    Ok(AsymptoticEstimate::new(log_value, Source::Bivariate, sp))
}

/// Target cluster count and predicted point probability of the local limit law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LltPrediction {
    pub t: f64,
    pub target: usize,
    pub predicted: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Predicted `P(kappa = floor(C(z_n) + t sqrt(C(z_n)/(alpha+1))))`.
pub fn llt_pmf_prediction(w: &WeightSequence, n: usize, t: f64, model: Model) -> Result<LltPrediction> {
    if model == Model::Multiset && !uses_rho_lt_one_branch(w) {
        return Err(Error::Scope("the local limit law for multisets is stated for rho < 1 only".into()));
    }
    let alpha = require_alpha(w)?;
    let sp = solve_set_saddle(w, n as f64)?;
    let c = eval_a_s(w, sp.radius(), 0)?.exp();
    let variance = c / (alpha + 1.0);
    let target = (c + t * variance.sqrt()).floor().max(0.0) as usize;
    let predicted = (-t * t / 2.0).exp() / (2.0 * PI * variance).sqrt();
    Ok(LltPrediction { t, target, predicted, mean: c, variance })
}

/// Branch of the Gumbel scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GumbelModel {
    Set,
    MultisetRhoLt1,
    MultisetRho1,
}

/// Centering and scale of the largest cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelScaling {
    pub beta_n: f64,
    pub ln_x: f64,
    pub model: GumbelModel,
}

impl GumbelScaling {
    /// `s(t) = (ln X + t) / beta_n`.
    pub fn s_of_t(&self, t: f64) -> f64 {
        (self.ln_x + t) / self.beta_n
    }

    /// `t(s) = beta_n s - ln X`.
    pub fn t_of_s(&self, s: f64) -> f64 {
        self.beta_n * s - self.ln_x
    }

    /// Predicted `P(L <= s)`.
    pub fn cdf(&self, s: f64) -> f64 {
        gumbel_cdf(self.t_of_s(s))
    }
}

/// Standard Gumbel distribution function `exp(-exp(-t))`.
pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-t).exp()).exp()
}

/// `beta_n` and `ln X` of the Gumbel law for the largest cluster.
pub fn gumbel_scaling(w: &WeightSequence, n: usize, model: Model) -> Result<GumbelScaling> {
    let (Some(alpha), Some(h)) = (w.alpha(), w.slow_factor()) else {
        return invalid("the Gumbel scaling needs a power-law weight family (h must be known)");
    };
    let (sp, gm) = match model {
        Model::Set => (solve_set_saddle(w, n as f64)?, GumbelModel::Set),
        Model::Multiset if uses_rho_lt_one_branch(w) => (solve_set_saddle(w, n as f64)?, GumbelModel::MultisetRhoLt1),
        Model::Multiset => (solve_multiset_saddle(w, n as f64)?, GumbelModel::MultisetRho1),
    };
    let beta = sp.chi;
    let ln_c = eval_a_s(w, w.radius_from_chi(beta), 0)?;
    if alpha != 1.0 && !(ln_c > 0.0) {
        return invalid(format!("C(rho e^-beta) = {} must exceed 1 for the Gumbel centering", ln_c.exp()));
    }
    let mut ln_x = -ln_gamma(alpha) + ln_c;
    if alpha != 1.0 {
        ln_x += (alpha - 1.0) * ln_c.ln();
    }
    ln_x += h.ln_eval(ln_c / beta) - h.ln_eval(1.0 / beta);
    Ok(GumbelScaling { beta_n: beta, ln_x, model: gm })
}

/// Closed-form leading terms of the Gumbel scaling for `c_n = n^{alpha-1} rho^{-n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormScaling {
    /// `f(n)` or `f~(n)`.
    pub f: f64,
    pub beta_first_order: f64,
    pub ln_x: f64,
}

pub fn closed_form_scaling(n: f64, alpha: f64, rho: f64, model: Model) -> Result<ClosedFormScaling> {
    if !(alpha > 0.0 && rho > 0.0 && rho <= 1.0 && n > 1.0) {
        return invalid("need alpha > 0, rho in (0,1] and n > 1");
    }
    let mut base = n / gamma(alpha + 1.0);
    if model == Model::Multiset && rho == 1.0 {
        base /= zeta(alpha + 1.0);
    }
    let f = base.powf(1.0 / (alpha + 1.0));
    let ln_f = f.ln();
    let ln_x = if alpha == 1.0 { ln_f } else { alpha * ln_f + (alpha - 1.0) * (ln_f.ln() + alpha.ln()) };
    Ok(ClosedFormScaling { f, beta_first_order: 1.0 / f, ln_x })
}

/// Limit of `P(M > s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallestLimit {
    pub value: f64,
    /// The exponent diverges and the limit is 0.
    pub diverged: bool,
}

pub fn smallest_limit(w: &WeightSequence, s: usize, model: Model) -> SmallestLimit {
    if s == 0 {
        return SmallestLimit { value: 1.0, diverged: false };
    }
    let diverged = SmallestLimit { value: 0.0, diverged: true };
    let Some(rho) = w.rho() else { return diverged };
    let at_rho = w.radius_from_chi(0.0);
    let mut exponent = 0.0;
    for k in 1..=s {
        let ck_rho_k = w.ln_term(k, at_rho).exp();
        if ck_rho_k == 0.0 {
            continue;
        }
        exponent += match model {
            Model::Set => ck_rho_k,
            // sum_j c_k rho^{jk}/j = -c_k ln(1 - rho^k)
            Model::Multiset if rho < 1.0 => -w.weight_at(k) * (-(k as f64 * rho.ln()).exp()).ln_1p(),
            Model::Multiset => return diverged,
        };
    }
    SmallestLimit { value: (-exponent).exp(), diverged: false }
}

/// Asymptotic `E[kappa^ell]`.
pub fn moment_estimate(w: &WeightSequence, n: usize, ell: u32, model: Model) -> Result<AsymptoticEstimate> {
    if ell == 0 {
        return invalid("moment order must be at least 1");
    }
    if model == Model::Multiset && !uses_rho_lt_one_branch(w) {
        let sp = solve_multiset_saddle(w, n as f64)?;
        let at = sp.radius();
        let log_value = match ell {
            1 => eval_a_st(w, at, 0, 1)?,
            2 => crate::logspace::ln_add(2.0 * eval_a_st(w, at, 0, 1)?, eval_a_st(w, at, 0, 2)?),
            _ => {
                return Err(Error::UnsupportedOrder {
                    order: ell as usize,
                    detail: "only the first two moments are available for multisets with rho = 1".into(),
                })
            }
        };
        return Ok(AsymptoticEstimate::new(log_value, Source::Moments, sp));
    }
    let sp = solve_set_saddle(w, n as f64)?;
    let ln_c = eval_a_s(w, sp.radius(), 0)?;
    Ok(AsymptoticEstimate::new(ell as f64 * ln_c, Source::Moments, sp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{euler_transform, set_series};
    use crate::weights::{make_explicit_weights, make_power_weights, SlowFactor};

    fn single() -> WeightSequence {
        make_explicit_weights(&[1.0], None, Some(1.0)).unwrap()
    }

    #[test]
    fn set_estimate_reproduces_stirling() {
        let w = single();
        for n in [10usize, 100, 1000] {
            let e = coeff_estimate_set(&w, n, 0).unwrap();
            let exact = -ln_gamma(n as f64 + 1.0);
            assert!((e.log_value - exact).abs() < 1.0 / (10.0 * n as f64));
        }
    }

    #[test]
    fn ell_shift_is_ln_c() {
        let p = WeightSequence::partitions();
        let e0 = coeff_estimate_set(&p, 300, 0).unwrap();
        let e1 = coeff_estimate_set(&p, 300, 1).unwrap();
        let ln_c = eval_a_s(&p, e0.saddle.unwrap().radius(), 0).unwrap();
        assert!((e1.log_value - e0.log_value - ln_c).abs() < 1e-12);
        let m0 = coeff_estimate_multiset(&p, 300, &[]).unwrap();
        let m1 = coeff_estimate_multiset(&p, 300, &[0]).unwrap();
        let q = m0.saddle.unwrap().radius();
        let direct: f64 = (1..100_000).map(|j| eval_a_s(&p, p.radius_pow(q, j), 0).unwrap().exp()).sum();
        assert!(((m1.log_value - m0.log_value).exp() / direct - 1.0).abs() < 1e-10);
    }

    #[test]
    fn set_estimate_trend() {
        let p = WeightSequence::partitions();
        let s = set_series(&p, 500);
        let dev = |n: usize| (coeff_estimate_set(&p, n, 0).unwrap().log_value - s.coeff(n).unwrap()).exp_m1().abs();
        assert!(dev(500) < 0.1 && dev(500) < dev(50));
    }

    #[test]
    fn count_estimates() {
        let p = WeightSequence::partitions();
        let g = euler_transform(&p, 1000);
        let e = count_estimate(&p, 1000, Model::Multiset).unwrap();
        assert_eq!(e.source, Source::MultisetCount);
        assert!((e.log_value - g.coeff(1000).unwrap()).exp_m1().abs() < 0.05);
        assert_eq!(e.log_value, coeff_estimate_multiset(&p, 1000, &[]).unwrap().log_value);
        let e = count_estimate(&p, 500, Model::Multiset).unwrap();
        assert!((e.log_value - 2300165032574323995027f64.ln()).exp_m1().abs() < 0.05);
        let e = count_estimate(&single(), 50, Model::Multiset).unwrap();
        assert!(e.degenerate);
    }

    #[test]
    fn multiset_rho_half_trend() {
        let w = make_power_weights(1.0, 0.5, SlowFactor::default()).unwrap();
        let g = euler_transform(&w, 300);
        let devs: Vec<f64> = [50usize, 100, 200, 300]
            .iter()
            .map(|&n| (coeff_estimate_multiset(&w, n, &[]).unwrap().log_value - g.coeff(n).unwrap()).exp_m1().abs())
            .collect();
        assert!(devs.windows(2).all(|d| d[1] < d[0]), "{devs:?}");
        assert_eq!(coeff_estimate_multiset(&w, 50, &[]).unwrap().source, Source::MultisetCoeffRhoLt1);
    }

    #[test]
    fn lemma1_examples() {
        let w = single();
        let e = hayman_coeff_general(&FSpec::Set { ell: 0 }, &w, 10, w.radius_from_r(10.0)).unwrap();
        let ratio = (e.log_value + ln_gamma(11.0)).exp();
        assert!((ratio - 1.008).abs() < 1e-3);
        let p = WeightSequence::partitions();
        let sp = solve_set_saddle(&p, 200.0).unwrap();
        let e = hayman_coeff_general(&FSpec::Set { ell: 0 }, &p, 200, sp.radius()).unwrap();
        let direct = coeff_estimate_set(&p, 200, 0).unwrap();
        assert!((e.log_value - direct.log_value).abs() < 1e-9);
    }

    #[test]
    fn bivariate_examples() {
        let p = WeightSequence::partitions();
        let e = bivariate_set_estimate(&p, 100, 10).unwrap();
        assert!((e.saddle.unwrap().r - 0.9).abs() < 1e-12);
        assert!(bivariate_set_estimate(&single(), 5, 5).is_err());
        let noalpha = make_explicit_weights(&[1.0, 1.0], None, None).unwrap();
        assert!(bivariate_set_estimate(&noalpha, 10, 2).is_err());
    }

    #[test]
    fn llt_scope_and_center() {
        let p = WeightSequence::partitions();
        assert!(matches!(llt_pmf_prediction(&p, 100, 0.0, Model::Multiset), Err(Error::Scope(_))));
        let l = llt_pmf_prediction(&p, 100, 0.0, Model::Set).unwrap();
        assert!((l.predicted - 1.0 / (2.0 * PI * l.variance).sqrt()).abs() < 1e-15);
        let a = llt_pmf_prediction(&p, 100, 1.0, Model::Set).unwrap();
        let b = llt_pmf_prediction(&p, 100, -1.0, Model::Set).unwrap();
        assert_eq!(a.predicted, b.predicted);
    }

    #[test]
    fn gumbel_examples() {
        let p = WeightSequence::partitions();
        let g = gumbel_scaling(&p, 1000, Model::Multiset).unwrap();
        assert_eq!(g.model, GumbelModel::MultisetRho1);
        let c = eval_a_s(&p, p.radius_from_chi(g.beta_n), 0).unwrap();
        assert!((g.ln_x - c).abs() < 1e-12);
        assert!(g.s_of_t(1.0) > g.s_of_t(0.0));
        assert!((gumbel_cdf(0.0) - (-1f64).exp()).abs() < 1e-15);
        let e = closed_form_scaling(1e4, 1.0, 1.0, Model::Multiset).unwrap();
        assert!((e.f - 77.97).abs() < 0.01);
        assert!(gumbel_scaling(&single(), 10, Model::Set).is_err());
    }

    #[test]
    fn closed_form_scaling_values() {
        let e = closed_form_scaling(1e6, 2.0, 1.0, Model::Set).unwrap();
        assert!((e.f - 79.37).abs() < 0.01);
        assert!((e.ln_x - 10.92).abs() < 0.01);
        let e = closed_form_scaling(500.0, 1.0, 0.5, Model::Set).unwrap();
        assert!((e.ln_x - e.f.ln()).abs() < 1e-15);
        let a = closed_form_scaling(500.0, 1.5, 1.0, Model::Set).unwrap();
        let b = closed_form_scaling(500.0, 1.5, 1.0, Model::Multiset).unwrap();
        assert!((b.f / a.f - zeta(2.5).powf(-1.0 / 2.5)).abs() < 1e-14);
    }

    #[test]
    fn smallest_limits() {
        let w = make_power_weights(1.0, 0.5, SlowFactor::default()).unwrap();
        assert!((smallest_limit(&w, 1, Model::Set).value - (-1f64).exp()).abs() < 1e-14);
        assert!((smallest_limit(&w, 1, Model::Multiset).value - 0.25).abs() < 1e-14);
        let p = WeightSequence::partitions();
        let l = smallest_limit(&p, 3, Model::Multiset);
        assert!(l.diverged && l.value == 0.0);
        assert_eq!(smallest_limit(&p, 0, Model::Multiset).value, 1.0);
    }

    #[test]
    fn moment_orders() {
        let p = WeightSequence::partitions();
        assert!(matches!(moment_estimate(&p, 100, 3, Model::Multiset), Err(Error::UnsupportedOrder { .. })));
        let m1 = moment_estimate(&p, 100, 1, Model::Set).unwrap();
        let m2 = moment_estimate(&p, 100, 2, Model::Set).unwrap();
        assert_eq!(m2.log_value, 2.0 * m1.log_value);
        assert!(moment_estimate(&p, 100, 0, Model::Set).is_err());
    }
}
