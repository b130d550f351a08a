//! Regime lemma for `sum k^gamma e^{-chi k}/(1-e^{-chi k})^beta` and Karamata's estimate.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::special::{gamma, integrate, zeta};
use crate::weights::WeightSequence;

/// Which branch of the regime lemma applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `beta < 1 + gamma`: `d1 chi^{-(gamma+1)}`.
    Integral,
    /// `beta = 1 + gamma`: `chi^{-(gamma+1)} ln(1/chi)`.
    Log,
    /// `beta > 1 + gamma`: `zeta(beta - gamma) chi^{-beta}`.
    Zeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmPrediction {
    pub value: f64,
    pub regime: Regime,
    /// The constant `d1` or `d2` (1 in the log regime).
    pub constant: f64,
    /// Set when `chi > 0.5`, where the leading term is a poor guide.
    pub large_chi: bool,
}

/// `d1 = int_0^inf t^gamma e^{-t} / (1 - e^{-t})^beta dt` for `beta < 1 + gamma`.
pub fn d1_integral(beta: f64, gamma_exp: f64) -> f64 {
    let g = |t: f64| t.powf(gamma_exp) * (-t).exp() / (-(-t).exp_m1()).powf(beta);
    // t = u^{1/e} on [0,1] removes the t^{gamma-beta} endpoint singularity
    let e = gamma_exp - beta + 1.0;
    let head = integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let t = u.powf(1.0 / e);
            g(t) * t / (e * u)
        },
        0.0,
        1.0,
        1e-13,
    );
    let tail = integrate(g, 1.0, 150.0, 1e-13);
    head + tail
}

/// Leading-order asymptotics of `sum_{k>=1} k^gamma e^{-chi k}/(1-e^{-chi k})^beta` as `chi -> 0`.
pub fn euler_maclaurin_sum_asympt(beta: f64, gamma_exp: f64, chi: f64) -> Result<EmPrediction> {
    if !(beta >= 0.0 && gamma_exp >= 0.0) {
        return invalid(format!("need beta, gamma >= 0, got {beta}, {gamma_exp}"));
    }
    if !(chi > 0.0) {
        return invalid(format!("chi must be positive, got {chi}"));
    }
    let d = beta - (1.0 + gamma_exp);
    let (regime, constant, value) = if d.abs() <= 1e-12 {
        (Regime::Log, 1.0, chi.powf(-(gamma_exp + 1.0)) * (1.0 / chi).ln())
    } else if d < 0.0 {
        let d1 = d1_integral(beta, gamma_exp);
        (Regime::Integral, d1, d1 * chi.powf(-(gamma_exp + 1.0)))
    } else {
        let d2 = zeta(beta - gamma_exp);
        (Regime::Zeta, d2, d2 * chi.powf(-beta))
    };
    Ok(EmPrediction { value, regime, constant, large_chi: chi > 0.5 })
}

/// Direct evaluation of the regime-lemma sum, stopping once terms are negligible.
pub fn em_direct_sum(beta: f64, gamma_exp: f64, chi: f64) -> f64 {
    let mut total = 0.0;
    let mut k = 1u64;
    loop {
        let x = chi * k as f64;
        let t = (k as f64).powf(gamma_exp) * (-x).exp() / (-(-x).exp_m1()).powf(beta);
        total += t;
        if x > 40.0 && t < 1e-17 * total {
            return total;
        }
        k += 1;
    }
}

/// Karamata's estimate `Gamma(alpha) h(1/chi) chi^{-alpha}` of `sum_k h(k) k^{alpha-1} e^{-chi k}`.
pub fn karamata_rhs(w: &WeightSequence, chi: f64) -> Result<f64> {
    let (Some(alpha), Some(h)) = (w.alpha(), w.slow_factor()) else {
        return invalid("Karamata's estimate needs a power-law weight family");
    };
    if !(chi > 0.0) {
        return invalid(format!("chi must be positive, got {chi}"));
    }
    Ok(gamma(alpha) * h.eval(1.0 / chi) * chi.powf(-alpha))
}
