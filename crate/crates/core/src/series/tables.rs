//! Exact per-n tables: cluster-count coefficients and size-restricted products.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Model, PAR_THRESHOLD};
use crate::error::{invalid, Result};
use crate::logspace::{LnAcc, LOG_ZERO};
use crate::weights::WeightSequence;

fn fill(len: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
    if len >= PAR_THRESHOLD {
        (0..len).into_par_iter().map(f).collect()
    } else {
        (0..len).map(f).collect()
    }
}

fn ln_weights(w: &WeightSequence, n: usize) -> Vec<f64> {
    let mut v = vec![LOG_ZERO; n + 1];
    for (k, x) in v.iter_mut().enumerate().skip(1) {
        *x = w.ln_weight(k);
    }
    v
}

/// `ln [x^{sm}]` of the size-`s` factor for `m = 0..=max_m`: `c_s^m/m!` for
/// sets, `binom(c_s + m - 1, m)` for multisets.
pub fn ln_size_factor(w: &WeightSequence, s: usize, max_m: usize, model: Model) -> Vec<f64> {
    let lc = w.ln_weight(s);
    let mut out = vec![LOG_ZERO; max_m + 1];
    out[0] = 0.0;
    if lc == LOG_ZERO {
        return out;
    }
    let inv_c = (-lc).exp();
    let mut acc = 0.0;
    for (m, slot) in out.iter_mut().enumerate().skip(1) {
        let mf = m as f64;
        acc += match model {
            Model::Set => lc - mf.ln(),
            Model::Multiset => lc + ((mf - 1.0) * inv_c).ln_1p() - mf.ln(),
        };
        *slot = acc;
    }
    out
}

/// Multiplies a series (truncated at `prev.len() - 1`) by the size-`s` factor.
fn times_size_factor(prev: &[f64], s: usize, factor: &[f64]) -> Vec<f64> {
    fill(prev.len(), |i| {
        let mut acc = LnAcc::new();
        for (m, &f) in factor.iter().enumerate() {
            if s * m > i {
                break;
            }
            let p = prev[i - s * m];
            if p != LOG_ZERO && f != LOG_ZERO {
                acc.push(f + p);
            }
        }
        acc.value()
    })
}

/// Rows `s = 0..=n` of the table `W(i, s) = ln [x^i] prod_{k<=s} factor_k`.
pub fn restricted_rows(w: &WeightSequence, n: usize, model: Model) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(n + 1);
    let mut cur = vec![LOG_ZERO; n + 1];
    cur[0] = 0.0;
    rows.push(cur.clone());
    for s in 1..=n {
        let f = ln_size_factor(w, s, n / s, model);
        cur = times_size_factor(&cur, s, &f);
        rows.push(cur.clone());
    }
    rows
}

/// `ln P(L <= s)` for `s = 0..=n`, by the incremental product over sizes.
pub fn largest_cdf_ln(w: &WeightSequence, n: usize, model: Model) -> Vec<f64> {
    let mut cur = vec![LOG_ZERO; n + 1];
    cur[0] = 0.0;
    let mut top = vec![cur[n]];
    for s in 1..=n {
        let f = ln_size_factor(w, s, n / s, model);
        cur = times_size_factor(&cur, s, &f);
        top.push(cur[n]);
    }
    let total = top[n];
    top.iter().map(|v| (v - total).min(0.0)).collect()
}

/// `ln P(M > s)` for `s = 0..=n`, by the product over sizes `> s` built top-down.
pub fn smallest_survival_ln(w: &WeightSequence, n: usize, model: Model) -> Vec<f64> {
    let mut cur = vec![LOG_ZERO; n + 1];
    cur[0] = 0.0;
    let mut top = vec![LOG_ZERO; n + 1];
    top[n] = cur[n];
    for s in (0..n).rev() {
        let size = s + 1;
        let f = ln_size_factor(w, size, n / size, model);
        cur = times_size_factor(&cur, size, &f);
        top[s] = cur[n];
    }
    let total = top[0];
    top.iter().map(|v| (v - total).min(0.0)).collect()
}

/// `ln [x^n y^N]` of `S(x,y)` or `G(x,y)` for `N = 0..=n`.
pub fn kappa_table(w: &WeightSequence, n: usize, model: Model) -> Vec<f64> {
    match model {
        Model::Set => set_kappa(w, n),
        Model::Multiset => multiset_kappa(w, n),
    }
}

fn set_kappa(w: &WeightSequence, n: usize) -> Vec<f64> {
    let lc = ln_weights(w, n);
    let m = w.first_positive();
    let mut out = vec![LOG_ZERO; n + 1];
    if n == 0 {
        out[0] = 0.0;
        return out;
    }
    // D_N = C^N / N!, only indices >= N m are non-zero
    let mut d = vec![LOG_ZERO; n + 1];
    d[0] = 0.0;
    let mut nn = 1;
    while nn * m <= n {
        let lo = nn * m;
        let ln_n = (nn as f64).ln();
        let prev = &d;
        let next = fill(n + 1, |i| {
            if i < lo {
                return LOG_ZERO;
            }
            let mut acc = LnAcc::new();
            for k in m..=(i - (nn - 1) * m) {
                let p = prev[i - k];
                if p != LOG_ZERO && lc[k] != LOG_ZERO {
                    acc.push(lc[k] + p);
                }
            }
            acc.value() - ln_n
        });
        d = next;
        out[nn] = d[n];
        nn += 1;
    }
    out
}

fn multiset_kappa(w: &WeightSequence, n: usize) -> Vec<f64> {
    let lc = ln_weights(w, n);
    let m = w.first_positive();
    let mut out = vec![LOG_ZERO; n + 1];
    if n == 0 {
        out[0] = 0.0;
        return out;
    }
    // N H_N = sum_j C(x^j) H_{N-j}
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut h0 = vec![LOG_ZERO; n + 1];
    h0[0] = 0.0;
    h.push(h0);
    let mut nn = 1;
    while nn * m <= n {
        let lo = nn * m;
        let ln_n = (nn as f64).ln();
        let hs = &h;
        let next = fill(n + 1, |i| {
            if i < lo {
                return LOG_ZERO;
            }
            let mut acc = LnAcc::new();
            for j in 1..=nn {
                let prev = &hs[nn - j];
                let floor = (nn - j) * m;
                let mut k = m;
                while j * k + floor <= i {
                    let p = prev[i - j * k];
                    if p != LOG_ZERO && lc[k] != LOG_ZERO {
                        acc.push(lc[k] + p);
                    }
                    k += 1;
                }
            }
            acc.value() - ln_n
        });
        out[nn] = next[n];
        h.push(next);
        nn += 1;
    }
    out
}

/// `ln [x^n y^N] exp(y C(x))` for `N = 0..=n_max`.
pub fn bivariate_set_coeffs(w: &WeightSequence, n: usize, n_max: usize) -> Result<Vec<f64>> {
    if n_max > n {
        return invalid(format!("N_max = {n_max} exceeds n = {n}"));
    }
    Ok(set_kappa(w, n)[..=n_max].to_vec())
}

/// `ln [x^n y^N] exp(sum_j y^j C(x^j)/j)` for `N = 0..=n_max`.
pub fn bivariate_multiset_coeffs(w: &WeightSequence, n: usize, n_max: usize) -> Result<Vec<f64>> {
    if n_max > n {
        return invalid(format!("N_max = {n_max} exceeds n = {n}"));
    }
    Ok(multiset_kappa(w, n)[..=n_max].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Kappa,
    Largest,
    Smallest,
}

/// How a [`DistributionTable`] is indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// `P(kappa = i)`.
    Pmf,
    /// `P(L <= i)`.
    Cdf,
    /// `P(M > i)`.
    Survival,
}

/// An exact probability table over `i = 0..=n`, stored in log-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub statistic: Statistic,
    pub kind: TableKind,
    pub n: usize,
    pub ln_values: Vec<f64>,
}

impl DistributionTable {
    pub fn values(&self) -> Vec<f64> {
        self.ln_values.iter().map(|v| v.exp()).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        super::write_table_csv(out, &self.ln_values)
    }

    pub fn to_json(&self) -> serde_json::Value {
        super::table_json(&self.ln_values)
    }
}

/// Exact law of `kappa`, `L` or `M` under the uniform-weight measure on `Omega_n`.
pub fn exact_distribution(w: &WeightSequence, n: usize, statistic: Statistic, model: Model) -> Result<DistributionTable> {
    if n == 0 {
        return invalid("distributions are defined for n >= 1");
    }
    let (kind, ln_values) = match statistic {
        Statistic::Kappa => {
            let row = kappa_table(w, n, model);
            let total = crate::logspace::ln_sum(&row);
            if total == LOG_ZERO {
                return invalid(format!("Omega_{n} carries no weight"));
            }
            (TableKind::Pmf, row.iter().map(|v| v - total).collect())
        }
        Statistic::Largest => (TableKind::Cdf, largest_cdf_ln(w, n, model)),
        Statistic::Smallest => (TableKind::Survival, smallest_survival_ln(w, n, model)),
    };
    if ln_values.iter().any(|v| v.is_nan()) {
        return invalid(format!("Omega_{n} carries no weight"));
    }
    Ok(DistributionTable { statistic, kind, n, ln_values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{full_series, restricted_series, Restriction};
    use crate::series::omega::ln_rising;
    use crate::special::ln_gamma;
    use crate::weights::make_explicit_weights;

    fn ln_binom_real(c: f64, m: usize) -> f64 {
        ln_rising(c.ln(), m as u64) - ln_gamma(m as f64 + 1.0)
    }

    #[test]
    fn kappa_examples() {
        let p = WeightSequence::partitions();
        let row = bivariate_multiset_coeffs(&p, 5, 5).unwrap();
        let got: Vec<f64> = row.iter().map(|v| v.exp()).collect();
        for (g, e) in got.iter().zip([0.0, 1.0, 2.0, 2.0, 1.0, 1.0]) {
            assert!((g - e).abs() < 1e-12);
        }
        let two = make_explicit_weights(&[0.0, 1.0], None, None).unwrap();
        assert!((bivariate_multiset_coeffs(&two, 6, 3).unwrap()[3].exp() - 1.0).abs() < 1e-12);

        let row = bivariate_set_coeffs(&p, 4, 4).unwrap();
        assert!((row[2].exp() * 24.0 - 36.0).abs() < 1e-11);
        assert_eq!(row[0], LOG_ZERO);
        let total: f64 = row.iter().map(|v| v.exp() * 24.0).sum();
        assert!((total - 73.0).abs() < 1e-10);
        assert!(bivariate_set_coeffs(&p, 4, 5).is_err());
    }

    #[test]
    fn distribution_examples() {
        let p = WeightSequence::partitions();
        let d = exact_distribution(&p, 3, Statistic::Largest, Model::Multiset).unwrap().values();
        assert!((d[1] - 1.0 / 3.0).abs() < 1e-14 && (d[2] - 2.0 / 3.0).abs() < 1e-14 && (d[3] - 1.0).abs() < 1e-15);
        let d = exact_distribution(&p, 3, Statistic::Kappa, Model::Set).unwrap().values();
        assert!((d[1] - 6.0 / 13.0).abs() < 1e-14);
        assert!((d[2] - 6.0 / 13.0).abs() < 1e-14);
        assert!((d[3] - 1.0 / 13.0).abs() < 1e-14);
        let s = exact_distribution(&p, 6, Statistic::Smallest, Model::Multiset).unwrap().values();
        assert_eq!(s[0], 1.0);
        assert_eq!(*s.last().unwrap(), 0.0);
        let two = make_explicit_weights(&[0.0, 1.0], None, None).unwrap();
        assert!(exact_distribution(&two, 7, Statistic::Kappa, Model::Multiset).is_err());
    }

    #[test]
    fn incremental_products_match_restricted_exp() {
        let p = WeightSequence::partitions();
        for model in [Model::Set, Model::Multiset] {
            let n = 40;
            let total = full_series(&p, n, model).coeff(n).unwrap();
            let cdf = largest_cdf_ln(&p, n, model);
            let surv = smallest_survival_ln(&p, n, model);
            for s in [1, 3, 10, 39] {
                let a = restricted_series(&p, n, model, Restriction::MaxSize(s)).coeff(n).unwrap() - total;
                assert!((a - cdf[s]).abs() < 1e-10, "{model:?} L<= {s}");
                let b = restricted_series(&p, n, model, Restriction::MinSizeAbove(s)).coeff(n).unwrap() - total;
                assert!((b - surv[s]).abs() < 1e-10, "{model:?} M > {s}");
            }
        }
    }

    #[test]
    fn size_factor_multiset_matches_gamma_form() {
        let w = make_explicit_weights(&[2.5], None, None).unwrap();
        let f = ln_size_factor(&w, 1, 6, Model::Multiset);
        for (m, v) in f.iter().enumerate() {
            assert!((v - ln_binom_real(2.5, m)).abs() < 1e-12);
        }
    }
}
