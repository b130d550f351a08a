//! Verification experiments comparing exact, asymptotic and sampled quantities.

pub mod commands;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    bivariate_set_estimate, coeff_estimate_multiset, coeff_estimate_set, gumbel_scaling,
    llt_pmf_prediction, moment_estimate, smallest_limit, GumbelScaling,
};
use crate::error::{invalid, Result};
use crate::logspace::{ln_sum, LOG_ZERO};
use crate::sampling::{sample_replicates, Method, Sampler, SamplerConfig};
use crate::series::{
    bivariate_set_coeffs, full_series, kappa_table, largest_cdf_ln, set_series, smallest_survival_ln, truncate_c,
    weighted_euler_sum, LogSeries, Model,
};
use crate::weights::{WeightSequence, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Coefficients,
    Gumbel,
    Smallest,
    Moments,
    Llt,
    Bivariate,
}

/// One comparison cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub n: usize,
    /// What the row measures, e.g. `ratio`, `ks`, `identity`.
    pub label: String,
    /// Secondary coordinate: `ell`, `s`, `t` or `N`.
    pub param: Option<f64>,
    pub exact: f64,
    pub predicted: f64,
    pub empirical: Option<f64>,
    pub deviation: f64,
}

impl Metric {
    fn new(n: usize, label: &str, param: Option<f64>, exact: f64, predicted: f64, deviation: f64) -> Self {
        Metric { n, label: label.to_string(), param, exact, predicted, empirical: None, deviation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub n_grid: Vec<usize>,
    pub metrics: Vec<Metric>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub config_echo: serde_json::Value,
}

impl ExperimentReport {
    /// Writes `experiment,n,label,param,exact,predicted,empirical,deviation` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            experiment: Experiment,
            n: usize,
            label: &'a str,
            param: Option<f64>,
            exact: f64,
            predicted: f64,
            empirical: Option<f64>,
            deviation: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for m in &self.metrics {
            w.serialize(Row {
                experiment: self.experiment,
                n: m.n,
                label: &m.label,
                param: m.param,
                exact: m.exact,
                predicted: m.predicted,
                empirical: m.empirical,
                deviation: m.deviation,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Largest deviation among rows with the given `n` and label.
    pub fn max_deviation(&self, n: usize, label: &str) -> f64 {
        self.metrics.iter().filter(|m| m.n == n && m.label == label).map(|m| m.deviation).fold(f64::NAN, f64::max)
    }
}

fn check_grid(n_grid: &[usize], min_len: usize) -> Result<()> {
    if n_grid.len() < min_len {
        return invalid(format!("n_grid needs at least {min_len} points for the trend check"));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) || n_grid[0] == 0 {
        return invalid("n_grid must be positive and strictly increasing");
    }
    Ok(())
}

fn ratio_dev(ln_est: f64, ln_exact: f64) -> f64 {
    (ln_est - ln_exact).exp_m1().abs()
}

fn trend_verdict(first: f64, last: f64, tol: f64) -> Verdict {
    let pass = last < tol && last < first;
    Verdict { pass, reason: format!("deviation {first:.4e} -> {last:.4e}, tolerance {tol}") }
}

fn default_p(ell: u32, p: &Option<Vec<u32>>) -> Result<Vec<u32>> {
    match p {
        Some(v) if v.len() != ell as usize => invalid("p must have length ell"),
        Some(v) => Ok(v.clone()),
        None => Ok(vec![0; ell as usize]),
    }
}

fn default_coeff_tol() -> f64 {
    0.1
}
fn default_ks_tol() -> f64 {
    0.08
}
fn default_smallest_tol() -> f64 {
    0.02
}
fn default_llt_tol() -> f64 {
    0.15
}
fn default_samples() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientsConfig {
    pub weights: WeightSpec,
    pub model: Model,
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub ell: u32,
    /// Multiset exponents `p_i`; zeros by default.
    #[serde(default)]
    pub p: Option<Vec<u32>>,
    #[serde(default = "default_coeff_tol")]
    pub tolerance: f64,
}

/// Exact `ln [x^n] S C^ell` or `ln [x^n] G prod_i sum_j j^{p_i} C(x^j)` for `n = 0..=k`.
pub fn exact_weighted_series(w: &WeightSequence, k: usize, model: Model, p: &[u32]) -> LogSeries {
    let mut s = full_series(w, k, model);
    for &pi in p {
        let factor = match model {
            Model::Set => truncate_c(w, k),
            Model::Multiset => weighted_euler_sum(w, k, pi),
        };
        s = s.mul(&factor);
    }
    s
}

pub fn verify_coefficients(cfg: &CoefficientsConfig) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid, 2)?;
    let w = cfg.weights.build()?;
    let p = default_p(cfg.ell, &cfg.p)?;
    let nmax = *cfg.n_grid.last().unwrap();
    let exact = exact_weighted_series(&w, nmax, cfg.model, &p);
    let metrics = cfg
        .n_grid
        .par_iter()
        .map(|&n| {
            let est = match cfg.model {
                Model::Set => coeff_estimate_set(&w, n, cfg.ell)?,
                Model::Multiset => coeff_estimate_multiset(&w, n, &p)?,
            };
            let ex = exact.coeff(n)?;
            Ok(Metric::new(n, "ratio", Some(cfg.ell as f64), ex, est.log_value, ratio_dev(est.log_value, ex)))
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = trend_verdict(metrics[0].deviation, metrics.last().unwrap().deviation, cfg.tolerance);
    Ok(ExperimentReport {
        experiment: Experiment::Coefficients,
        n_grid: cfg.n_grid.clone(),
        metrics,
        tolerance: cfg.tolerance,
        verdict,
        config_echo: serde_json::to_value(cfg)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GumbelMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelConfig {
    pub weights: WeightSpec,
    pub model: Model,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_mode")]
    pub mode: GumbelMode,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Sampler for `sampled` mode; the DP sampler up to its budget, `auto` beyond.
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default = "default_ks_tol")]
    pub tolerance: f64,
}

fn default_mode() -> GumbelMode {
    GumbelMode::Exact
}

/// Kolmogorov distance between a CDF on `{0, ..., n}` and the mapped Gumbel law.
///
/// `cdf[s] = P(L <= s)`; the supremum over real `s` is attained at the jumps.
pub fn kolmogorov_to_gumbel(cdf: &[f64], g: &GumbelScaling) -> f64 {
    let mut d: f64 = 0.0;
    for s in 1..cdf.len() {
        let gs = g.cdf(s as f64);
        d = d.max((cdf[s] - gs).abs()).max((cdf[s - 1] - gs).abs());
    }
    d
}

/// Empirical CDF on `{0, ..., n}` of observed largest sizes.
pub fn empirical_cdf(values: impl Iterator<Item = usize>, n: usize) -> Vec<f64> {
    let mut counts = vec![0u64; n + 1];
    let mut total = 0u64;
    for v in values {
        counts[v.min(n)] += 1;
        total += 1;
    }
    let mut acc = 0u64;
    counts
        .iter()
        .map(|c| {
            acc += c;
            acc as f64 / total as f64
        })
        .collect()
}

/// DKW half-width at confidence `1 - alpha`.
pub fn dkw_band(samples: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * samples as f64)).sqrt()
}

pub fn verify_gumbel(cfg: &GumbelConfig) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid, 1)?;
    let w = cfg.weights.build()?;
    let metrics = cfg
        .n_grid
        .par_iter()
        .map(|&n| -> Result<Vec<Metric>> {
            let g = gumbel_scaling(&w, n, cfg.model)?;
            let s0 = (g.s_of_t(0.0).floor().max(0.0) as usize).min(n);
            let mut rows = Vec::new();
            let exact_cdf = if n <= crate::sampling::DP_BUDGET || cfg.mode == GumbelMode::Exact {
                Some(largest_cdf_ln(&w, n, cfg.model).iter().map(|v| v.exp()).collect::<Vec<f64>>())
            } else {
                None
            };
            let sampled = if cfg.mode == GumbelMode::Sampled {
                let sc = SamplerConfig { seed: cfg.seed, ..SamplerConfig::new(cfg.model, n) };
                let default = if n <= crate::sampling::DP_BUDGET { Method::Dp } else { Method::Auto };
                let sampler = Sampler::build(&w, &sc, cfg.method.unwrap_or(default))?;
                let draws = sample_replicates(&sampler, cfg.seed, cfg.samples)?;
                Some(empirical_cdf(draws.iter().map(|d| d.largest), n))
            } else {
                None
            };
            let pred = g.cdf(s0 as f64);
            if let Some(ex) = &exact_cdf {
                let mut m = Metric::new(n, "ks_exact", None, ex[s0], pred, kolmogorov_to_gumbel(ex, &g));
                m.empirical = sampled.as_ref().map(|e| e[s0]);
                rows.push(m);
            }
            if let Some(emp) = &sampled {
                let mut m = Metric::new(n, "ks_sampled", None, exact_cdf.as_ref().map_or(f64::NAN, |e| e[s0]), pred,
                    kolmogorov_to_gumbel(emp, &g));
                m.empirical = Some(emp[s0]);
                rows.push(m);
                if let Some(ex) = &exact_cdf {
                    let sup = ex.iter().zip(emp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    let band = dkw_band(cfg.samples, 0.01);
                    let mut m = Metric::new(n, "dkw", None, band, band, sup);
                    m.empirical = Some(sup);
                    rows.push(m);
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let label = match cfg.mode {
        GumbelMode::Exact => "ks_exact",
        GumbelMode::Sampled => "ks_sampled",
    };
    let ks: Vec<f64> = metrics.iter().filter(|m| m.label == label).map(|m| m.deviation).collect();
    let decreasing = ks.windows(2).all(|p| p[1] < p[0]);
    let last = *ks.last().unwrap();
    let dkw_ok = metrics.iter().filter(|m| m.label == "dkw").all(|m| m.deviation <= m.exact);
    let verdict = Verdict {
        pass: decreasing && last <= cfg.tolerance && dkw_ok,
        reason: format!("Kolmogorov distances {ks:?}, tolerance {}, DKW ok: {dkw_ok}", cfg.tolerance),
    };
    Ok(ExperimentReport {
        experiment: Experiment::Gumbel,
        n_grid: cfg.n_grid.clone(),
        metrics,
        tolerance: cfg.tolerance,
        verdict,
        config_echo: serde_json::to_value(cfg)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallestConfig {
    pub weights: WeightSpec,
    pub model: Model,
    pub n_grid: Vec<usize>,
    pub s_max: usize,
    #[serde(default = "default_smallest_tol")]
    pub tolerance: f64,
}

pub fn verify_smallest(cfg: &SmallestConfig) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid, 1)?;
    let w = cfg.weights.build()?;
    let metrics = cfg
        .n_grid
        .par_iter()
        .map(|&n| {
            let surv = smallest_survival_ln(&w, n, cfg.model);
            (0..=cfg.s_max.min(n))
                .map(|s| {
                    let ex = surv[s].exp();
                    let lim = smallest_limit(&w, s, cfg.model);
                    let label = if lim.diverged { "survival_diverged" } else { "survival" };
                    Metric::new(n, label, Some(s as f64), ex, lim.value, (ex - lim.value).abs())
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let nmax = *cfg.n_grid.last().unwrap();
    let worst = metrics.iter().filter(|m| m.n == nmax).map(|m| m.deviation).fold(0.0, f64::max);
    let verdict = Verdict {
        pass: worst < cfg.tolerance,
        reason: format!("largest |P(M>s) - limit| at n = {nmax}: {worst:.4e}, tolerance {}", cfg.tolerance),
    };
    Ok(ExperimentReport {
        experiment: Experiment::Smallest,
        n_grid: cfg.n_grid.clone(),
        metrics,
        tolerance: cfg.tolerance,
        verdict,
        config_echo: serde_json::to_value(cfg)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsConfig {
    pub weights: WeightSpec,
    pub model: Model,
    pub n_grid: Vec<usize>,
    pub ell_max: u32,
    #[serde(default = "default_coeff_tol")]
    pub tolerance: f64,
    /// Relative tolerance of the factorial-moment identity (set model).
    #[serde(default = "default_identity_tol")]
    pub identity_tolerance: f64,
}

fn default_identity_tol() -> f64 {
    1e-10
}

/// `ln E[kappa^ell]` and `ln E[(kappa)_ell]` from a `ln [x^n y^N]` row.
pub fn kappa_moments(row: &[f64], ell: u32) -> (f64, f64) {
    let total = ln_sum(row);
    let mut raw = Vec::with_capacity(row.len());
    let mut fall = Vec::with_capacity(row.len());
    for (nn, &v) in row.iter().enumerate() {
        if v == LOG_ZERO || nn == 0 {
            continue;
        }
        let x = nn as f64;
        raw.push(v + ell as f64 * x.ln());
        if nn >= ell as usize {
            let lf: f64 = (0..ell).map(|i| (x - i as f64).ln()).sum();
            fall.push(v + lf);
        }
    }
    (ln_sum(&raw) - total, ln_sum(&fall) - total)
}

pub fn verify_moments(cfg: &MomentsConfig) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid, 1)?;
    if cfg.ell_max == 0 {
        return invalid("ell_max must be at least 1");
    }
    let w = cfg.weights.build()?;
    // surface unsupported orders before any heavy work
    moment_estimate(&w, cfg.n_grid[0], cfg.ell_max, cfg.model)?;
    let nmax = *cfg.n_grid.last().unwrap();
    let set_c = (cfg.model == Model::Set).then(|| (set_series(&w, nmax), truncate_c(&w, nmax)));
    let metrics = cfg
        .n_grid
        .par_iter()
        .map(|&n| -> Result<Vec<Metric>> {
            let row = kappa_table(&w, n, cfg.model);
            let mut rows = Vec::new();
            let mut power = set_c.as_ref().map(|(s, _)| s.truncate(n));
            for ell in 1..=cfg.ell_max {
                let (raw, fall) = kappa_moments(&row, ell);
                let est = moment_estimate(&w, n, ell, cfg.model)?;
                rows.push(Metric::new(n, "moment", Some(ell as f64), raw.exp(), est.value(), ratio_dev(est.log_value, raw)));
                if let (Some((s, c)), Some(pw)) = (&set_c, power.as_mut()) {
                    *pw = pw.mul(&c.truncate(n));
                    let lhs = pw.coeff(n)? - s.coeff(n)?;
                    rows.push(Metric::new(n, "identity", Some(ell as f64), fall.exp(), lhs.exp(), ratio_dev(lhs, fall)));
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let worst = metrics.iter().filter(|m| m.n == nmax && m.label == "moment").map(|m| m.deviation).fold(0.0, f64::max);
    let worst_id = metrics.iter().filter(|m| m.label == "identity").map(|m| m.deviation).fold(0.0, f64::max);
    let verdict = Verdict {
        pass: worst < cfg.tolerance && worst_id <= cfg.identity_tolerance,
        reason: format!(
            "moment deviation at n = {nmax}: {worst:.4e} (tolerance {}); identity deviation {worst_id:.3e}",
            cfg.tolerance
        ),
    };
    Ok(ExperimentReport {
        experiment: Experiment::Moments,
        n_grid: cfg.n_grid.clone(),
        metrics,
        tolerance: cfg.tolerance,
        verdict,
        config_echo: serde_json::to_value(cfg)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LltConfig {
    pub weights: WeightSpec,
    pub model: Model,
    pub n_grid: Vec<usize>,
    pub t_grid: Vec<f64>,
    #[serde(default = "default_llt_tol")]
    pub tolerance: f64,
}

pub fn verify_llt(cfg: &LltConfig) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid, 1)?;
    if cfg.t_grid.is_empty() {
        return invalid("t_grid must not be empty");
    }
    let w = cfg.weights.build()?;
    llt_pmf_prediction(&w, cfg.n_grid[0], 0.0, cfg.model)?;
    let metrics = cfg
        .n_grid
        .par_iter()
        .map(|&n| -> Result<Vec<Metric>> {
            let row = kappa_table(&w, n, cfg.model);
            let total = ln_sum(&row);
            cfg.t_grid
                .iter()
                .map(|&t| {
                    let pr = llt_pmf_prediction(&w, n, t, cfg.model)?;
                    let ex = row.get(pr.target).map_or(LOG_ZERO, |v| v - total);
                    Ok(Metric::new(n, "pmf", Some(t), ex.exp(), pr.predicted, ratio_dev(pr.predicted.ln(), ex)))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let first = metrics.iter().filter(|m| m.n == cfg.n_grid[0]).map(|m| m.deviation).fold(0.0, f64::max);
    let nmax = *cfg.n_grid.last().unwrap();
    let last = metrics.iter().filter(|m| m.n == nmax).map(|m| m.deviation).fold(0.0, f64::max);
    let mut verdict = trend_verdict(first, last, cfg.tolerance);
    if cfg.n_grid.len() == 1 {
        verdict.pass = last < cfg.tolerance;
    }
    Ok(ExperimentReport {
        experiment: Experiment::Llt,
        n_grid: cfg.n_grid.clone(),
        metrics,
        tolerance: cfg.tolerance,
        verdict,
        config_echo: serde_json::to_value(cfg)?,
    })
}

/// How the cluster count `N` grows with `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum NRule {
    /// `floor(sqrt(n))`.
    Sqrt,
    /// `floor(n^exponent)` with `0 < exponent < 1`.
    Power { exponent: f64 },
    /// A fixed `N`; rejected because the estimate needs `N -> infinity`.
    Constant { value: usize },
}

impl NRule {
    pub fn apply(&self, n: usize) -> Result<usize> {
        match *self {
            NRule::Sqrt => Ok((n as f64).sqrt().floor() as usize),
            NRule::Power { exponent } if exponent > 0.0 && exponent < 1.0 => Ok((n as f64).powf(exponent).floor() as usize),
            NRule::Power { exponent } => invalid(format!("exponent {exponent} must lie in (0,1) so that N, n/N grow")),
            NRule::Constant { .. } => invalid("a constant N violates N -> infinity"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateConfig {
    pub weights: WeightSpec,
    pub n_grid: Vec<usize>,
    pub n_rule: NRule,
    #[serde(default = "default_coeff_tol")]
    pub tolerance: f64,
}

pub fn verify_bivariate(cfg: &BivariateConfig) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid, 1)?;
    let w = cfg.weights.build()?;
    let metrics = cfg
        .n_grid
        .par_iter()
        .map(|&n| {
            let big_n = cfg.n_rule.apply(n)?;
            let ex = bivariate_set_coeffs(&w, n, big_n)?[big_n];
            let est = bivariate_set_estimate(&w, n, big_n)?;
            Ok(Metric::new(n, "ratio", Some(big_n as f64), ex, est.log_value, ratio_dev(est.log_value, ex)))
        })
        .collect::<Result<Vec<_>>>()?;
    let first = metrics[0].deviation;
    let last = metrics.last().unwrap().deviation;
    let mut verdict = trend_verdict(first, last, cfg.tolerance);
    if metrics.len() == 1 {
        verdict.pass = last < cfg.tolerance;
    }
    Ok(ExperimentReport {
        experiment: Experiment::Bivariate,
        n_grid: cfg.n_grid.clone(),
        metrics,
        tolerance: cfg.tolerance,
        verdict,
        config_echo: serde_json::to_value(cfg)?,
    })
}

/// Any experiment configuration, tagged by `experiment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Coefficients(CoefficientsConfig),
    Gumbel(GumbelConfig),
    Smallest(SmallestConfig),
    Moments(MomentsConfig),
    Llt(LltConfig),
    Bivariate(BivariateConfig),
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg {
        ExperimentConfig::Coefficients(c) => verify_coefficients(c),
        ExperimentConfig::Gumbel(c) => verify_gumbel(c),
        ExperimentConfig::Smallest(c) => verify_smallest(c),
        ExperimentConfig::Moments(c) => verify_moments(c),
        ExperimentConfig::Llt(c) => verify_llt(c),
        ExperimentConfig::Bivariate(c) => verify_bivariate(c),
    }
}

/// Re-runs an experiment from the echoed configuration of a report.
pub fn rerun(report: &ExperimentReport) -> Result<ExperimentReport> {
    let v = report.config_echo.clone();
    let cfg = match report.experiment {
        Experiment::Coefficients => ExperimentConfig::Coefficients(serde_json::from_value(v)?),
        Experiment::Gumbel => ExperimentConfig::Gumbel(serde_json::from_value(v)?),
        Experiment::Smallest => ExperimentConfig::Smallest(serde_json::from_value(v)?),
        Experiment::Moments => ExperimentConfig::Moments(serde_json::from_value(v)?),
        Experiment::Llt => ExperimentConfig::Llt(serde_json::from_value(v)?),
        Experiment::Bivariate => ExperimentConfig::Bivariate(serde_json::from_value(v)?),
    };
    run_experiment(&cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::gumbel_cdf;
    use crate::error::Error;
    use crate::weights::SlowFactor;

    fn partitions() -> WeightSpec {
        WeightSpec::Power { alpha: 1.0, rho: 1.0, h: SlowFactor::default() }
    }

    #[test]
    fn singleton_grid_rejected_for_coefficients() {
        let cfg = CoefficientsConfig {
            weights: partitions(),
            model: Model::Multiset,
            n_grid: vec![100],
            ell: 0,
            p: None,
            tolerance: 0.1,
        };
        assert!(verify_coefficients(&cfg).is_err());
    }

    #[test]
    fn constant_rule_rejected() {
        let cfg = BivariateConfig { weights: partitions(), n_grid: vec![100, 200], n_rule: NRule::Constant { value: 5 }, tolerance: 0.1 };
        assert!(verify_bivariate(&cfg).is_err());
        assert_eq!(NRule::Sqrt.apply(1600).unwrap(), 40);
    }

    #[test]
    fn smallest_at_zero_is_one() {
        let cfg = SmallestConfig { weights: partitions(), model: Model::Multiset, n_grid: vec![30], s_max: 0, tolerance: 0.02 };
        let rep = verify_smallest(&cfg).unwrap();
        assert_eq!(rep.metrics[0].exact, 1.0);
        assert!(rep.verdict.pass);
    }

    #[test]
    fn report_is_reproducible_from_echo() {
        let cfg = CoefficientsConfig {
            weights: partitions(),
            model: Model::Set,
            n_grid: vec![20, 40],
            ell: 1,
            p: None,
            tolerance: 0.5,
        };
        let rep = verify_coefficients(&cfg).unwrap();
        assert_eq!(rerun(&rep).unwrap(), rep);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("experiment,n,label,param,exact,predicted,empirical,deviation"));
    }

    #[test]
    fn kolmogorov_of_exact_gumbel_steps() {
        let g = GumbelScaling { beta_n: 1.0, ln_x: 0.0, model: crate::asymptotics::GumbelModel::Set };
        let cdf: Vec<f64> = (0..50).map(|s| gumbel_cdf(s as f64)).collect();
        let d = kolmogorov_to_gumbel(&cdf, &g);
        assert!((d - (gumbel_cdf(1.0) - gumbel_cdf(0.0))).abs() < 1e-15);
    }

    #[test]
    fn llt_rejects_partitions_multiset() {
        let cfg = LltConfig { weights: partitions(), model: Model::Multiset, n_grid: vec![50], t_grid: vec![0.0], tolerance: 0.15 };
        assert!(matches!(verify_llt(&cfg), Err(Error::Scope(_))));
    }

    #[test]
    fn moments_reject_third_order_at_rho_one() {
        let cfg = MomentsConfig {
            weights: partitions(),
            model: Model::Multiset,
            n_grid: vec![50],
            ell_max: 3,
            tolerance: 0.1,
            identity_tolerance: 1e-10,
        };
        assert!(matches!(verify_moments(&cfg), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn moments_identity_small() {
        let cfg = MomentsConfig {
            weights: partitions(),
            model: Model::Set,
            n_grid: vec![30, 60],
            ell_max: 3,
            tolerance: 1.0,
            identity_tolerance: 1e-10,
        };
        let rep = verify_moments(&cfg).unwrap();
        let worst = rep.metrics.iter().filter(|m| m.label == "identity").map(|m| m.deviation).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }
}
