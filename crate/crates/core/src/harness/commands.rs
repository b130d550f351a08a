//! Command implementations behind the `clusterkit` binary.
//!
//! Every command takes a JSON configuration and produces both a JSON value
//! and a CSV rendering; the binary picks one according to `--format`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{run_experiment, ExperimentConfig, ExperimentReport};
use crate::asymptotics::{h_admissibility_diagnostics, HadmConfig};
use crate::asymptotics::{em_direct_sum, euler_maclaurin_sum_asympt, karamata_rhs};
use crate::asymptotics::{
    coeff_estimate_multiset, coeff_estimate_set, count_estimate, closed_form_scaling, gumbel_scaling, AsymptoticEstimate,
};
use crate::error::{invalid, Result};
use crate::saddle::{solve_multiset_saddle, solve_ratio_saddle, solve_set_saddle, FSpec, SaddleKind, SaddlePoint};
use crate::sampling::{sample_replicates, Method, Sampler, SamplerConfig};
use crate::series::{exact_distribution, full_series, Model, Statistic};
use crate::weights::WeightSpec;

/// Rendered command result.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub json: Value,
    pub csv: Vec<u8>,
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Output {
    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => Ok(self.csv.clone()),
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(&self.json)?;
                v.push(b'\n');
                Ok(v)
            }
        }
    }
}

fn key_value_csv(v: &Value) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"])?;
    fn walk(prefix: &str, v: &Value, w: &mut csv::Writer<Vec<u8>>) -> Result<()> {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, w)?;
                }
            }
            Value::String(s) => w.write_record([prefix, s])?,
            other => w.write_record([prefix, &other.to_string()])?,
        }
        Ok(())
    }
    walk("", v, &mut w)?;
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
}

fn object_output(json: Value) -> Result<Output> {
    let csv = key_value_csv(&json)?;
    Ok(Output { json, csv })
}

fn default_weights() -> WeightSpec {
    WeightSpec::Power { alpha: 1.0, rho: 1.0, h: Default::default() }
}

fn default_model() -> Model {
    Model::Set
}

/// `count`: the exact series, or the exact law of a statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountConfig {
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    #[serde(default = "default_model")]
    pub model: Model,
    pub n: usize,
    #[serde(default)]
    pub statistic: Option<Statistic>,
}

pub fn count(cfg: &CountConfig) -> Result<Output> {
    let w = cfg.weights.build()?;
    let mut csv = Vec::new();
    let json = match cfg.statistic {
        None => {
            let s = full_series(&w, cfg.n, cfg.model);
            s.write_csv(&mut csv)?;
            json!({ "model": cfg.model, "n": cfg.n, "coefficients": s.to_json() })
        }
        Some(stat) => {
            let t = exact_distribution(&w, cfg.n, stat, cfg.model)?;
            t.write_csv(&mut csv)?;
            json!({ "model": cfg.model, "n": cfg.n, "statistic": stat, "kind": t.kind, "values": t.to_json() })
        }
    };
    Ok(Output { json, csv })
}

/// What `estimate` approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimateTarget {
    /// `[x^n] S C^ell` or its multiset analogue.
    #[default]
    Coefficient,
    /// `s_n` (sets) or `g_n` (multisets).
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    #[serde(default = "default_model")]
    pub model: Model,
    pub n: usize,
    #[serde(default)]
    pub target: EstimateTarget,
    #[serde(default)]
    pub ell: u32,
    #[serde(default)]
    pub p: Option<Vec<u32>>,
}

pub fn estimate(cfg: &EstimateConfig) -> Result<Output> {
    let w = cfg.weights.build()?;
    let est: AsymptoticEstimate = match (cfg.target, cfg.model) {
        (EstimateTarget::Count, m) => count_estimate(&w, cfg.n, m)?,
        (EstimateTarget::Coefficient, Model::Set) => coeff_estimate_set(&w, cfg.n, cfg.ell)?,
        (EstimateTarget::Coefficient, Model::Multiset) => {
            let p = super::default_p(cfg.ell, &cfg.p)?;
            coeff_estimate_multiset(&w, cfg.n, &p)?
        }
    };
    object_output(serde_json::to_value(est)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleConfig {
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    pub kind: SaddleKind,
    pub n: f64,
    /// Cluster count for the ratio equation.
    #[serde(default)]
    pub big_n: Option<f64>,
}

pub fn saddle(cfg: &SaddleConfig) -> Result<Output> {
    let w = cfg.weights.build()?;
    let sp: SaddlePoint = match cfg.kind {
        SaddleKind::Set => solve_set_saddle(&w, cfg.n)?,
        SaddleKind::Multiset => solve_multiset_saddle(&w, cfg.n)?,
        SaddleKind::Ratio => {
            let Some(big_n) = cfg.big_n else {
                return invalid("the ratio saddle needs big_n");
            };
            solve_ratio_saddle(&w, cfg.n, big_n)?
        }
    };
    object_output(json!({ "r": sp.r, "chi": sp.chi, "residual": sp.residual, "a": sp.a_val, "b": sp.b_val }))
}

fn default_count() -> usize {
    1000
}

fn default_method() -> Method {
    Method::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    #[serde(default = "default_model")]
    pub model: Model,
    pub n: usize,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tuning_radius: Option<f64>,
}

/// `sample`: one `replicate,kappa,smallest,largest` row per draw.
pub fn sample(cfg: &SampleConfig) -> Result<Output> {
    let w = cfg.weights.build()?;
    let sc = SamplerConfig { tuning_radius: cfg.tuning_radius, seed: cfg.seed, ..SamplerConfig::new(cfg.model, cfg.n) };
    let sampler = Sampler::build(&w, &sc, cfg.method)?;
    let stats = sample_replicates(&sampler, cfg.seed, cfg.count)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["replicate", "kappa", "smallest", "largest"])?;
    let mut rows = Vec::with_capacity(stats.len());
    for (i, s) in stats.iter().enumerate() {
        w.write_record([i.to_string(), s.kappa.to_string(), s.smallest.to_string(), s.largest.to_string()])?;
        rows.push(json!({ "replicate": i, "kappa": s.kappa, "smallest": s.smallest, "largest": s.largest }));
    }
    let csv = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    let method = match &sampler {
        Sampler::Boltzmann(_) => "boltzmann",
        Sampler::Exact(_) => "dp",
    };
    Ok(Output { json: json!({ "method": method, "samples": rows }), csv })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelScaleConfig {
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    #[serde(default = "default_model")]
    pub model: Model,
    pub n: usize,
}

/// `gumbel-scale`: `beta_n`, `ln X`, and the closed-form leading terms for pure power laws.
pub fn gumbel_scale(cfg: &GumbelScaleConfig) -> Result<Output> {
    let w = cfg.weights.build()?;
    let g = gumbel_scaling(&w, cfg.n, cfg.model)?;
    let closed = match cfg.weights {
        WeightSpec::Power { alpha, rho, h: crate::weights::SlowFactor::Const { c: 1.0 } } => {
            Some(closed_form_scaling(cfg.n as f64, alpha, rho, cfg.model)?)
        }
        _ => None,
    };
    object_output(json!({
        "beta_n": g.beta_n,
        "ln_x": g.ln_x,
        "branch": g.model,
        "s_at_t0": g.s_of_t(0.0),
        "closed_form": closed,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmLemmaConfig {
    pub beta: f64,
    pub gamma: f64,
    pub chi: f64,
    /// Weights for the Karamata comparison.
    #[serde(default)]
    pub weights: Option<WeightSpec>,
}

/// `em-lemma`: leading-order sum asymptotics against direct summation.
pub fn em_lemma(cfg: &EmLemmaConfig) -> Result<Output> {
    let pred = euler_maclaurin_sum_asympt(cfg.beta, cfg.gamma, cfg.chi)?;
    let direct = em_direct_sum(cfg.beta, cfg.gamma, cfg.chi);
    let mut out = json!({
        "prediction": pred.value,
        "regime": pred.regime,
        "constant": pred.constant,
        "large_chi": pred.large_chi,
        "direct": direct,
        "ratio": direct / pred.value,
    });
    if let Some(ws) = &cfg.weights {
        let w = ws.build()?;
        let rhs = karamata_rhs(&w, cfg.chi)?;
        let lhs = crate::saddle::eval_a_s(&w, w.radius_from_chi(cfg.chi), 0)?.exp();
        out["karamata"] = json!({ "direct": lhs, "prediction": rhs, "ratio": lhs / rhs });
    }
    object_output(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadmProbeConfig {
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    #[serde(default = "default_fspec")]
    pub fspec: FSpec,
    #[serde(flatten)]
    pub probe: HadmConfig,
}

fn default_fspec() -> FSpec {
    FSpec::Set { ell: 0 }
}

pub fn hadm_probe(cfg: &HadmProbeConfig) -> Result<Output> {
    let w = cfg.weights.build()?;
    let rep = h_admissibility_diagnostics(&cfg.fspec, &w, &cfg.probe)?;
    object_output(serde_json::to_value(rep)?)
}

/// Runs a verification experiment and renders its report.
pub fn verify(cfg: &ExperimentConfig) -> Result<Output> {
    let rep = run_experiment(cfg)?;
    report_output(&rep)
}

pub fn report_output(rep: &ExperimentReport) -> Result<Output> {
    let mut csv = Vec::new();
    rep.write_csv(&mut csv)?;
    Ok(Output { json: serde_json::to_value(rep)?, csv })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_output_fields() {
        let cfg: SaddleConfig = serde_json::from_value(json!({ "kind": "set", "n": 10.0 })).unwrap();
        let out = saddle(&cfg).unwrap();
        for k in ["r", "chi", "residual", "a", "b"] {
            assert!(out.json.get(k).is_some(), "{k}");
        }
        assert!((out.json["a"].as_f64().unwrap() - 10.0).abs() < 1e-8);
        assert!(String::from_utf8(out.csv).unwrap().starts_with("key,value\n"));
    }

    #[test]
    fn sample_csv_header() {
        let cfg: SampleConfig = serde_json::from_value(json!({ "n": 8, "count": 5, "model": "multiset" })).unwrap();
        let out = sample(&cfg).unwrap();
        let text = String::from_utf8(out.csv).unwrap();
        assert!(text.starts_with("replicate,kappa,smallest,largest\n"));
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn count_partitions() {
        let cfg: CountConfig = serde_json::from_value(json!({ "n": 10, "model": "multiset" })).unwrap();
        let out = count(&cfg).unwrap();
        let v = out.json["coefficients"][10]["value"].as_f64().unwrap();
        assert!((v - 42.0).abs() < 1e-9);
    }
}
