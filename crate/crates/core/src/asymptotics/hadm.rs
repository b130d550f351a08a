//! Numerical probes of the capture, locality and decay conditions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::saddle::{adaptive_ln_terms, hayman_functionals, FSpec};
use crate::weights::WeightSequence;

/// Probe parameters. `theta0` overrides the default cut `chi^{1+delta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HadmConfig {
    pub chi: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub theta0: Option<f64>,
    #[serde(default = "default_grid")]
    pub theta_grid: usize,
}

fn default_grid() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadmReport {
    pub r: f64,
    pub chi: f64,
    pub theta0: f64,
    pub delta: Option<f64>,
    /// Capture: `a(r)`, `b(r)` (and `c(r)`).
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Locality: `max_{|theta|<=theta0} |F(r e^{i theta}) / (F(r) e^{i theta a - theta^2 b/2}) - 1|`.
    pub h2_defect: f64,
    pub h2_argmax: f64,
    /// Decay: `max_{theta0<=|theta|<=pi} |F(r e^{i theta})| sqrt(b) / F(r)`.
    pub h3_max: f64,
    pub h3_argmax: f64,
    pub terms: usize,
}

/// Magnitudes of one power series `sum_k u_k x^{jk}` at `|x| = r`, scaled by `e^shift`.
struct Block {
    j: f64,
    weight: f64,
    shift: f64,
    mags: Vec<f64>,
}

impl Block {
    /// `ln sum_k u_k (r e^{i theta})^{jk}` (complex).
    fn ln_eval(&self, theta: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, self.j * theta);
        let mut z = step;
        let mut acc = Complex64::new(0.0, 0.0);
        for &m in &self.mags {
            acc += m * z;
            z *= step;
        }
        acc.ln() + self.shift
    }
}

fn block(w: &WeightSequence, chi: f64, j: usize, weight: f64) -> Result<Block> {
    let at = w.radius_pow(w.radius_from_chi(chi), j);
    let lt = adaptive_ln_terms(w, at, 0)?;
    let shift = lt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Block { j: j as f64, weight, shift, mags: lt.iter().map(|v| (v - shift).exp()).collect() })
}

/// Groups of blocks entering `ln F` as `factor * ln(sum of blocks)`.
type LogGroups = Vec<(f64, Vec<Block>)>;

/// Builds the blocks of `f = ln F`: terms entering linearly and terms entering through a log.
fn blocks(fspec: &FSpec, w: &WeightSequence, chi: f64) -> Result<(Vec<Block>, LogGroups)> {
    match fspec {
        FSpec::Set { ell } => {
            let b = block(w, chi, 1, 1.0)?;
            let logs = if *ell > 0 { vec![(*ell as f64, vec![block(w, chi, 1, 1.0)?])] } else { vec![] };
            Ok((vec![b], logs))
        }
        FSpec::Multiset { p } => {
            let at = w.radius_from_chi(chi);
            if !(at.ln_r < 0.0) {
                return invalid("multiset probes need r < 1");
            }
            let m = w.first_positive() as f64;
            let mut lin = Vec::new();
            let mut j = 1;
            // same truncation rule as A_{0,0}: tail ratio bounded by r^m
            loop {
                let b = block(w, chi, j, 1.0 / j as f64)?;
                let size = b.shift + b.mags.iter().sum::<f64>().ln() - (j as f64).ln();
                lin.push(b);
                let lq = m * at.ln_r;
                let total = lin.iter().map(|b| b.shift + b.mags.iter().sum::<f64>().ln() + b.weight.ln()).fold(
                    f64::NEG_INFINITY,
                    crate::logspace::ln_add,
                );
                if size + lq - (-lq.exp_m1()).ln() < total - 36.8 {
                    break;
                }
                j += 1;
            }
            let jmax = lin.len();
            let mut logs = Vec::new();
            for &pi in p {
                let group = (1..=jmax + 8)
                    .map(|j| block(w, chi, j, (j as f64).powi(pi as i32)))
                    .collect::<Result<Vec<_>>>()?;
                logs.push((1.0, group));
            }
            Ok((lin, logs))
        }
    }
}

fn eval_f(lin: &[Block], logs: &[(f64, Vec<Block>)], theta: f64) -> Complex64 {
    let mut f = Complex64::new(0.0, 0.0);
    for b in lin {
        f += b.weight * b.ln_eval(theta).exp();
    }
    for (mult, group) in logs {
        let s: Complex64 = group.iter().map(|b| b.weight * b.ln_eval(theta).exp()).sum();
        f += mult * s.ln();
    }
    f
}

/// Evaluates the locality and decay statistics of `F` on a grid of angles.
pub fn h_admissibility_diagnostics(fspec: &FSpec, w: &WeightSequence, cfg: &HadmConfig) -> Result<HadmReport> {
    if cfg.theta_grid < 2 {
        return invalid("theta_grid must be at least 2");
    }
    let at = w.radius_from_chi(cfg.chi);
    let fun = hayman_functionals(fspec, w, at)?;
    let bounded_domain = w.rho().is_some() || w.support_len().is_none();
    let (theta0, delta) = match (cfg.theta0, bounded_domain) {
        (Some(t), _) => (t, cfg.delta),
        (None, true) => {
            let delta = match (cfg.delta, w.alpha()) {
                (Some(d), _) => d,
                (None, Some(a)) => a / 3.0 + 0.01,
                (None, None) => return invalid("delta or alpha is needed to place theta0"),
            };
            if !(delta > 0.0) {
                return invalid("delta must be positive");
            }
            (cfg.chi.powf(1.0 + delta), Some(delta))
        }
        (None, false) => (fun.b.powf(-0.4), cfg.delta),
    };
    if !(theta0 > 0.0 && theta0 < PI) {
        return invalid(format!("theta0 = {theta0} must lie in (0, pi)"));
    }
    let (lin, logs) = blocks(fspec, w, cfg.chi)?;
    let terms = lin.iter().map(|b| b.mags.len()).sum();
    let f0 = eval_f(&lin, &logs, 0.0).re;
    let g = cfg.theta_grid;
    let inner: Vec<(f64, f64)> = (0..=g)
        .into_par_iter()
        .map(|i| {
            let th = theta0 * i as f64 / g as f64;
            let d = eval_f(&lin, &logs, th) - f0 - Complex64::new(-th * th * fun.b / 2.0, th * fun.a);
            (th, (d.exp() - 1.0).norm())
        })
        .collect();
    let outer: Vec<(f64, f64)> = (0..=g)
        .into_par_iter()
        .map(|i| {
            let th = theta0 + (PI - theta0) * i as f64 / g as f64;
            (th, (eval_f(&lin, &logs, th).re - f0 + 0.5 * fun.b.ln()).exp())
        })
        .collect();
    let argmax = |v: &[(f64, f64)]| v.iter().copied().fold((0.0, f64::NEG_INFINITY), |m, x| if x.1 > m.1 { x } else { m });
    let (h2_argmax, h2_defect) = argmax(&inner);
    let (h3_argmax, h3_max) = argmax(&outer);
    Ok(HadmReport {
        r: at.r(),
        chi: cfg.chi,
        theta0,
        delta,
        a: fun.a,
        b: fun.b,
        c: fun.c,
        h2_defect,
        h2_argmax,
        h3_max,
        h3_argmax,
        terms,
    })
}
