//! Cluster weight sequences `c_k`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Slowly varying factor `h` of a power-law weight family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SlowFactor {
    /// `h(x) = c`.
    Const { c: f64 },
    /// `h(x) = (ln x)^p` for `x >= 2`, and `h(x) = h(2)` below.
    LogPower { p: f64 },
}

impl SlowFactor {
    pub fn ln_eval(&self, x: f64) -> f64 {
        match *self {
            SlowFactor::Const { c } => c.ln(),
            SlowFactor::LogPower { p } => p * x.max(2.0).ln().ln(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.ln_eval(x).exp()
    }
}

impl Default for SlowFactor {
    fn default() -> Self {
        SlowFactor::Const { c: 1.0 }
    }
}

/// JSON description of a weight sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Power {
        alpha: f64,
        rho: f64,
        #[serde(default)]
        h: SlowFactor,
    },
    Explicit {
        values: Vec<f64>,
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default)]
        alpha: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Power { alpha: f64, h: SlowFactor },
    Explicit { ln_values: Vec<f64>, alpha: Option<f64> },
}

/// An immutable weight sequence `(c_k)_{k>=1}`.
///
/// Power-law weights are `c_k = h(k) k^(alpha-1) rho^(-k)`. Explicit weights
/// are `c_k = values[k-1]`, zero past the end of the list.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    kind: Kind,
    rho: Option<f64>,
    m: usize,
}

/// A point `r` on the positive axis, carried together with
/// `chi = ln(rho) - ln(r)` so that power-law terms avoid cancellation.
/// For weights without a finite radius `chi = -ln(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radius {
    pub ln_r: f64,
    pub chi: f64,
}

impl Radius {
    pub fn r(&self) -> f64 {
        self.ln_r.exp()
    }
}

pub fn make_power_weights(alpha: f64, rho: f64, h: SlowFactor) -> Result<WeightSequence> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return invalid(format!("alpha must be positive, got {alpha}"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return invalid(format!("rho must lie in (0,1], got {rho}"));
    }
    match h {
        SlowFactor::Const { c } if !(c > 0.0 && c.is_finite()) => {
            return invalid(format!("constant h must be positive, got {c}"))
        }
        SlowFactor::LogPower { p } if !p.is_finite() => return invalid("log power must be finite"),
        _ => {}
    }
    Ok(WeightSequence { kind: Kind::Power { alpha, h }, rho: Some(rho), m: 1 })
}

/// Explicit weights. `rho` is the radius handed to the saddle solvers
/// (`None` means the series is a polynomial with infinite radius).
pub fn make_explicit_weights(values: &[f64], rho: Option<f64>, alpha: Option<f64>) -> Result<WeightSequence> {
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return invalid(format!("explicit weights must be finite and non-negative, got {v}"));
    }
    let Some(first) = values.iter().position(|&v| v > 0.0) else {
        return invalid("explicit weights need at least one positive entry");
    };
    if let Some(r) = rho {
        if !(r > 0.0 && r <= 1.0) {
            return invalid(format!("rho must lie in (0,1], got {r}"));
        }
    }
    if let Some(a) = alpha {
        if !(a > 0.0) {
            return invalid(format!("alpha must be positive, got {a}"));
        }
    }
    let ln_values = values.iter().map(|v| v.ln()).collect();
    Ok(WeightSequence { kind: Kind::Explicit { ln_values, alpha }, rho, m: first + 1 })
}

impl WeightSpec {
    pub fn build(&self) -> Result<WeightSequence> {
        match self {
            WeightSpec::Power { alpha, rho, h } => make_power_weights(*alpha, *rho, *h),
            WeightSpec::Explicit { values, rho, alpha } => make_explicit_weights(values, *rho, *alpha),
        }
    }
}

impl WeightSequence {
    /// `c_k = 1`: integer partitions as multisets, sets of lists as sets.
    pub fn partitions() -> Self {
        make_power_weights(1.0, 1.0, SlowFactor::default()).expect("valid constants")
    }

    /// `ln c_k`, `-inf` for a zero weight.
    pub fn ln_weight(&self, k: usize) -> f64 {
        assert!(k >= 1, "weights are indexed from 1");
        match &self.kind {
            Kind::Power { alpha, h } => {
                let kf = k as f64;
                h.ln_eval(kf) + (alpha - 1.0) * kf.ln() - kf * self.rho.unwrap().ln()
            }
            Kind::Explicit { ln_values, .. } => ln_values.get(k - 1).copied().unwrap_or(f64::NEG_INFINITY),
        }
    }

    pub fn weight_at(&self, k: usize) -> f64 {
        self.ln_weight(k).exp()
    }

    /// `ln(c_k r^k)` at the given radius.
    #[inline]
    pub fn ln_term(&self, k: usize, at: Radius) -> f64 {
        let kf = k as f64;
        match &self.kind {
            Kind::Power { alpha, h } => h.ln_eval(kf) + (alpha - 1.0) * kf.ln() - kf * at.chi,
            Kind::Explicit { ln_values, .. } => match ln_values.get(k - 1) {
                Some(&lv) if lv > f64::NEG_INFINITY => lv + kf * at.ln_r,
                _ => f64::NEG_INFINITY,
            },
        }
    }

    /// First index with a positive weight.
    pub fn first_positive(&self) -> usize {
        self.m
    }

    /// Radius of convergence; `None` for polynomial weights without a declared radius.
    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    pub fn alpha(&self) -> Option<f64> {
        match &self.kind {
            Kind::Power { alpha, .. } => Some(*alpha),
            Kind::Explicit { alpha, .. } => *alpha,
        }
    }

    /// The slowly varying factor, for power-law weights only.
    pub fn slow_factor(&self) -> Option<SlowFactor> {
        match &self.kind {
            Kind::Power { h, .. } => Some(*h),
            Kind::Explicit { .. } => None,
        }
    }

    pub fn is_power_law(&self) -> bool {
        matches!(self.kind, Kind::Power { .. })
    }

    /// Number of stored weights for explicit sequences.
    pub fn support_len(&self) -> Option<usize> {
        match &self.kind {
            Kind::Power { .. } => None,
            Kind::Explicit { ln_values, .. } => Some(ln_values.len()),
        }
    }

    /// `ln` of the base point used for `chi`: `ln rho`, or 0 without a radius.
    pub fn ln_base(&self) -> f64 {
        self.rho.map_or(0.0, f64::ln)
    }

    pub fn radius_from_chi(&self, chi: f64) -> Radius {
        Radius { ln_r: self.ln_base() - chi, chi }
    }

    pub fn radius_from_r(&self, r: f64) -> Radius {
        let ln_r = r.ln();
        Radius { ln_r, chi: self.ln_base() - ln_r }
    }

    /// The point `r^j`, keeping `chi` exact when `rho = 1`.
    pub fn radius_pow(&self, at: Radius, j: usize) -> Radius {
        let jf = j as f64;
        let base = self.ln_base();
        Radius { ln_r: jf * at.ln_r, chi: jf * at.chi - (jf - 1.0) * base }
    }

    pub fn spec(&self) -> WeightSpec {
        match &self.kind {
            Kind::Power { alpha, h } => WeightSpec::Power { alpha: *alpha, rho: self.rho.unwrap(), h: *h },
            Kind::Explicit { ln_values, alpha } => WeightSpec::Explicit {
                values: ln_values.iter().map(|v| v.exp()).collect(),
                rho: self.rho,
                alpha: *alpha,
            },
        }
    }
}

/// Per-index outcome of [`verify_oscillating_bounds`].
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub k: usize,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub checks: Vec<BoundCheck>,
    pub pass: bool,
}

/// Checks `A1 k^(a1-1) rho^-k <= c_k <= A2 k^(a2-1) rho^-k` for `k` in `[k_min, k_max]`.
///
/// Comparison is done in log-space with a few ulps of slack so that a
/// power-law family sits inside its own degenerate envelope.
pub fn verify_oscillating_bounds(
    w: &WeightSequence,
    alpha1: f64,
    alpha2: f64,
    a1: f64,
    a2: f64,
    k_min: usize,
    k_max: usize,
) -> Result<BoundsReport> {
    if !(alpha1 > 0.0 && alpha1 <= alpha2) {
        return invalid(format!("need 0 < alpha1 <= alpha2, got {alpha1}, {alpha2}"));
    }
    if !(a1 > 0.0 && a1 <= a2) {
        return invalid(format!("need 0 < A1 <= A2, got {a1}, {a2}"));
    }
    if k_min < 1 || k_min > k_max {
        return invalid(format!("bad index range [{k_min}, {k_max}]"));
    }
    let ln_rho = w.ln_base();
    let checks: Vec<BoundCheck> = (k_min..=k_max)
        .map(|k| {
            let kf = k as f64;
            let lo = a1.ln() + (alpha1 - 1.0) * kf.ln() - kf * ln_rho;
            let hi = a2.ln() + (alpha2 - 1.0) * kf.ln() - kf * ln_rho;
            let v = w.ln_weight(k);
            let slack = 8.0 * f64::EPSILON * (1.0 + lo.abs().max(hi.abs()));
            BoundCheck { k, lower: lo.exp(), value: v.exp(), upper: hi.exp(), pass: lo <= v + slack && v <= hi + slack }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(BoundsReport { checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_examples() {
        let w = WeightSequence::partitions();
        assert_eq!(w.weight_at(7), 1.0);
        let w = make_power_weights(2.0, 1.0, SlowFactor::default()).unwrap();
        assert!((w.weight_at(3) - 3.0).abs() < 1e-14);
        let w = make_power_weights(1.0, 0.5, SlowFactor::default()).unwrap();
        assert!((w.weight_at(4) - 16.0).abs() < 1e-12);
        let w = make_power_weights(0.5, 1.0, SlowFactor::default()).unwrap();
        assert!((w.weight_at(4) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_power_weights(0.0, 1.0, SlowFactor::default()).is_err());
        assert!(make_power_weights(1.0, 1.5, SlowFactor::default()).is_err());
        assert!(make_power_weights(1.0, 0.0, SlowFactor::default()).is_err());
        assert!(make_explicit_weights(&[0.0, 0.0], None, None).is_err());
        assert!(make_explicit_weights(&[1.0, -1.0], None, None).is_err());
    }

    #[test]
    fn explicit_leading_zeros() {
        let w = make_explicit_weights(&[0.0, 0.0, 5.0], None, None).unwrap();
        assert_eq!(w.weight_at(2), 0.0);
        assert_eq!(w.first_positive(), 3);
        assert_eq!(w.weight_at(10), 0.0);
    }

    #[test]
    fn log_power_h_at_one_equals_h_at_two() {
        let h = SlowFactor::LogPower { p: 2.0 };
        assert_eq!(h.eval(1.0), h.eval(2.0));
        assert!((h.eval(100.0) - 100f64.ln().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn bounds_examples() {
        let p = WeightSequence::partitions();
        assert!(verify_oscillating_bounds(&p, 0.9, 1.1, 0.5, 2.0, 1, 100).unwrap().pass);
        let lin = make_power_weights(2.0, 1.0, SlowFactor::default()).unwrap();
        assert!(verify_oscillating_bounds(&lin, 1.5, 2.5, 0.5, 2.0, 2, 100).unwrap().pass);
        let rep = verify_oscillating_bounds(&p, 2.0, 3.0, 1.0, 1.0, 2, 10).unwrap();
        assert!(!rep.pass);
        assert!(!rep.checks[0].pass);
        assert!(verify_oscillating_bounds(&p, 2.0, 1.0, 1.0, 1.0, 1, 10).is_err());
        assert!(verify_oscillating_bounds(&p, 1.0, 1.0, 0.0, 1.0, 1, 10).is_err());
    }

    #[test]
    fn spec_round_trip_through_json() {
        let s: WeightSpec =
            serde_json::from_str(r#"{"kind":"power","alpha":1.0,"rho":1.0,"h":{"type":"const","c":1.0}}"#).unwrap();
        assert_eq!(s.build().unwrap(), WeightSequence::partitions());
        let s: WeightSpec = serde_json::from_str(r#"{"kind":"explicit","values":[0,2],"rho":0.5}"#).unwrap();
        let w = s.build().unwrap();
        assert_eq!(w.first_positive(), 2);
        assert_eq!(w.rho(), Some(0.5));
        let s: WeightSpec = serde_json::from_str(r#"{"kind":"power","alpha":1.5,"rho":1.0,"h":{"type":"log_power","p":1}}"#).unwrap();
        assert!(s.build().unwrap().slow_factor().is_some());
    }
}
