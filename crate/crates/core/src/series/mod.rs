//! Exact truncated power series with non-negative coefficients kept in log-space.

mod omega;
mod tables;

pub use omega::{brute_force_omega_sum, for_each_structure, ln_structure_weight, ClusterStructure, OMEGA_LIMIT};
pub use tables::{
    bivariate_multiset_coeffs, bivariate_set_coeffs, exact_distribution, kappa_table, largest_cdf_ln, ln_size_factor,
    restricted_rows, smallest_survival_ln, DistributionTable, Statistic, TableKind,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{LnAcc, LOG_ZERO};
use crate::weights::WeightSequence;

/// Which combinatorial construction is applied to the clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Set,
    Multiset,
}

/// Size window for restricted series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// Only clusters of size `<= s`.
    MaxSize(usize),
    /// Only clusters of size `> s`.
    MinSizeAbove(usize),
}

impl Restriction {
    fn allows(&self, k: usize) -> bool {
        match *self {
            Restriction::MaxSize(s) => k <= s,
            Restriction::MinSizeAbove(s) => k > s,
        }
    }
}

/// Sizes above which convolution loops are split across threads.
const PAR_THRESHOLD: usize = 256;

/// A power series truncated at order `K`, coefficients stored as `ln c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSeries {
    ln: Vec<f64>,
}

impl LogSeries {
    /// The zero series of order `k`.
    pub fn zero(k: usize) -> Self {
        LogSeries { ln: vec![LOG_ZERO; k + 1] }
    }

    /// The constant series 1 of order `k`.
    pub fn one(k: usize) -> Self {
        let mut s = Self::zero(k);
        s.ln[0] = 0.0;
        s
    }

    pub fn from_ln(ln: Vec<f64>) -> Result<Self> {
        if ln.is_empty() {
            return Err(Error::ContractViolation("a series needs at least a constant term".into()));
        }
        if ln.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::ContractViolation("coefficients must be finite or the zero sentinel".into()));
        }
        Ok(LogSeries { ln })
    }

    pub fn from_linear(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::ContractViolation("negative coefficient".into()));
        }
        Self::from_ln(values.iter().map(|v| v.ln()).collect())
    }

    pub fn order(&self) -> usize {
        self.ln.len() - 1
    }

    /// `ln [x^n]`, or `-inf` for a zero coefficient.
    pub fn coeff(&self, n: usize) -> Result<f64> {
        self.ln.get(n).copied().ok_or(Error::OutOfRange { index: n, order: self.order() })
    }

    pub fn ln_coeffs(&self) -> &[f64] {
        &self.ln
    }

    pub fn linear(&self) -> Vec<f64> {
        self.ln.iter().map(|x| x.exp()).collect()
    }

    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.order());
        LogSeries { ln: self.ln[..=k].to_vec() }
    }

    /// Product truncated at the smaller of the two orders.
    pub fn mul(&self, other: &LogSeries) -> LogSeries {
        let k = self.order().min(other.order());
        let a = &self.ln;
        let b = &other.ln;
        let cell = |i: usize| {
            let mut acc = LnAcc::new();
            for j in 0..=i {
                if a[j] != LOG_ZERO && b[i - j] != LOG_ZERO {
                    acc.push(a[j] + b[i - j]);
                }
            }
            acc.value()
        };
        let ln = if k >= PAR_THRESHOLD { (0..=k).into_par_iter().map(cell).collect() } else { (0..=k).map(cell).collect() };
        LogSeries { ln }
    }

    /// Multiplication by the positive scalar `e^c`.
    pub fn scale_ln(&self, c: f64) -> LogSeries {
        LogSeries { ln: self.ln.iter().map(|x| x + c).collect() }
    }

    /// Writes `index,value_log,value` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        write_table_csv(out, &self.ln)
    }

    /// JSON array of `{index, value_log, value}` objects.
    pub fn to_json(&self) -> serde_json::Value {
        table_json(&self.ln)
    }
}

#[derive(Serialize)]
struct Row {
    index: usize,
    value_log: f64,
    value: f64,
}

pub(crate) fn write_table_csv<W: std::io::Write>(out: W, ln: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (index, &v) in ln.iter().enumerate() {
        w.serialize(Row { index, value_log: v, value: v.exp() })?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn table_json(ln: &[f64]) -> serde_json::Value {
    let rows: Vec<Row> = ln.iter().enumerate().map(|(index, &v)| Row { index, value_log: v, value: v.exp() }).collect();
    serde_json::to_value(rows).expect("rows serialize")
}

/// `C(x)` truncated at order `k`.
pub fn truncate_c(w: &WeightSequence, k: usize) -> LogSeries {
    let mut s = LogSeries::zero(k);
    for i in 1..=k {
        s.ln[i] = w.ln_weight(i);
    }
    s
}

/// `exp(A)` by the recurrence `n B_n = sum_k k A_k B_{n-k}`.
pub fn series_exp(a: &LogSeries) -> Result<LogSeries> {
    if a.ln[0] != LOG_ZERO {
        return Err(Error::ContractViolation("series_exp needs a zero constant term".into()));
    }
    let k = a.order();
    let mut b = LogSeries::zero(k);
    b.ln[0] = 0.0;
    // ln(k A_k), zero terms skipped
    let ka: Vec<(usize, f64)> =
        (1..=k).filter(|&i| a.ln[i] != LOG_ZERO).map(|i| (i, (i as f64).ln() + a.ln[i])).collect();
    for n in 1..=k {
        let mut acc = LnAcc::new();
        for &(i, v) in ka.iter().take_while(|(i, _)| *i <= n) {
            let bj = b.ln[n - i];
            if bj != LOG_ZERO {
                acc.push(v + bj);
            }
        }
        b.ln[n] = acc.value() - (n as f64).ln();
    }
    Ok(b)
}

/// Formal logarithm of a series with constant term 1.
///
/// Uses `n A_n = n B_n - sum_{k<n} k A_k B_{n-k}`; a result that is
/// negative beyond rounding is reported as a contract violation.
pub fn series_log(b: &LogSeries) -> Result<LogSeries> {
    if b.ln[0] != 0.0 {
        return Err(Error::ContractViolation("series_log needs constant term 1".into()));
    }
    let k = b.order();
    let mut a = LogSeries::zero(k);
    for n in 1..=k {
        let pos = if b.ln[n] == LOG_ZERO { LOG_ZERO } else { (n as f64).ln() + b.ln[n] };
        let mut neg = LnAcc::new();
        for i in 1..n {
            if a.ln[i] != LOG_ZERO && b.ln[n - i] != LOG_ZERO {
                neg.push((i as f64).ln() + a.ln[i] + b.ln[n - i]);
            }
        }
        let neg = neg.value();
        a.ln[n] = if neg == LOG_ZERO {
            pos - (n as f64).ln()
        } else {
            let d = neg - pos;
            if d > 1e-9 {
                return Err(Error::ContractViolation(format!("formal log has a negative coefficient at {n}")));
            }
            if d >= -1e-12 {
                LOG_ZERO
            } else {
                pos + (-d.exp()).ln_1p() - (n as f64).ln()
            }
        };
    }
    Ok(a)
}

/// Exponent series `sum_j (1/j) sum_{k in W, jk <= K} c_k x^{jk}` of a
/// (restricted) multiset construction.
pub fn multiset_exponent(w: &WeightSequence, k: usize, allow: impl Fn(usize) -> bool) -> LogSeries {
    let mut accs = vec![LnAcc::new(); k + 1];
    for size in 1..=k {
        if !allow(size) {
            continue;
        }
        let lc = w.ln_weight(size);
        if lc == LOG_ZERO {
            continue;
        }
        let mut j = 1;
        while j * size <= k {
            accs[j * size].push(lc - (j as f64).ln());
            j += 1;
        }
    }
    LogSeries { ln: accs.iter().map(|a| a.value()).collect() }
}

/// `G(x) = exp(sum_j C(x^j)/j)` truncated at order `k`.
pub fn euler_transform(w: &WeightSequence, k: usize) -> LogSeries {
    series_exp(&multiset_exponent(w, k, |_| true)).expect("exponent has zero constant term")
}

/// `S(x) = exp(C(x))` truncated at order `k`.
pub fn set_series(w: &WeightSequence, k: usize) -> LogSeries {
    series_exp(&truncate_c(w, k)).expect("C has zero constant term")
}

/// `S` or `G` depending on the model.
pub fn full_series(w: &WeightSequence, k: usize, model: Model) -> LogSeries {
    match model {
        Model::Set => set_series(w, k),
        Model::Multiset => euler_transform(w, k),
    }
}

/// Generating series of (multi)sets using only cluster sizes in the window.
pub fn restricted_series(w: &WeightSequence, k: usize, model: Model, restriction: Restriction) -> LogSeries {
    let exponent = match model {
        Model::Set => {
            let mut c = truncate_c(w, k);
            for i in 1..=k {
                if !restriction.allows(i) {
                    c.ln[i] = LOG_ZERO;
                }
            }
            c
        }
        Model::Multiset => multiset_exponent(w, k, |s| restriction.allows(s)),
    };
    series_exp(&exponent).expect("exponent has zero constant term")
}

/// The x-series `sum_j j^p C(x^j)` truncated at order `k`.
pub fn weighted_euler_sum(w: &WeightSequence, k: usize, p: u32) -> LogSeries {
    let mut accs = vec![LnAcc::new(); k + 1];
    for size in 1..=k {
        let lc = w.ln_weight(size);
        if lc == LOG_ZERO {
            continue;
        }
        let mut j = 1;
        while j * size <= k {
            accs[j * size].push(lc + p as f64 * (j as f64).ln());
            j += 1;
        }
    }
    LogSeries { ln: accs.iter().map(|a| a.value()).collect() }
}
