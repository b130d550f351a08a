//! Cluster structures and brute-force sums over `Omega_n`.

use serde::{Deserialize, Serialize};

use super::Model;
use crate::error::{Error, Result};
use crate::logspace::{LnAcc, LOG_ZERO};
use crate::special::ln_gamma;
use crate::weights::WeightSequence;

/// Largest `n` accepted by the brute-force enumeration.
pub const OMEGA_LIMIT: usize = 30;

/// A vector `(N_1, ..., N_n)` of cluster counts with `sum k N_k = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClusterStructure {
    pub n: usize,
    /// `counts[k - 1] = N_k`.
    pub counts: Vec<u64>,
}

impl ClusterStructure {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let n = counts.len();
        let s = total_size(&counts);
        if s != n as u64 {
            return Err(Error::ContractViolation(format!("structure has size {s}, expected {n}")));
        }
        Ok(ClusterStructure { n, counts })
    }

    pub fn size(&self) -> u64 {
        total_size(&self.counts)
    }

    /// Number of clusters.
    pub fn kappa(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Smallest cluster size (0 for the empty structure).
    pub fn smallest(&self) -> usize {
        self.counts.iter().position(|&c| c > 0).map_or(0, |i| i + 1)
    }

    /// Largest cluster size (0 for the empty structure).
    pub fn largest(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0).map_or(0, |i| i + 1)
    }
}

fn total_size(counts: &[u64]) -> u64 {
    counts.iter().enumerate().map(|(i, &c)| (i as u64 + 1) * c).sum()
}

/// `ln prod_k c_k^{N_k}/N_k!` (set) or `ln prod_k binom(c_k + N_k - 1, N_k)` (multiset).
pub fn ln_structure_weight(w: &WeightSequence, cs: &ClusterStructure, model: Model) -> f64 {
    let mut total = 0.0;
    for (i, &m) in cs.counts.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let lc = w.ln_weight(i + 1);
        if lc == LOG_ZERO {
            return LOG_ZERO;
        }
        total += match model {
            Model::Set => m as f64 * lc - ln_gamma(m as f64 + 1.0),
            Model::Multiset => ln_rising(lc, m) - ln_gamma(m as f64 + 1.0),
        };
    }
    total
}

/// `ln (c (c+1) ... (c+m-1))` given `ln c`, stable for huge `c`.
pub(crate) fn ln_rising(ln_c: f64, m: u64) -> f64 {
    let inv_c = (-ln_c).exp();
    (0..m).map(|i| ln_c + (i as f64 * inv_c).ln_1p()).sum()
}

/// Visits every structure in `Omega_n`, iterating integer partitions of `n`
/// in reverse lexicographic order.
pub fn for_each_structure(n: usize, mut f: impl FnMut(&ClusterStructure)) -> Result<()> {
    if n > OMEGA_LIMIT {
        return Err(Error::SizeLimitExceeded { n, limit: OMEGA_LIMIT });
    }
    if n == 0 {
        f(&ClusterStructure { n: 0, counts: vec![] });
        return Ok(());
    }
    let mut parts = vec![n];
    let mut cs = ClusterStructure { n, counts: vec![0; n] };
    loop {
        cs.counts.iter_mut().for_each(|c| *c = 0);
        for &p in &parts {
            cs.counts[p - 1] += 1;
        }
        f(&cs);
        // next partition: strip trailing ones, decrement the last part > 1, refill
        let mut ones = 0;
        while parts.last() == Some(&1) {
            parts.pop();
            ones += 1;
        }
        let Some(last) = parts.pop() else { break };
        let q = last - 1;
        let mut rem = ones + 1;
        parts.push(q);
        while rem > 0 {
            let take = rem.min(q);
            parts.push(take);
            rem -= take;
        }
    }
    Ok(())
}

/// `ln sum_{Omega_n}` of the structure weights: `ln(s_n / n!)` or `ln g_n`.
pub fn brute_force_omega_sum(w: &WeightSequence, n: usize, model: Model) -> Result<f64> {
    let mut acc = LnAcc::new();
    for_each_structure(n, |cs| acc.push(ln_structure_weight(w, cs, model)))?;
    Ok(if n == 0 { 0.0 } else { acc.value() })
}
