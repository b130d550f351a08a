//! Exact random generation of cluster structures.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Geometric, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::logspace::LOG_ZERO;
use crate::saddle::{solve_multiset_saddle, solve_set_saddle};
use crate::series::{ln_size_factor, restricted_rows, ClusterStructure, Model};
use crate::weights::{Radius, WeightSequence};

/// Default size limit of the DP sampler.
pub const DP_BUDGET: usize = 2000;
/// Predicted acceptance rate below which [`Sampler::auto`] switches to the DP sampler.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub model: Model,
    pub n: usize,
    /// Boltzmann parameter; the matching saddle when `None`.
    #[serde(default)]
    pub tuning_radius: Option<f64>,
    #[serde(default = "default_rejections")]
    pub max_rejections: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_rejections() -> u64 {
    10_000_000
}

impl SamplerConfig {
    pub fn new(model: Model, n: usize) -> Self {
        SamplerConfig { model, n, tuning_radius: None, max_rejections: default_rejections(), seed: 0 }
    }
}

/// Random stream for replicate `index`: a ChaCha8 generator keyed by `seed`
/// on stream `index`.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `(kappa, smallest, largest)` of a structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub kappa: u64,
    pub smallest: usize,
    pub largest: usize,
}

pub fn statistics(cs: &ClusterStructure) -> Stats {
    Stats { kappa: cs.kappa(), smallest: cs.smallest(), largest: cs.largest() }
}

enum SizeLaw {
    Zero,
    Poisson(Poisson<f64>),
    Geometrics { count: u32, geo: Geometric },
    GammaPoisson(Gamma<f64>),
}

impl SizeLaw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            SizeLaw::Zero => 0,
            SizeLaw::Poisson(p) => p.sample(rng) as u64,
            SizeLaw::Geometrics { count, geo } => (0..*count).map(|_| geo.sample(rng)).sum(),
            SizeLaw::GammaPoisson(g) => {
                let lambda = g.sample(rng);
                if lambda > 0.0 {
                    Poisson::new(lambda).map_or(0, |p| p.sample(rng) as u64)
                } else {
                    0
                }
            }
        }
    }
}

/// Boltzmann sampler conditioned on total size by rejection.
pub struct BoltzmannSampler {
    n: usize,
    laws: Vec<SizeLaw>,
    max_rejections: u64,
    radius: Radius,
    predicted_acceptance: f64,
}

/// An accepted structure and the number of attempts it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub structure: ClusterStructure,
    pub attempts: u64,
}

impl BoltzmannSampler {
    pub fn new(w: &WeightSequence, cfg: &SamplerConfig) -> Result<Self> {
        if cfg.n == 0 {
            return invalid("n must be at least 1");
        }
        if cfg.max_rejections == 0 {
            return invalid("max_rejections must be at least 1");
        }
        let (radius, b) = match cfg.tuning_radius {
            Some(r) => {
                if !(r > 0.0) || w.rho().is_some_and(|rho| r >= rho) || (cfg.model == Model::Multiset && r >= 1.0) {
                    return invalid(format!("tuning radius {r} lies outside the domain"));
                }
                (w.radius_from_r(r), f64::NAN)
            }
            None => {
                let sp = match cfg.model {
                    Model::Set => solve_set_saddle(w, cfg.n as f64)?,
                    Model::Multiset => solve_multiset_saddle(w, cfg.n as f64)?,
                };
                (sp.radius(), sp.b_val)
            }
        };
        let mut laws = Vec::with_capacity(cfg.n);
        for k in 1..=cfg.n {
            let lc = w.ln_weight(k);
            if lc == LOG_ZERO {
                laws.push(SizeLaw::Zero);
                continue;
            }
            let law = match cfg.model {
                Model::Set => {
                    let lambda = w.ln_term(k, radius).exp();
                    if lambda > 0.0 {
                        SizeLaw::Poisson(Poisson::new(lambda).map_err(|e| Error::InvalidParameter(e.to_string()))?)
                    } else {
                        SizeLaw::Zero
                    }
                }
                Model::Multiset => {
                    let ln_p = k as f64 * radius.ln_r;
                    let q = -ln_p.exp_m1();
                    let c = lc.exp();
                    if c == c.round() && c <= 32.0 {
                        let geo = Geometric::new(q).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                        SizeLaw::Geometrics { count: c as u32, geo }
                    } else {
                        let scale = (ln_p - q.ln()).exp();
                        SizeLaw::GammaPoisson(Gamma::new(c, scale).map_err(|e| Error::InvalidParameter(e.to_string()))?)
                    }
                }
            };
            laws.push(law);
        }
        let predicted_acceptance = 1.0 / (2.0 * std::f64::consts::PI * b).sqrt();
        Ok(BoltzmannSampler { n: cfg.n, laws, max_rejections: cfg.max_rejections, radius, predicted_acceptance })
    }

    /// Radius the sampler is tuned to.
    pub fn radius(&self) -> Radius {
        self.radius
    }

    /// `1/sqrt(2 pi b)` at the saddle, NaN for a user-supplied radius.
    pub fn predicted_acceptance(&self) -> f64 {
        self.predicted_acceptance
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Draw> {
        let n = self.n as u64;
        let mut counts = vec![0u64; self.n];
        for attempt in 1..=self.max_rejections {
            let mut total = 0u64;
            let mut ok = true;
            for (i, law) in self.laws.iter().enumerate() {
                let m = law.draw(rng);
                counts[i] = m;
                total += (i as u64 + 1) * m;
                if total > n {
                    ok = false;
                    break;
                }
            }
            if ok && total == n {
                let cs = ClusterStructure { n: self.n, counts };
                debug_assert_eq!(cs.size(), n);
                return Ok(Draw { structure: cs, attempts: attempt });
            }
        }
        Err(Error::RejectionBudgetExhausted { attempts: self.max_rejections })
    }
}

pub fn boltzmann_sample_set<R: Rng + ?Sized>(w: &WeightSequence, cfg: &SamplerConfig, rng: &mut R) -> Result<ClusterStructure> {
    if cfg.model != Model::Set {
        return invalid("boltzmann_sample_set needs the set model");
    }
    Ok(BoltzmannSampler::new(w, cfg)?.sample(rng)?.structure)
}

pub fn boltzmann_sample_multiset<R: Rng + ?Sized>(
    w: &WeightSequence,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<ClusterStructure> {
    if cfg.model != Model::Multiset {
        return invalid("boltzmann_sample_multiset needs the multiset model");
    }
    Ok(BoltzmannSampler::new(w, cfg)?.sample(rng)?.structure)
}

/// Exact sampler descending through cluster sizes with the restricted
/// partition-function table `W(i, s)`.
pub struct ExactSampler {
    n: usize,
    rows: Vec<Vec<f64>>,
    factors: Vec<Vec<f64>>,
}

impl ExactSampler {
    pub fn new(w: &WeightSequence, n: usize, model: Model) -> Result<Self> {
        Self::with_budget(w, n, model, DP_BUDGET)
    }

    pub fn with_budget(w: &WeightSequence, n: usize, model: Model, budget: usize) -> Result<Self> {
        if n > budget {
            return Err(Error::BudgetExceeded { n, budget });
        }
        if n == 0 {
            return invalid("n must be at least 1");
        }
        let rows = restricted_rows(w, n, model);
        if rows[n][n] == LOG_ZERO {
            return invalid(format!("Omega_{n} carries no weight"));
        }
        let factors = (0..=n).map(|s| if s == 0 { vec![0.0] } else { ln_size_factor(w, s, n / s, model) }).collect();
        Ok(ExactSampler { n, rows, factors })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ClusterStructure {
        let mut counts = vec![0u64; self.n];
        let mut rem = self.n;
        for s in (1..=self.n).rev() {
            if rem == 0 {
                break;
            }
            let prev = &self.rows[s - 1];
            let f = &self.factors[s];
            let lw: Vec<f64> = (0..=rem / s).map(|m| f[m] + prev[rem - s * m]).collect();
            let top = lw.iter().copied().fold(LOG_ZERO, f64::max);
            let m = if lw.len() == 1 {
                0
            } else {
                let weights: Vec<f64> = lw.iter().map(|v| (v - top).exp()).collect();
                WeightedIndex::new(&weights).expect("positive total weight").sample(rng)
            };
            counts[s - 1] = m as u64;
            rem -= s * m;
        }
        let cs = ClusterStructure { n: self.n, counts };
        debug_assert_eq!(cs.size(), self.n as u64);
        cs
    }
}

pub fn exact_dp_sampler<R: Rng + ?Sized>(w: &WeightSequence, n: usize, model: Model, rng: &mut R) -> Result<ClusterStructure> {
    Ok(ExactSampler::new(w, n, model)?.sample(rng))
}

/// Sampling back end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Boltzmann,
    Dp,
    /// Boltzmann unless the predicted acceptance rate is below [`MIN_ACCEPTANCE`].
    Auto,
}

/// A prepared sampler of either kind.
pub enum Sampler {
    Boltzmann(BoltzmannSampler),
    Exact(ExactSampler),
}

impl Sampler {
    pub fn build(w: &WeightSequence, cfg: &SamplerConfig, method: Method) -> Result<Self> {
        match method {
            Method::Boltzmann => Ok(Sampler::Boltzmann(BoltzmannSampler::new(w, cfg)?)),
            Method::Dp => Ok(Sampler::Exact(ExactSampler::new(w, cfg.n, cfg.model)?)),
            Method::Auto => {
                let b = BoltzmannSampler::new(w, cfg)?;
                if b.predicted_acceptance() < MIN_ACCEPTANCE {
                    Ok(Sampler::Exact(ExactSampler::new(w, cfg.n, cfg.model)?))
                } else {
                    Ok(Sampler::Boltzmann(b))
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ClusterStructure> {
        match self {
            Sampler::Boltzmann(b) => Ok(b.sample(rng)?.structure),
            Sampler::Exact(e) => Ok(e.sample(rng)),
        }
    }
}

/// Draws `count` independent structures; replicate `i` uses `rng_for(seed, i)`.
pub fn sample_replicates(sampler: &Sampler, seed: u64, count: usize) -> Result<Vec<Stats>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            sampler.sample(&mut rng).map(|cs| statistics(&cs))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::make_explicit_weights;

    #[test]
    fn stats_examples() {
        let s = |v: Vec<u64>| statistics(&ClusterStructure::new(v).unwrap());
        assert_eq!(s(vec![3, 0, 0]), Stats { kappa: 3, smallest: 1, largest: 1 });
        assert_eq!(s(vec![1, 1, 0]), Stats { kappa: 2, smallest: 1, largest: 2 });
        assert_eq!(s(vec![0, 0, 1]), Stats { kappa: 1, smallest: 3, largest: 3 });
    }

    #[test]
    fn single_atom_is_deterministic() {
        let w = make_explicit_weights(&[1.0], None, None).unwrap();
        let cfg = SamplerConfig::new(Model::Set, 5);
        let mut rng = rng_for(1, 0);
        for _ in 0..20 {
            let cs = boltzmann_sample_set(&w, &cfg, &mut rng).unwrap();
            assert_eq!(cs.counts, vec![5, 0, 0, 0, 0]);
        }
        let w = make_explicit_weights(&[0.0, 0.0, 1.0], None, None).unwrap();
        let cs = exact_dp_sampler(&w, 9, Model::Multiset, &mut rng).unwrap();
        assert_eq!(cs.counts[2], 3);
    }

    #[test]
    fn parity_obstruction_exhausts_budget() {
        let w = make_explicit_weights(&[0.0, 1.0], None, None).unwrap();
        let cfg = SamplerConfig { tuning_radius: Some(0.5), max_rejections: 1000, ..SamplerConfig::new(Model::Multiset, 7) };
        let err = boltzmann_sample_multiset(&w, &cfg, &mut rng_for(3, 0)).unwrap_err();
        assert!(matches!(err, Error::RejectionBudgetExhausted { attempts: 1000 }));
        assert!(ExactSampler::new(&w, 7, Model::Multiset).is_err());
    }

    #[test]
    fn config_validation() {
        let p = WeightSequence::partitions();
        let bad = SamplerConfig { tuning_radius: Some(1.0), ..SamplerConfig::new(Model::Set, 5) };
        assert!(BoltzmannSampler::new(&p, &bad).is_err());
        let bad = SamplerConfig { max_rejections: 0, ..SamplerConfig::new(Model::Set, 5) };
        assert!(BoltzmannSampler::new(&p, &bad).is_err());
        assert!(matches!(ExactSampler::new(&p, 2001, Model::Set), Err(Error::BudgetExceeded { .. })));
        assert!(boltzmann_sample_set(&p, &SamplerConfig::new(Model::Multiset, 5), &mut rng_for(0, 0)).is_err());
    }

    #[test]
    fn streams_are_reproducible() {
        let p = WeightSequence::partitions();
        let s = Sampler::build(&p, &SamplerConfig::new(Model::Multiset, 30), Method::Boltzmann).unwrap();
        let a = sample_replicates(&s, 42, 50).unwrap();
        let b = sample_replicates(&s, 42, 50).unwrap();
        assert_eq!(a, b);
        let c = sample_replicates(&s, 43, 50).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn partitions_of_four_largest_part() {
        let p = WeightSequence::partitions();
        let s = Sampler::build(&p, &SamplerConfig::new(Model::Multiset, 4), Method::Boltzmann).unwrap();
        let draws = sample_replicates(&s, 7, 20_000).unwrap();
        let frac = draws.iter().filter(|d| d.largest == 4).count() as f64 / 20_000.0;
        assert!((frac - 0.2).abs() < 4.0 * (0.2 * 0.8 / 20_000f64).sqrt());
    }
}
