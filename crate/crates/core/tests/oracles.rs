//! Exact engines checked against independent closed forms and enumeration.

use std::collections::HashMap;

use num_bigint::BigUint;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use clusterkit::asymptotics::{em_direct_sum, euler_maclaurin_sum_asympt, karamata_rhs, Regime};
use clusterkit::sampling::{rng_for, statistics, BoltzmannSampler, ExactSampler, SamplerConfig};
use clusterkit::series::{
    bivariate_multiset_coeffs, bivariate_set_coeffs, exact_distribution, full_series, kappa_table, Statistic,
};
use clusterkit::special::ln_gamma;
use clusterkit::{Model, SlowFactor, WeightSequence, WeightSpec};

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_string().parse::<f64>().unwrap().ln();
    }
    let shift = bits - 900;
    let top: BigUint = x >> shift;
    top.to_string().parse::<f64>().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `sum_k n!/k! * C(n-1, k-1)` in exact integers.
fn sets_of_lists(n: u32) -> BigUint {
    let fact = |m: u32| (1..=m).fold(BigUint::from(1u32), |a, i| a * i);
    let binom = |a: u32, b: u32| fact(a) / (fact(b) * fact(a - b));
    (1..=n).map(|k| fact(n) / fact(k) * binom(n - 1, k - 1)).sum()
}

#[test]
fn sets_of_lists_match_integer_formula() {
    let w = WeightSequence::partitions();
    let s = full_series(&w, 150, Model::Set);
    for n in [1u32, 2, 3, 10, 50, 150] {
        let exact = ln_big(&sets_of_lists(n)) - ln_gamma(n as f64 + 1.0);
        let got = s.coeff(n as usize).unwrap();
        assert!((got - exact).abs() < 1e-11 * exact.abs().max(1.0), "n = {n}: {got} vs {exact}");
    }
}

#[test]
fn bivariate_closed_form_and_marginal() {
    let w = WeightSequence::partitions();
    let n = 120;
    let row = bivariate_set_coeffs(&w, n, n).unwrap();
    for big_n in [1usize, 5, 11, 60, 120] {
        let closed = ln_gamma(n as f64) - ln_gamma(big_n as f64) - ln_gamma((n - big_n + 1) as f64) - ln_gamma(big_n as f64 + 1.0);
        assert!((row[big_n] - closed).abs() < 1e-10, "N = {big_n}");
    }
    let total = clusterkit::logspace::ln_sum(&row);
    assert!((total - full_series(&w, n, Model::Set).coeff(n).unwrap()).abs() < 1e-11);
    assert!(bivariate_set_coeffs(&w, 10, 11).is_err());
}

#[test]
fn multiset_kappa_rows_sum_to_partition_numbers() {
    // p(n, N): partitions of n into exactly N parts, by the recurrence p(n,N) = p(n-1,N-1) + p(n-N,N)
    let n = 60;
    let mut p = vec![vec![0f64; n + 1]; n + 1];
    p[0][0] = 1.0;
    for m in 1..=n {
        for k in 1..=m {
            p[m][k] = p[m - 1][k - 1] + p[m - k][k];
        }
    }
    let w = WeightSequence::partitions();
    let row = bivariate_multiset_coeffs(&w, n, n).unwrap();
    for k in 1..=n {
        assert!((row[k] - p[n][k].ln()).abs() < 1e-11, "N = {k}");
    }
    assert_eq!(row[0], f64::NEG_INFINITY);
    assert_eq!(kappa_table(&w, n, Model::Multiset), row);
}

#[test]
fn distribution_tables_are_valid_laws() {
    let specs = [WeightSpec::Power { alpha: 1.0, rho: 1.0, h: SlowFactor::default() }, WeightSpec::Power { alpha: 1.5, rho: 0.5, h: SlowFactor::default() }];
    for spec in specs {
        let w = spec.build().unwrap();
        for model in [Model::Set, Model::Multiset] {
            let n = 80;
            let pmf = exact_distribution(&w, n, Statistic::Kappa, model).unwrap().values();
            assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let cdf = exact_distribution(&w, n, Statistic::Largest, model).unwrap().values();
            assert!(cdf.windows(2).all(|p| p[1] >= p[0] - 1e-15));
            assert!((cdf[n] - 1.0).abs() < 1e-12 && cdf[0] == 0.0);
            let surv = exact_distribution(&w, n, Statistic::Smallest, model).unwrap().values();
            assert!(surv.windows(2).all(|p| p[1] <= p[0] + 1e-15));
            assert!((surv[0] - 1.0).abs() < 1e-12 && surv[n] == 0.0);
        }
    }
}

#[test]
fn sum_lemma_examples() {
    let p = euler_maclaurin_sum_asympt(2.0, 0.0, 0.01).unwrap();
    assert_eq!(p.regime, Regime::Zeta);
    assert!((p.value - 16449.34).abs() < 0.01);
    assert!((em_direct_sum(2.0, 0.0, 0.01) / p.value - 1.0).abs() < 0.02);

    let p = euler_maclaurin_sum_asympt(0.0, 1.0, 0.01).unwrap();
    assert_eq!(p.regime, Regime::Integral);
    assert!((p.value - 1e4).abs() < 1e-6);
    let closed = (-0.01f64).exp() / (1.0 - (-0.01f64).exp()).powi(2);
    assert!((closed / p.value - 1.0).abs() < 0.02);
    assert!((em_direct_sum(0.0, 1.0, 0.01) / closed - 1.0).abs() < 1e-10);

    assert_eq!(euler_maclaurin_sum_asympt(1.0, 0.0, 0.01).unwrap().regime, Regime::Log);

    let w = WeightSequence::partitions();
    let geometric = (-0.01f64).exp() / (1.0 - (-0.01f64).exp());
    assert!((geometric - 99.50).abs() < 0.01);
    assert!((karamata_rhs(&w, 0.01).unwrap() / geometric - 1.0).abs() < 0.006);
}

fn chi_square_p(counts: &HashMap<Vec<u64>, u64>, law: &[(Vec<u64>, f64)], total: u64) -> f64 {
    let mut stat = 0.0;
    for (key, p) in law {
        let e = p * total as f64;
        let o = *counts.get(key).unwrap_or(&0) as f64;
        stat += (o - e).powi(2) / e;
    }
    1.0 - ChiSquared::new((law.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn boltzmann_set_three_matches_exact_law() {
    let w = WeightSequence::partitions();
    let sampler = BoltzmannSampler::new(&w, &SamplerConfig::new(Model::Set, 3)).unwrap();
    let law = vec![(vec![3, 0, 0], 1.0 / 13.0), (vec![1, 1, 0], 6.0 / 13.0), (vec![0, 0, 1], 6.0 / 13.0)];
    let mut counts = HashMap::new();
    let total = 100_000;
    for i in 0..total {
        *counts.entry(sampler.sample(&mut rng_for(5, i)).unwrap().structure.counts).or_insert(0) += 1;
    }
    assert!(chi_square_p(&counts, &law, total) > 1e-4);
    let kappa_one = counts[&vec![0, 0, 1]] as f64 / total as f64;
    let sd = (6.0 / 13.0 * 7.0 / 13.0 / total as f64).sqrt();
    assert!((kappa_one - 6.0 / 13.0).abs() < 3.0 * sd);
}

#[test]
fn dp_sampler_partitions_of_three_uniform() {
    let w = WeightSequence::partitions();
    let sampler = ExactSampler::new(&w, 3, Model::Multiset).unwrap();
    let law = vec![(vec![3, 0, 0], 1.0 / 3.0), (vec![1, 1, 0], 1.0 / 3.0), (vec![0, 0, 1], 1.0 / 3.0)];
    let mut counts = HashMap::new();
    let total = 100_000;
    for i in 0..total {
        *counts.entry(sampler.sample(&mut rng_for(9, i)).counts).or_insert(0) += 1;
    }
    assert!(chi_square_p(&counts, &law, total) > 1e-4);
}

#[test]
fn dp_sampler_kappa_total_variation() {
    let w = WeightSequence::partitions();
    let n = 8;
    let exact = exact_distribution(&w, n, Statistic::Kappa, Model::Set).unwrap().values();
    let sampler = ExactSampler::new(&w, n, Model::Set).unwrap();
    let total = 100_000u64;
    let mut hist = vec![0u64; n + 1];
    for i in 0..total {
        hist[statistics(&sampler.sample(&mut rng_for(21, i))).kappa as usize] += 1;
    }
    let tv: f64 = hist.iter().zip(&exact).map(|(&h, &p)| (h as f64 / total as f64 - p).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.01, "{tv}");
}

#[test]
fn boltzmann_and_dp_agree_on_kappa_at_fifty() {
    let w = WeightSequence::partitions();
    let n = 50;
    let boltz = BoltzmannSampler::new(&w, &SamplerConfig::new(Model::Multiset, n)).unwrap();
    let dp = ExactSampler::new(&w, n, Model::Multiset).unwrap();
    let total = 100_000u64;
    let (mut a, mut b) = (vec![0f64; n + 1], vec![0f64; n + 1]);
    for i in 0..total {
        a[statistics(&boltz.sample(&mut rng_for(1, i)).unwrap().structure).kappa as usize] += 1.0;
        b[statistics(&dp.sample(&mut rng_for(2, i))).kappa as usize] += 1.0;
    }
    // two-sample chi-square on pooled cells with at least 10 observations
    let (mut stat, mut cells, mut ra, mut rb) = (0.0, 0usize, 0.0, 0.0);
    for k in 0..=n {
        ra += a[k];
        rb += b[k];
        if ra + rb >= 10.0 {
            stat += (ra - rb).powi(2) / (ra + rb);
            cells += 1;
            ra = 0.0;
            rb = 0.0;
        }
    }
    let p = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
    assert!(p > 1e-4, "p = {p}");
}

#[test]
fn multiset_samplers_match_parts_count_law_at_five() {
    // partitions of 5 by number of parts: 1, 2, 2, 1, 1
    let w = WeightSequence::partitions();
    let boltz = BoltzmannSampler::new(&w, &SamplerConfig::new(Model::Multiset, 5)).unwrap();
    let total = 200_000u64;
    let mut hist = [0f64; 6];
    for i in 0..total {
        hist[statistics(&boltz.sample(&mut rng_for(4, i)).unwrap().structure).kappa as usize] += 1.0;
    }
    for (k, c) in [(1, 1.0), (2, 2.0), (3, 2.0), (4, 1.0), (5, 1.0)] {
        let p = c / 7.0;
        let sd = (p * (1.0 - p) / total as f64).sqrt();
        assert!((hist[k] / total as f64 - p).abs() < 4.0 * sd, "kappa = {k}");
    }
}
