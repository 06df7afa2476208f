use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::chain::IterationRecord;
use crate::sampler::config::UnitPrior;

/// Posterior distributions of `K₁ = k₁ + k₀`, `K₂ = k₂ + k₀` and `K₁₂ = k₀`, indexed by count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentTable {
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub k12: Vec<f64>,
    pub map_k1: usize,
    pub map_k2: usize,
    pub map_k12: usize,
}

fn table(values: impl Iterator<Item = usize>, n: usize) -> (Vec<f64>, usize) {
    let mut counts: Vec<usize> = Vec::new();
    for v in values {
        if v >= counts.len() {
            counts.resize(v + 1, 0);
        }
        counts[v] += 1;
    }
    let map = counts
        .iter()
        .enumerate()
        .fold((0, 0), |best, (i, &c)| if c > best.1 { (i, c) } else { best })
        .0;
    (counts.into_iter().map(|c| c as f64 / n as f64).collect(), map)
}

pub fn component_summaries(records: &[IterationRecord]) -> Result<ComponentTable> {
    if records.is_empty() {
        return Err(Error::domain("no retained iterations"));
    }
    let n = records.len();
    let (k1, map_k1) = table(records.iter().map(|r| r.k1 + r.k0), n);
    let (k2, map_k2) = table(records.iter().map(|r| r.k2 + r.k0), n);
    let (k12, map_k12) = table(records.iter().map(|r| r.k0), n);
    Ok(ComponentTable {
        k1,
        k2,
        k12,
        map_k1,
        map_k2,
        map_k12,
    })
}

/// Prior probability `P(I = 1) = E[1 - σ]` under `κ`.
pub fn prior_homogeneity(kappa: &UnitPrior) -> f64 {
    1.0 - kappa.mean()
}

/// Bayes factor of `H₀: p̃₁ = p̃₂` against its complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesFactor {
    /// `+∞` when no retained iteration has `I = 0`.
    #[serde(with = "extended_float")]
    pub value: f64,
    /// Add-one smoothed version, always finite.
    pub smoothed: f64,
    /// `P(I = 1 | X)` estimated by the frequency of `I = 1`.
    pub posterior_homogeneity: f64,
    /// `P(I = 0) / P(I = 1)`.
    pub prior_odds: f64,
    pub homogeneous_count: usize,
    pub heterogeneous_count: usize,
}

pub fn bayes_factor(records: &[IterationRecord], kappa: &UnitPrior) -> Result<BayesFactor> {
    if records.is_empty() {
        return Err(Error::domain("Bayes factor needs at least one retained iteration"));
    }
    let c1 = records.iter().filter(|r| r.homogeneous).count();
    let c0 = records.len() - c1;
    let p1 = prior_homogeneity(kappa);
    let prior_odds = (1.0 - p1) / p1;
    let value = if c0 == 0 { f64::INFINITY } else { c1 as f64 / c0 as f64 * prior_odds };
    Ok(BayesFactor {
        value,
        smoothed: (c1 as f64 + 1.0) / (c0 as f64 + 1.0) * prior_odds,
        posterior_homogeneity: c1 as f64 / records.len() as f64,
        prior_odds,
        homogeneous_count: c1,
        heterogeneous_count: c0,
    })
}

/// Partial autocorrelations at lags `0..=max_lag` by the Durbin–Levinson recursion; lag 0 is 1.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= max_lag + 1 {
        return Err(Error::domain(format!("series of length {n} is too short for {max_lag} lags")));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let acov = |h: usize| (0..n - h).map(|t| (series[t] - mean) * (series[t + h] - mean)).sum::<f64>();
    let c0 = acov(0);
    if !(c0 > 0.0) {
        return Err(Error::Numerical("series has zero variance".into()));
    }
    let r: Vec<f64> = (0..=max_lag).map(|h| acov(h) / c0).collect();
    let mut out = vec![1.0];
    let mut phi: Vec<f64> = Vec::new();
    for k in 1..=max_lag {
        let num = r[k] - (1..k).map(|j| phi[j - 1] * r[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j - 1] * r[j]).sum::<f64>();
        let pkk = num / den;
        let prev = phi.clone();
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - pkk * prev[k - j - 1];
        }
        phi.push(pkk);
        out.push(pkk);
    }
    Ok(out)
}

mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", found {s}"))),
        }
    }
}
