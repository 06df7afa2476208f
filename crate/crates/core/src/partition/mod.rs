//! Two-sample partitions and their probability functions.

mod closed_form;
mod enumerate;
mod eppf;
mod lnp;

use serde::{Deserialize, Serialize};

use crate::crm::CrmSpec;
use crate::error::{Error, Result};

pub use closed_form::{
    ln_dirichlet_label_term, ln_labeled_joint_stable, ln_stable_label_term, peppf_lnp_dirichlet, peppf_lnp_stable,
};
pub use enumerate::{enumerate_labelings, enumerate_two_sample_partitions, MAX_ENUMERATION_SIZE};
pub(crate) use enumerate::restricted_growth_strings;
pub use eppf::{eppf_full, eppf_marginal, eppf_quadrature, ln_eppf};
pub use lnp::{lnp_general_terms, peppf_lnp_general, peppf_nested, peppf_nested_terms, LnpTerms, NestedTerms};

/// Which sample an idiosyncratic cluster belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sample {
    First,
    Second,
}

/// Cluster structure of two samples: idiosyncratic clusters of each sample, shared clusters,
/// and a binary label per cluster (`true` = idiosyncratic latent measure, `false` = shared measure).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPartition", into = "RawPartition")]
pub struct TwoSamplePartition {
    freq1: Vec<u32>,
    freq2: Vec<u32>,
    shared: Vec<(u32, u32)>,
    labels1: Vec<bool>,
    labels2: Vec<bool>,
    labels0: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPartition {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n1: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n2: Option<u32>,
    #[serde(default)]
    freq1: Vec<u32>,
    #[serde(default)]
    freq2: Vec<u32>,
    #[serde(default)]
    shared: Vec<(u32, u32)>,
    #[serde(default)]
    labels1: Option<Vec<bool>>,
    #[serde(default)]
    labels2: Option<Vec<bool>>,
    #[serde(default)]
    labels0: Option<Vec<bool>>,
}

impl TryFrom<RawPartition> for TwoSamplePartition {
    type Error = Error;
    fn try_from(raw: RawPartition) -> Result<Self> {
        let part = TwoSamplePartition::new(raw.freq1, raw.freq2, raw.shared)?;
        let (k1, k2, k0) = (part.k1(), part.k2(), part.k0());
        let part = part.with_labels(
            raw.labels1.unwrap_or_else(|| vec![false; k1]),
            raw.labels2.unwrap_or_else(|| vec![false; k2]),
            raw.labels0.unwrap_or_else(|| vec![false; k0]),
        )?;
        for (given, actual, name) in [(raw.n1, part.n1(), "n1"), (raw.n2, part.n2(), "n2")] {
            if let Some(n) = given {
                if n != actual {
                    return Err(Error::InvalidPartition(format!("{name} = {n} but the frequencies sum to {actual}")));
                }
            }
        }
        Ok(part)
    }
}

impl From<TwoSamplePartition> for RawPartition {
    fn from(p: TwoSamplePartition) -> Self {
        RawPartition {
            n1: Some(p.n1()),
            n2: Some(p.n2()),
            freq1: p.freq1,
            freq2: p.freq2,
            shared: p.shared,
            labels1: Some(p.labels1),
            labels2: Some(p.labels2),
            labels0: Some(p.labels0),
        }
    }
}

impl TwoSamplePartition {
    /// A partition with all labels set to the shared measure.
    pub fn new(freq1: Vec<u32>, freq2: Vec<u32>, shared: Vec<(u32, u32)>) -> Result<Self> {
        if freq1.iter().chain(freq2.iter()).any(|&n| n == 0) {
            return Err(Error::InvalidPartition("idiosyncratic cluster with zero frequency".into()));
        }
        if shared.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(Error::InvalidPartition("shared cluster must have positive frequency in both samples".into()));
        }
        if freq1.is_empty() && freq2.is_empty() && shared.is_empty() {
            return Err(Error::InvalidPartition("partition has no clusters".into()));
        }
        Ok(Self {
            labels1: vec![false; freq1.len()],
            labels2: vec![false; freq2.len()],
            labels0: vec![false; shared.len()],
            freq1,
            freq2,
            shared,
        })
    }

    pub fn with_labels(mut self, labels1: Vec<bool>, labels2: Vec<bool>, labels0: Vec<bool>) -> Result<Self> {
        if labels1.len() != self.k1() || labels2.len() != self.k2() || labels0.len() != self.k0() {
            return Err(Error::InvalidPartition(format!(
                "label counts ({}, {}, {}) do not match cluster counts ({}, {}, {})",
                labels1.len(),
                labels2.len(),
                labels0.len(),
                self.k1(),
                self.k2(),
                self.k0()
            )));
        }
        self.labels1 = labels1;
        self.labels2 = labels2;
        self.labels0 = labels0;
        Ok(self)
    }

    pub fn freq1(&self) -> &[u32] {
        &self.freq1
    }

    pub fn freq2(&self) -> &[u32] {
        &self.freq2
    }

    pub fn shared(&self) -> &[(u32, u32)] {
        &self.shared
    }

    pub fn labels1(&self) -> &[bool] {
        &self.labels1
    }

    pub fn labels2(&self) -> &[bool] {
        &self.labels2
    }

    pub fn labels0(&self) -> &[bool] {
        &self.labels0
    }

    pub fn n1(&self) -> u32 {
        self.freq1.iter().sum::<u32>() + self.shared.iter().map(|s| s.0).sum::<u32>()
    }

    pub fn n2(&self) -> u32 {
        self.freq2.iter().sum::<u32>() + self.shared.iter().map(|s| s.1).sum::<u32>()
    }

    pub fn n(&self) -> u32 {
        self.n1() + self.n2()
    }

    pub fn k0(&self) -> usize {
        self.shared.len()
    }

    pub fn k1(&self) -> usize {
        self.freq1.len()
    }

    pub fn k2(&self) -> usize {
        self.freq2.len()
    }

    pub fn k(&self) -> usize {
        self.k0() + self.k1() + self.k2()
    }

    /// Number of label-1 clusters.
    pub fn kbar(&self) -> usize {
        [&self.labels1, &self.labels2, &self.labels0]
            .iter()
            .map(|l| l.iter().filter(|&&b| b).count())
            .sum()
    }

    /// Label-1 cluster count touching a sample.
    pub fn kbar_in(&self, sample: Sample) -> usize {
        let own = match sample {
            Sample::First => &self.labels1,
            Sample::Second => &self.labels2,
        };
        own.iter().chain(self.labels0.iter()).filter(|&&b| b).count()
    }

    /// Label-1 frequency mass within a sample, shared clusters contributing their own-sample part.
    pub fn nbar_in(&self, sample: Sample) -> u32 {
        let (own, labels) = match sample {
            Sample::First => (&self.freq1, &self.labels1),
            Sample::Second => (&self.freq2, &self.labels2),
        };
        let idio: u32 = own.iter().zip(labels).filter(|(_, &b)| b).map(|(n, _)| n).sum();
        let shared: u32 = self
            .shared
            .iter()
            .zip(&self.labels0)
            .filter(|(_, &b)| b)
            .map(|(&(a, b), _)| if sample == Sample::First { a } else { b })
            .sum();
        idio + shared
    }

    /// Frequencies of the pooled sample: idiosyncratic clusters, then shared totals.
    pub fn pooled_freqs(&self) -> Vec<u32> {
        self.freq1
            .iter()
            .chain(self.freq2.iter())
            .copied()
            .chain(self.shared.iter().map(|&(a, b)| a + b))
            .collect()
    }

    /// Own-sample frequencies seen by one sample (idiosyncratic then shared parts).
    pub fn sample_freqs(&self, sample: Sample) -> Vec<u32> {
        match sample {
            Sample::First => self.freq1.iter().copied().chain(self.shared.iter().map(|s| s.0)).collect(),
            Sample::Second => self.freq2.iter().copied().chain(self.shared.iter().map(|s| s.1)).collect(),
        }
    }

    /// The same partition with the roles of the two samples exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            freq1: self.freq2.clone(),
            freq2: self.freq1.clone(),
            shared: self.shared.iter().map(|&(a, b)| (b, a)).collect(),
            labels1: self.labels2.clone(),
            labels2: self.labels1.clone(),
            labels0: self.labels0.clone(),
        }
    }

    /// Clusters sorted within each class, so that equal multisets compare equal.
    pub fn canonical(&self) -> Self {
        fn sort_pairs<T: Ord + Copy>(f: &[T], l: &[bool]) -> (Vec<T>, Vec<bool>) {
            let mut v: Vec<(T, bool)> = f.iter().copied().zip(l.iter().copied()).collect();
            v.sort();
            v.into_iter().unzip()
        }
        let (freq1, labels1) = sort_pairs(&self.freq1, &self.labels1);
        let (freq2, labels2) = sort_pairs(&self.freq2, &self.labels2);
        let (shared, labels0) = sort_pairs(&self.shared, &self.labels0);
        Self {
            freq1,
            freq2,
            shared,
            labels1,
            labels2,
            labels0,
        }
    }

    pub(crate) fn require_two_samples(&self) -> Result<()> {
        if self.n1() == 0 || self.n2() == 0 {
            return Err(Error::InvalidPartition("both samples must be nonempty".into()));
        }
        Ok(())
    }
}

/// Parameters of a latent nested process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LnpParams {
    /// Drives the coincidence probability of the latent measures.
    pub outer: CrmSpec,
    /// Drives the partition factors.
    pub inner: CrmSpec,
    /// Weight of the shared measure; zero gives the plain nested process.
    pub gamma: f64,
}

impl LnpParams {
    pub fn new(outer: CrmSpec, inner: CrmSpec, gamma: f64) -> Result<Self> {
        let p = Self { outer, inner, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::domain(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
