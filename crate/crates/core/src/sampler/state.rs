use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::base::{ClusterValue, SuffStats};
use crate::partition::TwoSamplePartition;

/// One occupied mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Number of members from sample 1 and sample 2.
    pub counts: [u32; 2],
    /// `true` for the idiosyncratic measure (label 1), `false` for the shared one (label 0).
    pub label: bool,
    pub value: ClusterValue,
}

impl Cluster {
    pub fn size(&self) -> u32 {
        self.counts[0] + self.counts[1]
    }

    pub fn is_shared(&self) -> bool {
        self.counts[0] > 0 && self.counts[1] > 0
    }
}

/// Label-0 mass `n_ℓ - n̄_ℓ` and label-1 cluster count `k̄_ℓ` of one sample.
///
/// The J-integral argument of sample `ℓ` is `mass + clusters·σ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelMass {
    pub mass: u32,
    pub clusters: u32,
}

impl LabelMass {
    pub fn exponent(&self, sigma0: f64) -> f64 {
        self.mass as f64 + self.clusters as f64 * sigma0
    }
}

/// Full state of the marginal Gibbs sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState {
    pub(crate) data: [Vec<f64>; 2],
    pub(crate) assign: [Vec<usize>; 2],
    pub(crate) clusters: Vec<Option<Cluster>>,
    pub(crate) free: Vec<usize>,
    /// `I = 1{μ₁ = μ₂}`.
    pub homogeneous: bool,
    pub sigma: f64,
    pub sigma0: f64,
    pub gamma: f64,
    /// Base-measure location `m`.
    pub m: f64,
    /// Base-measure variance multiplier `τ`.
    pub tau: f64,
}

impl GibbsState {
    /// All observations in one label-0 cluster shared by both samples.
    pub fn single_cluster(sample1: Vec<f64>, sample2: Vec<f64>, value: ClusterValue) -> Result<Self> {
        let n1 = sample1.len();
        let n2 = sample2.len();
        if n1 == 0 || n2 == 0 {
            return Err(Error::domain("both samples must be nonempty"));
        }
        Self::from_assignments(
            [sample1, sample2],
            [vec![0; n1], vec![0; n2]],
            vec![(false, value)],
            true,
        )
    }

    /// Builds a state from explicit assignments into `clusters` (label, value).
    ///
    /// Scalar parameters start at `σ = σ₀ = 0.5`, `γ = 1`, `m = 0`, `τ = 1`.
    pub fn from_assignments(
        data: [Vec<f64>; 2],
        assign: [Vec<usize>; 2],
        clusters: Vec<(bool, ClusterValue)>,
        homogeneous: bool,
    ) -> Result<Self> {
        if data[0].len() != assign[0].len() || data[1].len() != assign[1].len() {
            return Err(Error::Invariant("one assignment per observation is required".into()));
        }
        if data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::domain("observations must be finite"));
        }
        let mut slots: Vec<Option<Cluster>> = clusters
            .iter()
            .map(|&(label, value)| Some(Cluster { counts: [0, 0], label, value }))
            .collect();
        for l in 0..2 {
            for &c in &assign[l] {
                let cl = slots
                    .get_mut(c)
                    .and_then(|s| s.as_mut())
                    .ok_or_else(|| Error::Invariant(format!("assignment to unknown cluster {c}")))?;
                cl.counts[l] += 1;
            }
        }
        let state = Self {
            data,
            assign,
            clusters: slots,
            free: Vec::new(),
            homogeneous,
            sigma: 0.5,
            sigma0: 0.5,
            gamma: 1.0,
            m: 0.0,
            tau: 1.0,
        };
        state.check()?;
        Ok(state)
    }

    pub fn data(&self, sample: usize) -> &[f64] {
        &self.data[sample]
    }

    pub fn n(&self, sample: usize) -> usize {
        self.data[sample].len()
    }

    /// Cluster slot of observation `j` of `sample` (0 or 1).
    pub fn assignment(&self, sample: usize, j: usize) -> usize {
        self.assign[sample][j]
    }

    pub fn cluster(&self, id: usize) -> Option<&Cluster> {
        self.clusters.get(id).and_then(|c| c.as_ref())
    }

    /// Occupied clusters with their slot ids, in slot order.
    pub fn clusters(&self) -> impl Iterator<Item = (usize, &Cluster)> {
        self.clusters.iter().enumerate().filter_map(|(i, c)| c.as_ref().map(|c| (i, c)))
    }

    pub(crate) fn cluster_ids(&self) -> Vec<usize> {
        self.clusters().map(|(i, _)| i).collect()
    }

    pub fn k(&self) -> usize {
        self.clusters().count()
    }

    /// `(k₀, k₁, k₂)`: shared clusters and clusters seen only in sample 1 or only in sample 2.
    pub fn class_counts(&self) -> (usize, usize, usize) {
        let mut out = (0, 0, 0);
        for (_, c) in self.clusters() {
            match (c.counts[0] > 0, c.counts[1] > 0) {
                (true, true) => out.0 += 1,
                (true, false) => out.1 += 1,
                _ => out.2 += 1,
            }
        }
        out
    }

    /// Number of label-1 clusters `k̄`.
    pub fn kbar(&self) -> usize {
        self.clusters().filter(|(_, c)| c.label).count()
    }

    pub fn label_mass(&self) -> [LabelMass; 2] {
        let mut out = [LabelMass::default(); 2];
        for (_, c) in self.clusters() {
            for (l, lm) in out.iter_mut().enumerate() {
                if c.label {
                    lm.clusters += (c.counts[l] > 0) as u32;
                } else {
                    lm.mass += c.counts[l];
                }
            }
        }
        out
    }

    /// Sufficient statistics of the members of every slot (empty slots get zero statistics).
    pub fn member_stats(&self) -> Vec<SuffStats> {
        let mut stats = vec![SuffStats::default(); self.clusters.len()];
        for l in 0..2 {
            for (j, &c) in self.assign[l].iter().enumerate() {
                stats[c].push(self.data[l][j]);
            }
        }
        stats
    }

    /// The labelled two-sample partition, with clusters in slot order within each class.
    pub fn partition(&self) -> Result<TwoSamplePartition> {
        let blocks: Vec<([u32; 2], bool)> = self.clusters().map(|(_, c)| (c.counts, c.label)).collect();
        labelled_partition(&blocks)
    }

    /// Verifies memberships, counts and the rule that shared clusters carry label 0 when `I = 0`.
    pub fn check(&self) -> Result<()> {
        if self.data[0].is_empty() || self.data[1].is_empty() {
            return Err(Error::Invariant("both samples must be nonempty".into()));
        }
        let mut counts = vec![[0u32; 2]; self.clusters.len()];
        for l in 0..2 {
            if self.assign[l].len() != self.data[l].len() {
                return Err(Error::Invariant("assignment length differs from sample size".into()));
            }
            for &c in &self.assign[l] {
                if self.cluster(c).is_none() {
                    return Err(Error::Invariant(format!("observation assigned to empty slot {c}")));
                }
                counts[c][l] += 1;
            }
        }
        for (i, slot) in self.clusters.iter().enumerate() {
            match slot {
                Some(c) => {
                    if c.counts != counts[i] || c.size() == 0 {
                        return Err(Error::Invariant(format!(
                            "cluster {i} records counts {:?} but has members {:?}",
                            c.counts, counts[i]
                        )));
                    }
                    if !self.homogeneous && c.label && c.is_shared() {
                        return Err(Error::Invariant(format!("shared cluster {i} has label 1 while I = 0")));
                    }
                    if !(c.value.var > 0.0) {
                        return Err(Error::Invariant(format!("cluster {i} has nonpositive variance")));
                    }
                }
                None => {
                    if !self.free.contains(&i) {
                        return Err(Error::Invariant(format!("empty slot {i} is not on the free list")));
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn open_cluster(&mut self, cluster: Cluster) -> usize {
        match self.free.pop() {
            Some(i) => {
                self.clusters[i] = Some(cluster);
                i
            }
            None => {
                self.clusters.push(Some(cluster));
                self.clusters.len() - 1
            }
        }
    }

    /// Removes observation `j` of `sample` from its cluster, deleting the cluster if it empties.
    /// Returns the label the observation carried.
    pub(crate) fn detach(&mut self, sample: usize, j: usize) -> bool {
        let c = self.assign[sample][j];
        let cl = self.clusters[c].as_mut().expect("assigned slot is occupied");
        cl.counts[sample] -= 1;
        let label = cl.label;
        if cl.size() == 0 {
            self.clusters[c] = None;
            self.free.push(c);
        }
        label
    }

    pub(crate) fn attach(&mut self, sample: usize, j: usize, c: usize) {
        self.clusters[c].as_mut().expect("target slot is occupied").counts[sample] += 1;
        self.assign[sample][j] = c;
    }
}

/// Partition from per-cluster `(counts, label)` pairs, keeping the given order within each class.
pub(crate) fn labelled_partition(blocks: &[([u32; 2], bool)]) -> Result<TwoSamplePartition> {
    let (mut f1, mut f2, mut sh) = (Vec::new(), Vec::new(), Vec::new());
    let (mut l1, mut l2, mut l0) = (Vec::new(), Vec::new(), Vec::new());
    for &(counts, label) in blocks {
        match (counts[0], counts[1]) {
            (0, 0) => return Err(Error::Invariant("empty cluster".into())),
            (a, 0) => {
                f1.push(a);
                l1.push(label);
            }
            (0, b) => {
                f2.push(b);
                l2.push(label);
            }
            (a, b) => {
                sh.push((a, b));
                l0.push(label);
            }
        }
    }
    TwoSamplePartition::new(f1, f2, sh)?.with_labels(l1, l2, l0)
}
