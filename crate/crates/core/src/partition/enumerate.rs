//! Exhaustive enumeration of small two-sample partitions.

use crate::error::{Error, Result};
use crate::partition::TwoSamplePartition;

/// Largest pooled sample size accepted by the enumerator.
pub const MAX_ENUMERATION_SIZE: usize = 8;

/// Every set partition of `{0, ..., n-1}` as a restricted growth string.
pub(crate) fn restricted_growth_strings(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut a = vec![0usize; n];
    let mut max = vec![0usize; n];
    loop {
        out.push(a.clone());
        // advance to the next string in lexicographic order
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            if a[i] <= max[i - 1] {
                a[i] += 1;
                let m = max[i - 1].max(a[i]);
                max[i] = m;
                for j in i + 1..n {
                    a[j] = 0;
                    max[j] = m;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Block sizes of every set partition of an `n`-element set.
#[cfg(test)]
pub(crate) fn set_partitions(n: usize) -> Vec<Vec<u32>> {
    restricted_growth_strings(n)
        .into_iter()
        .map(|rgs| {
            let k = rgs.iter().max().map_or(0, |m| m + 1);
            let mut sizes = vec![0u32; k];
            for b in rgs {
                sizes[b] += 1;
            }
            sizes
        })
        .collect()
}

/// All partitions of `n1` labelled observations from sample 1 and `n2` from sample 2.
///
/// Each set partition of the pooled observations appears once, with blocks classified
/// as idiosyncratic to a sample or shared. Labels are all set to `false`.
pub fn enumerate_two_sample_partitions(n1: usize, n2: usize) -> Result<Vec<TwoSamplePartition>> {
    let n = n1 + n2;
    if n == 0 {
        return Err(Error::domain("enumeration needs at least one observation"));
    }
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::domain(format!(
            "enumeration of n1 + n2 = {n} exceeds the budget of {MAX_ENUMERATION_SIZE}"
        )));
    }
    restricted_growth_strings(n)
        .into_iter()
        .map(|rgs| {
            let k = rgs.iter().max().map_or(0, |m| m + 1);
            let mut counts = vec![(0u32, 0u32); k];
            for (i, b) in rgs.into_iter().enumerate() {
                if i < n1 {
                    counts[b].0 += 1;
                } else {
                    counts[b].1 += 1;
                }
            }
            let freq1 = counts.iter().filter(|c| c.1 == 0).map(|c| c.0).collect();
            let freq2 = counts.iter().filter(|c| c.0 == 0).map(|c| c.1).collect();
            let shared = counts.iter().filter(|c| c.0 > 0 && c.1 > 0).copied().collect();
            TwoSamplePartition::new(freq1, freq2, shared)
        })
        .collect()
}

/// Every labelling of a partition's clusters; with `shared_free == false` shared clusters keep label `false`.
pub fn enumerate_labelings(part: &TwoSamplePartition, shared_free: bool) -> Vec<TwoSamplePartition> {
    let (k1, k2, k0) = (part.k1(), part.k2(), part.k0());
    let bits = k1 + k2 + if shared_free { k0 } else { 0 };
    (0u64..1 << bits)
        .map(|mask| {
            let bit = |i: usize| mask >> i & 1 == 1;
            let l1 = (0..k1).map(bit).collect();
            let l2 = (k1..k1 + k2).map(bit).collect();
            let l0 = if shared_free {
                (k1 + k2..bits).map(bit).collect()
            } else {
                vec![false; k0]
            };
            part.clone()
                .with_labels(l1, l2, l0)
                .expect("label vectors sized from the partition")
        })
        .collect()
}
