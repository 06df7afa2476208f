use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::base::NigBase;
use crate::partition::log_sum_exp;
use crate::sampler::state::{GibbsState, LabelMass};
use crate::specialfn::j_integral::{ln_j_integral, JArgs, JMethod};

pub const DEFAULT_GRID_POINTS: usize = 512;

/// Equally spaced points over the pooled data range widened by four pooled standard deviations.
pub fn default_grid(sample1: &[f64], sample2: &[f64], points: usize) -> Vec<f64> {
    let all: Vec<f64> = sample1.iter().chain(sample2).copied().collect();
    let n = all.len().max(1) as f64;
    let mean = all.iter().sum::<f64>() / n;
    let var = all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min) - 4.0 * sd;
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 4.0 * sd;
    let points = points.max(2);
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

fn ln_j(state: &GibbsState, lm: [LabelMass; 2], k: usize, method: &JMethod) -> Result<f64> {
    let s0 = state.sigma0;
    ln_j_integral(JArgs::new(s0, state.gamma, lm[0].exponent(s0), lm[1].exponent(s0), k as f64), method)
}

/// Predictive density of a further observation from `sample` (0 or 1) given the state.
///
/// `base` must carry the state's `(m, τ)`. Labels of the hypothetical observation are summed out.
pub fn predictive_density(state: &GibbsState, sample: usize, grid: &[f64], base: &NigBase, method: &JMethod) -> Result<Vec<f64>> {
    if sample > 1 {
        return Err(Error::domain(format!("sample index must be 0 or 1, got {sample}")));
    }
    let s0 = state.sigma0;
    let k = state.k();
    let mut comps = Vec::with_capacity(k);
    let mut ln_w = Vec::with_capacity(k + 1);
    let ln_new;
    if state.homogeneous {
        for (_, c) in state.clusters() {
            comps.push(c.value);
            ln_w.push((c.size() as f64 - s0).ln());
        }
        ln_new = s0.ln() + (k as f64).ln();
    } else {
        let lm = state.label_mass();
        let plus = |mass: u32, clusters: u32| {
            let mut out = lm;
            out[sample].mass += mass;
            out[sample].clusters += clusters;
            out
        };
        let join0 = ln_j(state, plus(1, 0), k, method)?;
        let own_has_label1 = lm[sample].clusters > 0;
        let join1 = if own_has_label1 { ln_j(state, plus(0, 0), k, method)? } else { f64::NEG_INFINITY };
        for (_, c) in state.clusters() {
            let w = if !c.label {
                join0
            } else if c.counts[sample] > 0 {
                join1
            } else {
                continue;
            };
            comps.push(c.value);
            ln_w.push((c.size() as f64 - s0).ln() + w);
        }
        let new0 = state.gamma.ln() + ln_j(state, plus(1, 0), k + 1, method)?;
        let new1 = ln_j(state, plus(0, 1), k + 1, method)?;
        ln_new = s0.ln() + (k as f64).ln() + log_sum_exp(&[new0, new1]);
    }
    ln_w.push(ln_new);
    let lse = log_sum_exp(&ln_w);
    let w: Vec<f64> = ln_w.iter().map(|v| (v - lse).exp()).collect();
    Ok(grid
        .iter()
        .map(|&x| {
            let mut d = w[comps.len()] * base.ln_marginal(x).exp();
            for (c, wi) in comps.iter().zip(&w) {
                d += wi * c.ln_kernel(x).exp();
            }
            d
        })
        .collect())
}

/// Posterior-mean densities of both samples with pointwise 90% credible bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub grid: Vec<f64>,
    pub mean1: Vec<f64>,
    pub mean2: Vec<f64>,
    /// `(5%, 95%)` quantiles per grid point.
    pub band1: Vec<(f64, f64)>,
    pub band2: Vec<(f64, f64)>,
}

impl DensitySummary {
    /// Trapezoid integral of `values` over the grid.
    pub fn integral(&self, values: &[f64]) -> f64 {
        trapezoid(&self.grid, values)
    }
}

pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
        .sum()
}

/// Running sums of predictive curves plus a thinned set of curves for the bands.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DensityAccumulator {
    pub grid: Vec<f64>,
    count: usize,
    sums: [Vec<f64>; 2],
    snapshots: [Vec<Vec<f64>>; 2],
}

impl DensityAccumulator {
    pub fn new(grid: Vec<f64>) -> Self {
        let n = grid.len();
        Self {
            grid,
            count: 0,
            sums: [vec![0.0; n], vec![0.0; n]],
            snapshots: [Vec::new(), Vec::new()],
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, curves: [Vec<f64>; 2], keep: bool) {
        for (l, curve) in curves.into_iter().enumerate() {
            for (s, v) in self.sums[l].iter_mut().zip(&curve) {
                *s += v;
            }
            if keep {
                self.snapshots[l].push(curve);
            }
        }
        self.count += 1;
    }

    /// Combines accumulators built on the same grid.
    pub fn merge(&mut self, other: DensityAccumulator) -> Result<()> {
        if other.grid != self.grid {
            return Err(Error::domain("density accumulators use different grids"));
        }
        for l in 0..2 {
            for (s, v) in self.sums[l].iter_mut().zip(&other.sums[l]) {
                *s += v;
            }
        }
        let [a, b] = other.snapshots;
        self.snapshots[0].extend(a);
        self.snapshots[1].extend(b);
        self.count += other.count;
        Ok(())
    }

    pub fn summary(&self) -> DensitySummary {
        let n = self.count.max(1) as f64;
        let mean = |l: usize| self.sums[l].iter().map(|s| s / n).collect::<Vec<f64>>();
        let band = |l: usize| {
            (0..self.grid.len())
                .map(|i| {
                    let mut col: Vec<f64> = self.snapshots[l].iter().map(|c| c[i]).collect();
                    col.sort_by(f64::total_cmp);
                    (quantile(&col, 0.05), quantile(&col, 0.95))
                })
                .collect::<Vec<_>>()
        };
        DensitySummary {
            grid: self.grid.clone(),
            mean1: mean(0),
            mean2: mean(1),
            band1: band(0),
            band2: band(1),
        }
    }
}

/// Linearly interpolated quantile of sorted values; NaN when empty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
