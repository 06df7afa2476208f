//! Correctness harnesses for the sampler: exact enumeration on tiny data and the Geweke joint test.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::base::{NigBase, SuffStats};
use crate::partition::{ln_labeled_joint_stable, log_sum_exp, restricted_growth_strings, MAX_ENUMERATION_SIZE};
use crate::specialfn::quadrature::QuadratureSpec;

use super::config::{ChainConfig, GammaPrior};
use super::state::{labelled_partition, Cluster, GibbsState};
use super::steps::{sample_log_weights, GibbsKernel};

/// Discrete part of a state: block index of every observation (sample 1 first, blocks numbered by
/// first appearance), the label of each block and `I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateKey {
    pub blocks: Vec<u8>,
    pub labels: Vec<bool>,
    pub homogeneous: bool,
}

impl StateKey {
    pub fn of(state: &GibbsState) -> Self {
        let mut seen: Vec<usize> = Vec::new();
        let mut labels = Vec::new();
        let mut blocks = Vec::with_capacity(state.n(0) + state.n(1));
        for l in 0..2 {
            for j in 0..state.n(l) {
                let c = state.assignment(l, j);
                let b = match seen.iter().position(|&s| s == c) {
                    Some(b) => b,
                    None => {
                        seen.push(c);
                        labels.push(state.cluster(c).expect("occupied").label);
                        seen.len() - 1
                    }
                };
                blocks.push(b as u8);
            }
        }
        Self {
            blocks,
            labels,
            homogeneous: state.homogeneous,
        }
    }
}

/// Exact posterior over partitions, labels and `I` given the data, with `σ, σ₀, γ` and the base held fixed.
///
/// Cluster values are integrated out, so each state has weight
/// `joint(partition, labels, I) · Π_blocks ∫ Π h(x; θ) Q₀(dθ)`.
pub fn enumerate_posterior(
    sample1: &[f64],
    sample2: &[f64],
    sigma: f64,
    sigma0: f64,
    gamma: f64,
    base: &NigBase,
) -> Result<Vec<(StateKey, f64)>> {
    let (n1, n2) = (sample1.len(), sample2.len());
    if n1 == 0 || n2 == 0 || n1 + n2 > MAX_ENUMERATION_SIZE {
        return Err(Error::domain(format!(
            "enumeration needs nonempty samples with n1 + n2 <= {MAX_ENUMERATION_SIZE}"
        )));
    }
    let xs: Vec<f64> = sample1.iter().chain(sample2).copied().collect();
    let quad = QuadratureSpec::default();
    let mut keys = Vec::new();
    let mut ln_w = Vec::new();
    for rgs in restricted_growth_strings(n1 + n2) {
        let k = rgs.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![[0u32; 2]; k];
        let mut stats = vec![SuffStats::default(); k];
        for (i, &b) in rgs.iter().enumerate() {
            counts[b][(i >= n1) as usize] += 1;
            stats[b].push(xs[i]);
        }
        let ln_ml: f64 = stats.iter().map(|s| base.ln_marginal_group(s)).sum();
        for mask in 0..(1u32 << k) {
            let labels: Vec<bool> = (0..k).map(|b| mask >> b & 1 == 1).collect();
            let blocks: Vec<([u32; 2], bool)> = counts.iter().copied().zip(labels.iter().copied()).collect();
            let part = labelled_partition(&blocks)?;
            for homogeneous in [false, true] {
                let lj = ln_labeled_joint_stable(sigma, sigma0, gamma, &part, homogeneous, &quad)?;
                if lj == f64::NEG_INFINITY {
                    continue;
                }
                keys.push(StateKey {
                    blocks: rgs.iter().map(|&b| b as u8).collect(),
                    labels: labels.clone(),
                    homogeneous,
                });
                ln_w.push(lj + ln_ml);
            }
        }
    }
    let lse = log_sum_exp(&ln_w);
    Ok(keys.into_iter().zip(ln_w).map(|(k, w)| (k, (w - lse).exp())).collect())
}

/// Visit frequencies of a frozen-parameter chain with batch-means standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFrequencies {
    pub frequencies: HashMap<StateKey, f64>,
    pub std_errors: HashMap<StateKey, f64>,
    pub sweeps: usize,
}

/// Runs `sweeps` sweeps from `state` (after `burn_in` discarded ones) and tabulates the discrete states.
///
/// `keys` lists the states whose standard errors are reported; states outside it are still counted.
pub fn state_frequencies(
    mut state: GibbsState,
    config: &ChainConfig,
    burn_in: usize,
    sweeps: usize,
    batches: usize,
    keys: &[StateKey],
) -> Result<StateFrequencies> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut kernel = GibbsKernel::new(config);
    for _ in 0..burn_in {
        kernel.sweep(&mut state, &mut rng)?;
    }
    let batches = batches.max(2);
    let per_batch = (sweeps / batches).max(1);
    let index: HashMap<&StateKey, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut batch_counts = vec![vec![0u32; keys.len()]; batches];
    let mut counts: HashMap<StateKey, usize> = HashMap::new();
    let total = per_batch * batches;
    for t in 0..total {
        kernel.sweep(&mut state, &mut rng)?;
        let key = StateKey::of(&state);
        if let Some(&i) = index.get(&key) {
            batch_counts[t / per_batch][i] += 1;
        }
        *counts.entry(key).or_insert(0) += 1;
    }
    let frequencies = counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect();
    let std_errors = keys
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let means: Vec<f64> = batch_counts.iter().map(|b| b[i] as f64 / per_batch as f64).collect();
            let m = means.iter().sum::<f64>() / batches as f64;
            let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
            (k.clone(), (var / batches as f64).sqrt())
        })
        .collect();
    Ok(StateFrequencies {
        frequencies,
        std_errors,
        sweeps: total,
    })
}

/// Outcome of the Geweke joint-distribution test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeReport {
    pub statistics: Vec<String>,
    pub forward_mean: Vec<f64>,
    pub successive_mean: Vec<f64>,
    pub z: Vec<f64>,
    pub rounds: usize,
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

pub const GEWEKE_STATISTICS: [&str; 5] = ["k", "I", "sigma", "sigma0", "gamma"];

fn statistics(state: &GibbsState) -> [f64; 5] {
    [
        state.k() as f64,
        state.homogeneous as u8 as f64,
        state.sigma,
        state.sigma0,
        state.gamma,
    ]
}

fn draw_beta<R: Rng + ?Sized>(ab: (f64, f64), rng: &mut R) -> f64 {
    Beta::new(ab.0, ab.1).expect("validated prior").sample(rng)
}

/// Forward draw of every unknown and of data of sizes `n1`, `n2` from the model.
pub fn forward_draw<R: Rng + ?Sized>(config: &ChainConfig, n1: usize, n2: usize, rng: &mut R) -> Result<GibbsState> {
    let f = config.frozen;
    let sigma = if f.sigma { config.init.sigma } else { draw_beta(config.kappa_prior.beta_params(), rng) };
    let sigma0 = if f.sigma0 { config.init.sigma0 } else { draw_beta(config.kappa0_prior.beta_params(), rng) };
    let gamma = if f.gamma {
        config.init.gamma
    } else {
        let GammaPrior::Gamma { shape, rate } = config.gamma_prior;
        Gamma::new(shape, 1.0 / rate).expect("validated prior").sample(rng)
    };
    let h = config.base.hyper;
    let (m, tau) = if f.base {
        (config.base.mean, config.base.tau)
    } else {
        let prec: f64 = Gamma::new(0.5 * h.tau_shape, 2.0 / h.tau_rate).expect("validated").sample(rng);
        let m = Normal::new(h.mean_loc, h.mean_var.sqrt()).expect("validated").sample(rng);
        (m, 1.0 / prec)
    };
    let homogeneous = rng.random::<f64>() < 1.0 - sigma;
    let (blocks, assign) = if homogeneous {
        homogeneous_partition(sigma0, gamma, n1, n2, rng)
    } else {
        heterogeneous_partition(sigma, sigma0, gamma, n1, n2, rng)?
    };
    let base = config.base.at(m, tau);
    let values: Vec<_> = blocks.iter().map(|_| base.draw_prior(rng)).collect();
    let mut data = [vec![0.0; n1], vec![0.0; n2]];
    for l in 0..2 {
        for (j, &c) in assign[l].iter().enumerate() {
            let v = values[c];
            data[l][j] = v.mean + v.var.sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
    }
    let clusters = blocks.iter().zip(values).map(|(&(_, label), v)| (label, v)).collect();
    let mut state = GibbsState::from_assignments(data, assign, clusters, homogeneous)?;
    state.sigma = sigma;
    state.sigma0 = sigma0;
    state.gamma = gamma;
    state.m = m;
    state.tau = tau;
    Ok(state)
}

type Blocks = (Vec<([u32; 2], bool)>, [Vec<usize>; 2]);

/// Pooled stable Chinese-restaurant draw with independent labels, `P(label 1) = 1/(1+γ)`.
fn homogeneous_partition<R: Rng + ?Sized>(sigma0: f64, gamma: f64, n1: usize, n2: usize, rng: &mut R) -> Blocks {
    let mut blocks: Vec<([u32; 2], bool)> = Vec::new();
    let mut assign = [Vec::with_capacity(n1), Vec::with_capacity(n2)];
    for (l, n) in [(0, n1), (1, n2)] {
        for _ in 0..n {
            let mut ln_w: Vec<f64> = blocks
                .iter()
                .map(|(c, _)| (c[0] as f64 + c[1] as f64 - sigma0).ln())
                .collect();
            ln_w.push(if blocks.is_empty() { 0.0 } else { (sigma0 * blocks.len() as f64).ln() });
            let b = sample_log_weights(&ln_w, rng).expect("finite weights");
            if b == blocks.len() {
                blocks.push(([0, 0], rng.random::<f64>() < 1.0 / (1.0 + gamma)));
            }
            blocks[b].0[l] += 1;
            assign[l].push(b);
        }
    }
    (blocks, assign)
}

/// Draw under `I = 0`: an exact draw for one observation per sample, then sequential additions
/// with probabilities given by ratios of the labelled joint law.
fn heterogeneous_partition<R: Rng + ?Sized>(
    sigma: f64,
    sigma0: f64,
    gamma: f64,
    n1: usize,
    n2: usize,
    rng: &mut R,
) -> Result<Blocks> {
    let quad = QuadratureSpec::default();
    let ln_joint = |blocks: &[([u32; 2], bool)]| -> Result<f64> {
        ln_labeled_joint_stable(sigma, sigma0, gamma, &labelled_partition(blocks)?, false, &quad)
    };
    let starts: Vec<Vec<([u32; 2], bool)>> = vec![
        vec![([1, 1], false)],
        vec![([1, 0], false), ([0, 1], false)],
        vec![([1, 0], false), ([0, 1], true)],
        vec![([1, 0], true), ([0, 1], false)],
        vec![([1, 0], true), ([0, 1], true)],
    ];
    let ln_w = starts.iter().map(|b| ln_joint(b)).collect::<Result<Vec<f64>>>()?;
    let mut blocks = starts[sample_log_weights(&ln_w, rng)?].clone();
    let mut assign = [vec![0usize], vec![if blocks.len() == 1 { 0 } else { 1 }]];
    for (l, n) in [(0, n1), (1, n2)] {
        for _ in 1..n {
            let mut options: Vec<Vec<([u32; 2], bool)>> = Vec::new();
            let mut targets = Vec::new();
            for (b, &(c, label)) in blocks.iter().enumerate() {
                if label && c[1 - l] > 0 {
                    continue;
                }
                let mut next = blocks.clone();
                next[b].0[l] += 1;
                options.push(next);
                targets.push(b);
            }
            for label in [false, true] {
                let mut next = blocks.clone();
                let mut c = [0, 0];
                c[l] = 1;
                next.push((c, label));
                options.push(next);
                targets.push(blocks.len());
            }
            let ln_w = options.iter().map(|b| ln_joint(b)).collect::<Result<Vec<f64>>>()?;
            let pick = sample_log_weights(&ln_w, rng)?;
            assign[l].push(targets[pick]);
            blocks = options.swap_remove(pick);
        }
    }
    Ok((blocks, assign))
}

fn regenerate_data<R: Rng + ?Sized>(state: &mut GibbsState, rng: &mut R) {
    for l in 0..2 {
        for j in 0..state.n(l) {
            let c: Cluster = *state.cluster(state.assignment(l, j)).expect("occupied");
            state.data[l][j] = c.value.mean + c.value.var.sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
    }
}

/// Compares `(k, I, σ, σ₀, γ)` under forward simulation against successive-conditional simulation.
///
/// Forward draws are independent; the successive-conditional standard errors use batch means.
pub fn geweke_joint_test(config: &ChainConfig, n1: usize, n2: usize, rounds: usize) -> Result<GewekeReport> {
    config.validate()?;
    geweke_with_kernel(config, GibbsKernel::new(config), n1, n2, rounds)
}

pub(crate) fn geweke_with_kernel(config: &ChainConfig, mut kernel: GibbsKernel, n1: usize, n2: usize, rounds: usize) -> Result<GewekeReport> {
    if n1 == 0 || n2 == 0 || rounds < 100 {
        return Err(Error::domain("Geweke test needs nonempty samples and at least 100 rounds"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let d = GEWEKE_STATISTICS.len();
    let mut fwd_sum = [0.0; 5];
    let mut fwd_sq = [0.0; 5];
    for _ in 0..rounds {
        let s = statistics(&forward_draw(config, n1, n2, &mut rng)?);
        for i in 0..d {
            fwd_sum[i] += s[i];
            fwd_sq[i] += s[i] * s[i];
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut state = forward_draw(config, n1, n2, &mut rng)?;
    let batches = 100usize;
    let per_batch = rounds / batches;
    let mut batch_means = vec![[0.0; 5]; batches];
    for t in 0..per_batch * batches {
        kernel.sweep(&mut state, &mut rng)?;
        regenerate_data(&mut state, &mut rng);
        let s = statistics(&state);
        for i in 0..d {
            batch_means[t / per_batch][i] += s[i] / per_batch as f64;
        }
    }
    let n = rounds as f64;
    let mut report = GewekeReport {
        statistics: GEWEKE_STATISTICS.iter().map(|s| s.to_string()).collect(),
        forward_mean: Vec::new(),
        successive_mean: Vec::new(),
        z: Vec::new(),
        rounds,
    };
    let f = config.frozen;
    let fixed = [false, false, f.sigma, f.sigma0, f.gamma];
    for i in 0..d {
        let fm = fwd_sum[i] / n;
        let fvar = (fwd_sq[i] / n - fm * fm).max(0.0) / (n - 1.0);
        let sm = batch_means.iter().map(|b| b[i]).sum::<f64>() / batches as f64;
        let svar = batch_means.iter().map(|b| (b[i] - sm).powi(2)).sum::<f64>() / ((batches - 1) * batches) as f64;
        let se = (fvar + svar).sqrt();
        report.forward_mean.push(fm);
        report.successive_mean.push(sm);
        report.z.push(if se > 0.0 && !fixed[i] { (fm - sm) / se } else { 0.0 });
    }
    Ok(report)
}
