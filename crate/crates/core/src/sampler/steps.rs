use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::mixture::base::{NigBase, SuffStats};
use crate::partition::log_sum_exp;
use crate::specialfn::gamma::{ln_beta, ln_pochhammer_pos};
use crate::specialfn::j_integral::{ln_j_integral, JArgs, JMethod};

use super::config::{ChainConfig, Frozen, GammaPrior, UnitPrior};
use super::state::{Cluster, GibbsState, LabelMass};

/// Destination of a reallocated observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Existing(usize),
    New,
}

type JKey = (u32, u32, u32, u32, u32);

/// `ln J(ā₁, ā₂; k)` for integer label masses, memoised for the current `(σ₀, γ)`.
#[derive(Debug, Clone)]
struct JCache {
    sigma0: f64,
    gamma: f64,
    method: JMethod,
    values: HashMap<JKey, f64>,
}

impl JCache {
    fn get(&mut self, sigma0: f64, gamma: f64, lm: [LabelMass; 2], k: usize) -> Result<f64> {
        if sigma0 != self.sigma0 || gamma != self.gamma {
            self.values.clear();
            self.sigma0 = sigma0;
            self.gamma = gamma;
        }
        let key = (lm[0].mass, lm[0].clusters, lm[1].mass, lm[1].clusters, k as u32);
        if let Some(&v) = self.values.get(&key) {
            return Ok(v);
        }
        let v = ln_j(sigma0, gamma, lm, k, &self.method)?;
        self.values.insert(key, v);
        Ok(v)
    }
}

fn ln_j(sigma0: f64, gamma: f64, lm: [LabelMass; 2], k: usize, method: &JMethod) -> Result<f64> {
    let (a1, a2) = (lm[0].exponent(sigma0), lm[1].exponent(sigma0));
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::Invariant(format!("J requested with empty label mass {lm:?}")));
    }
    ln_j_integral(JArgs::new(sigma0, gamma, a1, a2, k as f64), method)
}

fn with(lm: [LabelMass; 2], sample: usize, mass: u32, clusters: u32) -> [LabelMass; 2] {
    let mut out = lm;
    out[sample].mass += mass;
    out[sample].clusters += clusters;
    out
}

/// Index drawn with probability proportional to `exp(ln_w)`.
pub(crate) fn sample_log_weights<R: Rng + ?Sized>(ln_w: &[f64], rng: &mut R) -> Result<usize> {
    let max = ln_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical(format!("no finite weight among {ln_w:?}")));
    }
    let w: Vec<f64> = ln_w.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &wi) in w.iter().enumerate() {
        if u < wi {
            return Ok(i);
        }
        u -= wi;
    }
    Ok(w.iter().rposition(|&v| v > 0.0).expect("some weight is positive"))
}

fn normalise(ln_w: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(ln_w);
    ln_w.iter().map(|&v| (v - lse).exp()).collect()
}

/// The transition kernel of the sampler: priors, tuning and a J-integral cache.
#[derive(Debug, Clone)]
pub struct GibbsKernel {
    base: NigBase,
    kappa_prior: UnitPrior,
    kappa0_prior: UnitPrior,
    gamma_prior: GammaPrior,
    j_method: JMethod,
    sigma0_grid_size: usize,
    gamma_proposal_sd: f64,
    frozen: Frozen,
    cache: JCache,
    #[cfg(test)]
    pub(crate) flip_homogeneity: bool,
}

impl GibbsKernel {
    pub fn new(config: &ChainConfig) -> Self {
        Self {
            base: config.base,
            kappa_prior: config.kappa_prior,
            kappa0_prior: config.kappa0_prior,
            gamma_prior: config.gamma_prior,
            j_method: config.j_method,
            sigma0_grid_size: config.sigma0_grid_size,
            gamma_proposal_sd: config.gamma_proposal_sd,
            frozen: config.frozen,
            cache: JCache {
                sigma0: f64::NAN,
                gamma: f64::NAN,
                method: config.j_method,
                values: HashMap::new(),
            },
            #[cfg(test)]
            flip_homogeneity: false,
        }
    }

    pub fn j_method(&self) -> &JMethod {
        &self.j_method
    }

    /// The base measure at the state's `(m, τ)`.
    pub fn base(&self, state: &GibbsState) -> NigBase {
        self.base.at(state.m, state.tau)
    }

    pub(crate) fn cached_j(&mut self, state: &GibbsState, lm: [LabelMass; 2], k: usize) -> Result<f64> {
        self.cache.get(state.sigma0, state.gamma, lm, k)
    }

    /// Candidate moves and their log weights for an observation already detached from the state.
    fn allocation_weights(&mut self, state: &GibbsState, sample: usize, label: bool, x: f64) -> Result<(Vec<Move>, Vec<f64>)> {
        let s0 = state.sigma0;
        let k = state.k();
        let base = self.base(state);
        let mut moves = Vec::new();
        let mut ln_w = Vec::new();
        let lm = state.label_mass();
        let xl = label as u32;
        let ln_new_common = s0.ln() + (k as f64).ln() + if label { 0.0 } else { state.gamma.ln() } + base.ln_marginal(x);
        if state.homogeneous {
            for (id, c) in state.clusters().filter(|(_, c)| c.label == label) {
                moves.push(Move::Existing(id));
                ln_w.push((c.size() as f64 - s0).ln() + c.value.ln_kernel(x));
            }
            moves.push(Move::New);
            ln_w.push(ln_new_common - state.gamma.ln_1p());
        } else {
            let candidates: Vec<(usize, &Cluster)> = state
                .clusters()
                .filter(|(_, c)| if label { c.label && c.counts[sample] > 0 } else { !c.label })
                .collect();
            if !candidates.is_empty() {
                let ln_j_join = self.cached_j(state, with(lm, sample, 1 - xl, 0), k)?;
                for (id, c) in candidates {
                    moves.push(Move::Existing(id));
                    ln_w.push((c.size() as f64 - s0).ln() + c.value.ln_kernel(x) + ln_j_join);
                }
            }
            moves.push(Move::New);
            ln_w.push(ln_new_common + self.cached_j(state, with(lm, sample, 1 - xl, xl), k + 1)?);
        }
        Ok((moves, ln_w))
    }

    /// Full conditional of the allocation of observation `j` of `sample` (0 or 1), its label held fixed.
    pub fn theta_conditional(&mut self, state: &GibbsState, sample: usize, j: usize) -> Result<Vec<(Move, f64)>> {
        let mut s = state.clone();
        let label = s.detach(sample, j);
        let (moves, ln_w) = self.allocation_weights(&s, sample, label, s.data[sample][j])?;
        Ok(moves.into_iter().zip(normalise(&ln_w)).collect())
    }

    /// Reallocates observation `j` of `sample` to an existing compatible cluster or a fresh one.
    pub fn step_theta<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, sample: usize, j: usize, rng: &mut R) -> Result<()> {
        let x = state.data[sample][j];
        let label = state.detach(sample, j);
        let (moves, ln_w) = self.allocation_weights(state, sample, label, x)?;
        let target = match moves[sample_log_weights(&ln_w, rng)?] {
            Move::Existing(id) => id,
            Move::New => {
                let value = self.base(state).posterior(&SuffStats::of(&[x])).draw(rng);
                state.open_cluster(Cluster {
                    counts: [0, 0],
                    label,
                    value,
                })
            }
        };
        state.attach(sample, j, target);
        Ok(())
    }

    /// Conditional probability that cluster `id` carries label 1.
    pub fn label_probability(&mut self, state: &GibbsState, id: usize) -> Result<f64> {
        let c = *state
            .cluster(id)
            .ok_or_else(|| Error::Invariant(format!("no cluster in slot {id}")))?;
        if state.homogeneous {
            return Ok(1.0 / (1.0 + state.gamma));
        }
        if c.is_shared() {
            return Ok(0.0);
        }
        let own = if c.counts[0] > 0 { 0 } else { 1 };
        let mut rest = state.label_mass();
        if c.label {
            rest[own].clusters -= 1;
        } else {
            rest[own].mass -= c.counts[own];
        }
        let k = state.k();
        let ln_p0 = state.gamma.ln() + self.cached_j(state, with(rest, own, c.counts[own], 0), k)?;
        let ln_p1 = self.cached_j(state, with(rest, own, 0, 1), k)?;
        Ok(normalise(&[ln_p0, ln_p1])[1])
    }

    /// Resamples the label of cluster `id`.
    pub fn step_labels<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, id: usize, rng: &mut R) -> Result<()> {
        let p1 = self.label_probability(state, id)?;
        let label = rng.random::<f64>() < p1;
        let c = state.clusters[id].as_mut().expect("slot checked above");
        if label && c.is_shared() && !state.homogeneous {
            return Err(Error::Invariant(format!("label 1 on shared cluster {id} while I = 0")));
        }
        c.label = label;
        Ok(())
    }

    /// `P(I = 1 | ·)`.
    pub fn homogeneity_probability(&mut self, state: &GibbsState) -> Result<f64> {
        if state.clusters().any(|(_, c)| c.label && c.is_shared()) {
            return Ok(1.0);
        }
        let (n1, n2) = (state.n(0) as f64, state.n(1) as f64);
        let k = state.k();
        let ln_p1 = (-state.sigma).ln_1p() + ln_beta(n1, n2);
        let ln_p0 = state.sigma.ln() + self.cached_j(state, state.label_mass(), k)? + k as f64 * state.gamma.ln_1p();
        #[cfg(test)]
        if self.flip_homogeneity {
            return Ok(normalise(&[ln_p1, ln_p0])[1]);
        }
        Ok(normalise(&[ln_p0, ln_p1])[1])
    }

    pub fn step_homogeneity<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        let p1 = self.homogeneity_probability(state)?;
        state.homogeneous = rng.random::<f64>() < p1;
        Ok(())
    }

    /// Exact draw of `σ` from `κ(σ)[(1-σ)1{I=1} + σ1{I=0}]` for a Beta prior `κ`.
    pub fn step_sigma<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        if self.frozen.sigma {
            return Ok(());
        }
        let (a, b) = self.kappa_prior.beta_params();
        let (a, b) = if state.homogeneous { (a, b + 1.0) } else { (a + 1.0, b) };
        let d = Beta::new(a, b).map_err(|e| Error::Numerical(format!("Beta({a}, {b}): {e}")))?;
        state.sigma = d.sample(rng).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        Ok(())
    }

    /// Unnormalised log conditional density of `σ₀`.
    pub fn ln_sigma0_density(&self, state: &GibbsState, sigma0: f64) -> Result<f64> {
        let k = state.k();
        let mut v = self.kappa0_prior.ln_density(sigma0) + (k as f64 - 1.0) * sigma0.ln();
        for (_, c) in state.clusters() {
            v += ln_pochhammer_pos(1.0 - sigma0, c.size() as u64 - 1);
        }
        if !state.homogeneous {
            v += ln_j(sigma0, state.gamma, state.label_mass(), k, &self.j_method)?;
        }
        Ok(v)
    }

    /// Griddy Gibbs draw of `σ₀`: cell midpoints, then uniform jitter inside the chosen cell.
    pub fn step_sigma0<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        if self.frozen.sigma0 {
            return Ok(());
        }
        let g = self.sigma0_grid_size;
        let ln_d = (0..g)
            .map(|i| self.ln_sigma0_density(state, (i as f64 + 0.5) / g as f64))
            .collect::<Result<Vec<f64>>>()?;
        let cell = sample_log_weights(&ln_d, rng).map_err(|_| {
            Error::Numerical(format!(
                "sigma0 conditional underflows on the whole grid (k = {}, I = {}, gamma = {}, clusters = {:?})",
                state.k(),
                state.homogeneous as u8,
                state.gamma,
                state.clusters().map(|(_, c)| (c.counts, c.label)).collect::<Vec<_>>()
            ))
        })?;
        let s = (cell as f64 + rng.random::<f64>()) / g as f64;
        state.sigma0 = if s > 0.0 && s < 1.0 { s } else { (cell as f64 + 0.5) / g as f64 };
        Ok(())
    }

    /// Unnormalised log conditional density of `γ`.
    pub fn ln_gamma_density(&self, state: &GibbsState, gamma: f64) -> Result<f64> {
        let prior = self.gamma_prior.ln_density(gamma);
        if prior == f64::NEG_INFINITY {
            return Ok(prior);
        }
        let k = state.k();
        let mut v = prior + (k - state.kbar()) as f64 * gamma.ln();
        if state.homogeneous {
            v -= k as f64 * gamma.ln_1p();
        } else {
            v += ln_j(state.sigma0, gamma, state.label_mass(), k, &self.j_method)?;
        }
        Ok(v)
    }

    /// Random-walk Metropolis step on `ln γ`.
    pub fn step_gamma<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        if self.frozen.gamma {
            return Ok(());
        }
        let z: f64 = StandardNormal.sample(rng);
        let proposal = state.gamma * (self.gamma_proposal_sd * z).exp();
        let u: f64 = rng.random();
        if !(proposal > 0.0 && proposal.is_finite()) {
            return Ok(());
        }
        let ln_ratio = self.ln_gamma_density(state, proposal)? - self.ln_gamma_density(state, state.gamma)? + proposal.ln()
            - state.gamma.ln();
        if u.ln() < ln_ratio {
            state.gamma = proposal;
        }
        Ok(())
    }

    /// Draws `τ` and then `m` from their full conditionals.
    pub fn step_hyperparams<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        if self.frozen.base {
            return Ok(());
        }
        let h = self.base.hyper;
        let k = state.k() as f64;
        let quad: f64 = state.clusters().map(|(_, c)| (c.value.mean - state.m).powi(2) / c.value.var).sum();
        let shape = 0.5 * (h.tau_shape + k);
        let rate = 0.5 * (h.tau_rate + quad);
        let precision: f64 = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::Numerical(format!("tau conditional: {e}")))?
            .sample(rng);
        state.tau = 1.0 / precision;
        let mut d = 1.0 / h.mean_var;
        let mut r = h.mean_loc / h.mean_var;
        for (_, c) in state.clusters() {
            d += 1.0 / (state.tau * c.value.var);
            r += c.value.mean / (state.tau * c.value.var);
        }
        let z: f64 = StandardNormal.sample(rng);
        state.m = r / d + z / d.sqrt();
        Ok(())
    }

    /// Redraws every cluster value from its conjugate posterior.
    pub fn accelerate<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        let base = self.base(state);
        let stats = state.member_stats();
        for (id, slot) in state.clusters.iter_mut().enumerate() {
            if let Some(c) = slot {
                c.value = base.posterior(&stats[id]).draw(rng);
            }
        }
        Ok(())
    }

    /// One full sweep in the fixed order: allocations, labels, `I`, `σ`, `σ₀`, `γ`, `(m, τ)`, cluster values.
    pub fn sweep<R: Rng + ?Sized>(&mut self, state: &mut GibbsState, rng: &mut R) -> Result<()> {
        for sample in 0..2 {
            for j in 0..state.n(sample) {
                self.step_theta(state, sample, j, rng)?;
            }
        }
        for id in state.cluster_ids() {
            self.step_labels(state, id, rng)?;
        }
        self.step_homogeneity(state, rng)?;
        self.step_sigma(state, rng)?;
        self.step_sigma0(state, rng)?;
        self.step_gamma(state, rng)?;
        self.step_hyperparams(state, rng)?;
        self.accelerate(state, rng)
    }
}
