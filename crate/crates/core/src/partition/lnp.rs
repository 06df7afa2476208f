//! Nested and latent nested partition probabilities from their integral representations.

use crate::crm::prior_coincidence;
use crate::error::{Error, Result};
use crate::partition::eppf::eppf_full;
use crate::partition::{log_sum_exp, LnpParams, Sample, TwoSamplePartition};
use crate::specialfn::gamma::ln_gamma;
use crate::specialfn::quadrature::{integrate_halfline_log, integrate_quadrant_log_vec, QuadrantPoint, QuadratureSpec};

/// Largest `k1 + k2` for which the label sum is expanded term by term.
pub const MAX_LABELLED_CLUSTERS: usize = 20;

/// The two summands of the nested-process partition probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedTerms {
    /// `π₁ Φ(pooled frequencies)`.
    pub joint: f64,
    /// `(1 - π₁) Φ(sample 1) Φ(sample 2)`, exactly zero when a cluster is shared.
    pub product: f64,
}

impl NestedTerms {
    pub fn value(&self) -> f64 {
        self.joint + self.product
    }
}

/// Both terms of the nested-process partition probability (`gamma` is ignored).
pub fn peppf_nested_terms(params: &LnpParams, part: &TwoSamplePartition) -> Result<NestedTerms> {
    part.require_two_samples()?;
    let pi1 = prior_coincidence(&params.outer);
    let joint = pi1 * eppf_full(&params.inner, &part.pooled_freqs())?;
    let product = if part.k0() == 0 {
        (1.0 - pi1)
            * eppf_full(&params.inner, &part.sample_freqs(Sample::First))?
            * eppf_full(&params.inner, &part.sample_freqs(Sample::Second))?
    } else {
        0.0
    };
    Ok(NestedTerms { joint, product })
}

/// Partition probability of the nested process.
pub fn peppf_nested(params: &LnpParams, part: &TwoSamplePartition) -> Result<f64> {
    Ok(peppf_nested_terms(params, part)?.value())
}

/// Decomposition `π₁* T₁ + (1 - π₁*) T₂` of the latent nested partition probability.
#[derive(Debug, Clone, PartialEq)]
pub struct LnpTerms {
    pub pi1: f64,
    /// `ln T₁`, the fully exchangeable term.
    pub ln_t1: f64,
    /// `ln T₂ = ln Σ_ζ I₂(ζ)`.
    pub ln_t2: f64,
    /// `ln I₂(ζ)` indexed by a bit mask: bit `j < k1` is the label of sample-1 cluster `j`,
    /// bit `k1 + i` the label of sample-2 cluster `i`.
    pub ln_label_terms: Vec<f64>,
}

impl LnpTerms {
    pub fn value(&self) -> f64 {
        self.pi1 * self.ln_t1.exp() + (1.0 - self.pi1) * self.ln_t2.exp()
    }
}

/// Evaluates the fully exchangeable term and every labelled double integral by quadrature.
pub fn lnp_general_terms(params: &LnpParams, part: &TwoSamplePartition, quad: &QuadratureSpec) -> Result<LnpTerms> {
    params.validate()?;
    part.require_two_samples()?;
    let (k1, k2) = (part.k1(), part.k2());
    if k1 + k2 > MAX_LABELLED_CLUSTERS {
        return Err(Error::domain(format!(
            "label sum over {} idiosyncratic clusters exceeds the limit of {MAX_LABELLED_CLUSTERS}; use a closed form",
            k1 + k2
        )));
    }
    let inner = &params.inner;
    let c0 = inner.mass();
    let gamma = params.gamma;
    let k = part.k() as f64;
    let (n1, n2) = (part.n1() as f64, part.n2() as f64);
    let n = n1 + n2;
    let pooled = part.pooled_freqs();

    let t1 = integrate_halfline_log(
        |s, ln_s| {
            (n - 1.0) * ln_s - (1.0 + gamma) * c0 * inner.psi(s)
                + pooled.iter().map(|&m| inner.ln_tau(m as u64, s, ln_s)).sum::<f64>()
        },
        quad,
    )?;
    let ln_t1 = k * (c0.ln() + gamma.ln_1p()) - ln_gamma(n) + t1.value.ln();

    let ln_gamma_weight = gamma.ln();
    let dim = 1usize << (k1 + k2);
    let idio: Vec<(u64, bool)> = part
        .freq1()
        .iter()
        .map(|&f| (f as u64, true))
        .chain(part.freq2().iter().map(|&f| (f as u64, false)))
        .collect();
    let mut label1 = vec![0.0; k1 + k2];
    let mut label0 = vec![0.0; k1 + k2];
    let integrals = integrate_quadrant_log_vec(
        |p: &QuadrantPoint, out: &mut [f64]| {
            let mut base = (n1 - 1.0) * p.ln_u + (n2 - 1.0) * p.ln_v
                - c0 * (gamma * inner.psi(p.s) + inner.psi(p.u) + inner.psi(p.v));
            for &(a, b) in part.shared() {
                base += inner.ln_tau((a + b) as u64, p.s, p.ln_s);
            }
            for (j, &(f, first)) in idio.iter().enumerate() {
                label1[j] = if first {
                    inner.ln_tau(f, p.u, p.ln_u)
                } else {
                    inner.ln_tau(f, p.v, p.ln_v)
                };
                label0[j] = ln_gamma_weight + inner.ln_tau(f, p.s, p.ln_s);
            }
            for (mask, slot) in out.iter_mut().enumerate() {
                let mut acc = base;
                for j in 0..idio.len() {
                    acc += if mask >> j & 1 == 1 { label1[j] } else { label0[j] };
                }
                *slot = acc;
            }
        },
        dim,
        quad,
    )?;
    let prefactor = k * c0.ln() + part.k0() as f64 * ln_gamma_weight - ln_gamma(n1) - ln_gamma(n2);
    let ln_label_terms: Vec<f64> = integrals
        .iter()
        .map(|e| if e.value > 0.0 { prefactor + e.value.ln() } else { f64::NEG_INFINITY })
        .collect();
    Ok(LnpTerms {
        pi1: prior_coincidence(&params.outer),
        ln_t1,
        ln_t2: log_sum_exp(&ln_label_terms),
        ln_label_terms,
    })
}

/// Partition probability of the latent nested process from its integral representation.
pub fn peppf_lnp_general(params: &LnpParams, part: &TwoSamplePartition, quad: &QuadratureSpec) -> Result<f64> {
    Ok(lnp_general_terms(params, part, quad)?.value())
}
