//! Closed forms of the latent nested partition probability for the σ-stable and Dirichlet cases.
//!
//! The stable form sums the labels inside a single integral over `(0, 1)`:
//!
//! ```text
//! σ₀^{k-1} Γ(k) ξ / Γ(N) · [1 - σ + σ γ^{k₀} / B(n₁, n₂) · ∫₀¹ G(w) dw]
//! G(w) = w^{|q₁| + k₁σ₀ - 1} (1-w)^{|q₂| + k₂σ₀ - 1}
//!        Π_j (1 + γ w^{n_{j,1} - σ₀}) Π_i (1 + γ (1-w)^{n_{i,2} - σ₀}) / [γ + w^σ₀ + (1-w)^σ₀]^k
//! ```
//!
//! where `|q_ℓ|` is the shared-cluster mass in sample `ℓ`. Keeping `|q_ℓ|` in the
//! exponents makes the form valid for every partition, including those with
//! `k₁ = 0` or `k₂ = 0`; dropping it reproduces the general evaluator only when no
//! cluster is shared.

use crate::crm::{prior_coincidence, CrmSpec};
use crate::error::{Error, Result};
use crate::partition::{log_sum_exp, Sample, TwoSamplePartition};
use crate::specialfn::gamma::{ln_beta, ln_gamma, ln_pochhammer_pos};
use crate::specialfn::hypergeometric::hyp3f2_at_one;
use crate::specialfn::j_integral::{ln_j_quadrature, JArgs};
use crate::specialfn::quadrature::{integrate_unit_log, QuadratureSpec};

use super::enumerate::enumerate_labelings;
use super::eppf::ln_eppf;

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!("{name} must lie in (0,1), got {x}")));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::domain(format!("gamma must be nonnegative, got {gamma}")));
    }
    Ok(())
}

fn ln_xi_stable(sigma0: f64, part: &TwoSamplePartition) -> f64 {
    part.pooled_freqs()
        .iter()
        .map(|&n| ln_pochhammer_pos(1.0 - sigma0, n as u64 - 1))
        .sum()
}

/// `(k-1) ln σ₀ + ln Γ(k) + ln ξ`, the label-free part of every stable term.
fn ln_stable_core(sigma0: f64, part: &TwoSamplePartition) -> f64 {
    let k = part.k() as f64;
    (k - 1.0) * sigma0.ln() + ln_gamma(k) + ln_xi_stable(sigma0, part)
}

fn shared_mass(part: &TwoSamplePartition, sample: Sample) -> f64 {
    part.shared()
        .iter()
        .map(|&(a, b)| if sample == Sample::First { a } else { b } as f64)
        .sum()
}

/// Arguments `ā₁ = n₁ - n̄₁ + k̄₁σ₀` and `ā₂` of the J-integral for the partition's labels.
pub(crate) fn stable_label_exponents(sigma0: f64, part: &TwoSamplePartition) -> (f64, f64) {
    let a = |s: Sample, n: u32| (n - part.nbar_in(s)) as f64 + part.kbar_in(s) as f64 * sigma0;
    (a(Sample::First, part.n1()), a(Sample::Second, part.n2()))
}

/// `ln I₂(ζ)` for the stable/stable model and the labels stored in `part`.
pub fn ln_stable_label_term(sigma0: f64, gamma: f64, part: &TwoSamplePartition, quad: &QuadratureSpec) -> Result<f64> {
    check_unit("sigma0", sigma0)?;
    check_gamma(gamma)?;
    part.require_two_samples()?;
    if part.labels0().iter().any(|&b| b) {
        return Err(Error::InvalidPartition("shared clusters carry label 0 in the heterogeneous term".into()));
    }
    let k = part.k();
    let unlabelled = (k - part.kbar()) as f64;
    if gamma == 0.0 && unlabelled > 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let (a1, a2) = stable_label_exponents(sigma0, part);
    let ln_j = ln_j_quadrature(JArgs::new(sigma0, gamma, a1, a2, k as f64), quad)?;
    let gamma_part = if unlabelled > 0.0 { unlabelled * gamma.ln() } else { 0.0 };
    Ok(ln_stable_core(sigma0, part) + gamma_part + ln_j - ln_gamma(part.n1() as f64) - ln_gamma(part.n2() as f64))
}

/// Log of the stable latent nested partition probability.
pub(crate) fn ln_peppf_lnp_stable(sigma: f64, sigma0: f64, gamma: f64, part: &TwoSamplePartition, quad: &QuadratureSpec) -> Result<f64> {
    check_unit("sigma", sigma)?;
    check_unit("sigma0", sigma0)?;
    check_gamma(gamma)?;
    part.require_two_samples()?;
    let (n1, n2) = (part.n1() as f64, part.n2() as f64);
    let k = part.k() as f64;
    let ln_prefix = ln_stable_core(sigma0, part) - ln_gamma(n1 + n2);
    let k0 = part.k0() as f64;
    let heterogeneous = if gamma == 0.0 && part.k0() > 0 {
        0.0
    } else {
        let e1 = shared_mass(part, Sample::First) + part.k1() as f64 * sigma0 - 1.0;
        let e2 = shared_mass(part, Sample::Second) + part.k2() as f64 * sigma0 - 1.0;
        let shift = (gamma + 1.0).ln();
        let integral = integrate_unit_log(
            |p| {
                let mut acc = e1 * p.ln_w + e2 * p.ln_wc
                    - k * ((gamma + p.w.powf(sigma0) + p.wc.powf(sigma0)).ln() - shift);
                for &n in part.freq1() {
                    acc += (gamma * ((n as f64 - sigma0) * p.ln_w).exp()).ln_1p();
                }
                for &n in part.freq2() {
                    acc += (gamma * ((n as f64 - sigma0) * p.ln_wc).exp()).ln_1p();
                }
                acc
            },
            quad,
        )?;
        let gamma_part = if k0 > 0.0 { k0 * gamma.ln() } else { 0.0 };
        (sigma.ln() + gamma_part - ln_beta(n1, n2) - k * shift + integral.value.ln()).exp()
    };
    Ok(ln_prefix + (1.0 - sigma + heterogeneous).ln())
}

/// Stable/stable latent nested partition probability in closed form.
pub fn peppf_lnp_stable(sigma: f64, sigma0: f64, gamma: f64, part: &TwoSamplePartition) -> Result<f64> {
    Ok(ln_peppf_lnp_stable(sigma, sigma0, gamma, part, &QuadratureSpec::default())?.exp())
}

/// Log of the joint law of partition, labels and homogeneity indicator for the stable/stable model.
///
/// With `homogeneous == true` labels are independent with `P(label 1) = 1/(1+γ)`; otherwise
/// shared clusters must carry label 0 and the term is `σ I₂(ζ)`.
pub fn ln_labeled_joint_stable(
    sigma: f64,
    sigma0: f64,
    gamma: f64,
    part: &TwoSamplePartition,
    homogeneous: bool,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_unit("sigma", sigma)?;
    check_unit("sigma0", sigma0)?;
    check_gamma(gamma)?;
    if homogeneous {
        let stable = CrmSpec::stable(sigma0)?;
        let k = part.k() as f64;
        let unlabelled = k - part.kbar() as f64;
        let gamma_part = if unlabelled > 0.0 { unlabelled * gamma.ln() } else { 0.0 };
        Ok((1.0 - sigma).ln() + ln_eppf(&stable, &part.pooled_freqs())? + gamma_part - k * gamma.ln_1p())
    } else if part.labels0().iter().any(|&b| b) {
        Ok(f64::NEG_INFINITY)
    } else {
        Ok(sigma.ln() + ln_stable_label_term(sigma0, gamma, part, quad)?)
    }
}

/// `ln I₂(ζ)` for the gamma/gamma (Dirichlet) model and the labels stored in `part`.
pub fn ln_dirichlet_label_term(c0: f64, gamma: f64, part: &TwoSamplePartition) -> Result<f64> {
    check_gamma(gamma)?;
    if !(c0 > 0.0) {
        return Err(Error::domain(format!("c0 must be positive, got {c0}")));
    }
    part.require_two_samples()?;
    if part.labels0().iter().any(|&b| b) {
        return Err(Error::InvalidPartition("shared clusters carry label 0 in the heterogeneous term".into()));
    }
    let k = part.k() as f64;
    let unlabelled = k - part.kbar() as f64;
    if gamma == 0.0 && unlabelled > 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let (n1, n2) = (part.n1(), part.n2());
    let nbar1 = part.nbar_in(Sample::First) as f64;
    let nbar2 = part.nbar_in(Sample::Second) as f64;
    let alpha = (gamma + 1.0) * c0 + n1 as f64 - nbar1;
    let beta = c0 * (2.0 + gamma);
    let a = [c0 + nbar2, alpha, n1 as f64];
    let b = [alpha + n2 as f64, beta + n1 as f64];
    let f = hyp3f2_at_one(a, b).map_err(|e| match e {
        Error::Domain(m) => Error::Convergence {
            message: format!("hypergeometric term diverges for a={a:?}, b={b:?}: {m}"),
            estimate: f64::NAN,
            error_bound: f64::INFINITY,
        },
        other => other,
    })?;
    let ln_xi: f64 = part.pooled_freqs().iter().map(|&n| ln_gamma(n as f64)).sum();
    let gamma_part = if unlabelled > 0.0 { unlabelled * gamma.ln() } else { 0.0 };
    Ok(ln_xi + k * c0.ln() + gamma_part - ln_pochhammer_pos(alpha, n2 as u64) - ln_pochhammer_pos(beta, n1 as u64)
        + f.ln())
}

/// Gamma/gamma (latent nested Dirichlet) partition probability in closed form.
pub fn peppf_lnp_dirichlet(c: f64, c0: f64, gamma: f64, part: &TwoSamplePartition) -> Result<f64> {
    check_gamma(gamma)?;
    let outer = CrmSpec::gamma(c)?;
    let shared_measure = CrmSpec::gamma(c0 * (1.0 + gamma))?;
    part.require_two_samples()?;
    let pi1 = prior_coincidence(&outer);
    let first = ln_eppf(&shared_measure, &part.pooled_freqs())?;
    let labelled: Vec<f64> = enumerate_labelings(part, false)
        .iter()
        .map(|l| ln_dirichlet_label_term(c0, gamma, l))
        .collect::<Result<_>>()?;
    Ok(pi1 * first.exp() + (1.0 - pi1) * log_sum_exp(&labelled).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{enumerate_two_sample_partitions, lnp_general_terms, peppf_nested, LnpParams};
    use approx::assert_relative_eq;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn stable_matches_general() {
        let params = LnpParams::new(CrmSpec::stable(0.5).unwrap(), CrmSpec::stable(0.5).unwrap(), 1.0).unwrap();
        for part in enumerate_two_sample_partitions(2, 2).unwrap() {
            let terms = lnp_general_terms(&params, &part, &quad()).unwrap();
            assert_relative_eq!(peppf_lnp_stable(0.5, 0.5, 1.0, &part).unwrap(), terms.value(), max_relative = 1e-7);
            for (mask, labelled) in enumerate_labelings(&part, false).iter().enumerate() {
                let closed = ln_stable_label_term(0.5, 1.0, labelled, &quad()).unwrap();
                assert_relative_eq!(closed, terms.ln_label_terms[mask], max_relative = 1e-7, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn dirichlet_matches_general() {
        let params = LnpParams::new(CrmSpec::gamma(0.7).unwrap(), CrmSpec::gamma(1.3).unwrap(), 0.6).unwrap();
        for part in enumerate_two_sample_partitions(2, 2).unwrap() {
            let general = lnp_general_terms(&params, &part, &quad()).unwrap().value();
            assert_relative_eq!(peppf_lnp_dirichlet(0.7, 1.3, 0.6, &part).unwrap(), general, max_relative = 1e-7);
        }
    }

    #[test]
    fn dirichlet_first_term_is_ewens_with_inflated_mass() {
        let part = TwoSamplePartition::new(vec![1], vec![], vec![(1, 2)]).unwrap();
        let (c, c0, gamma) = (1.0, 2.0, 0.5);
        let ewens = crate::partition::eppf_full(&CrmSpec::gamma(c0 * (1.0 + gamma)).unwrap(), &part.pooled_freqs()).unwrap();
        let labelled: f64 = enumerate_labelings(&part, false)
            .iter()
            .map(|l| ln_dirichlet_label_term(c0, gamma, l).unwrap().exp())
            .sum();
        let total = peppf_lnp_dirichlet(c, c0, gamma, &part).unwrap();
        assert_relative_eq!(total, 0.5 * ewens + 0.5 * labelled, max_relative = 1e-13);
    }

    #[test]
    fn labeled_joint_sums_to_closed_form() {
        let (s, s0, g) = (0.4, 0.6, 0.9);
        for part in enumerate_two_sample_partitions(2, 1).unwrap() {
            let mut terms = Vec::new();
            for l in enumerate_labelings(&part, true) {
                terms.push(ln_labeled_joint_stable(s, s0, g, &l, true, &quad()).unwrap());
                terms.push(ln_labeled_joint_stable(s, s0, g, &l, false, &quad()).unwrap());
            }
            assert_relative_eq!(log_sum_exp(&terms).exp(), peppf_lnp_stable(s, s0, g, &part).unwrap(), max_relative = 1e-8);
        }
    }

    #[test]
    fn stable_small_gamma_limit() {
        let nested = LnpParams::new(CrmSpec::stable(0.3).unwrap(), CrmSpec::stable(0.6).unwrap(), 0.0).unwrap();
        for part in enumerate_two_sample_partitions(2, 2).unwrap() {
            let a = peppf_lnp_stable(0.3, 0.6, 1e-10, &part).unwrap();
            assert_relative_eq!(a, peppf_nested(&nested, &part).unwrap(), max_relative = 1e-6);
        }
    }

    #[test]
    fn stable_is_permutation_and_swap_invariant() {
        let p = TwoSamplePartition::new(vec![2, 1, 3], vec![1, 2], vec![(1, 1), (2, 1)]).unwrap();
        let q = TwoSamplePartition::new(vec![3, 2, 1], vec![2, 1], vec![(2, 1), (1, 1)]).unwrap();
        let a = peppf_lnp_stable(0.3, 0.45, 2.0, &p).unwrap();
        assert_relative_eq!(a, peppf_lnp_stable(0.3, 0.45, 2.0, &q).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(a, peppf_lnp_stable(0.3, 0.45, 2.0, &p.swapped()).unwrap(), max_relative = 1e-8);
        let d = peppf_lnp_dirichlet(1.0, 0.8, 2.0, &p).unwrap();
        assert_relative_eq!(d, peppf_lnp_dirichlet(1.0, 0.8, 2.0, &p.swapped()).unwrap(), max_relative = 1e-9);
    }
}
