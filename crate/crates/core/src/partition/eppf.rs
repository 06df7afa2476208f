//! Exchangeable partition probability functions of a single normalized CRM.

use crate::crm::{CrmFamily, CrmSpec};
use crate::error::{Error, Result};
use crate::specialfn::gamma::{ln_gamma, ln_pochhammer_pos};
use crate::specialfn::quadrature::{integrate_halfline_log, QuadratureSpec};

fn nonzero(freqs: &[u32]) -> Result<Vec<u32>> {
    let kept: Vec<u32> = freqs.iter().copied().filter(|&n| n > 0).collect();
    if kept.is_empty() {
        return Err(Error::domain("EPPF needs at least one positive frequency"));
    }
    Ok(kept)
}

/// `ln Φ(n_1, ..., n_k)` in closed form; zero frequencies are dropped.
pub fn ln_eppf(inner: &CrmSpec, freqs: &[u32]) -> Result<f64> {
    let freqs = nonzero(freqs)?;
    let k = freqs.len() as f64;
    let n: u64 = freqs.iter().map(|&f| f as u64).sum();
    Ok(match inner.family() {
        CrmFamily::Gamma => {
            let c = inner.mass();
            k * c.ln() + freqs.iter().map(|&f| ln_gamma(f as f64)).sum::<f64>() - ln_pochhammer_pos(c, n)
        }
        CrmFamily::Stable => {
            let s = inner.sigma().unwrap_or_default();
            (k - 1.0) * s.ln() + ln_gamma(k)
                + freqs.iter().map(|&f| ln_pochhammer_pos(1.0 - s, f as u64 - 1)).sum::<f64>()
                - ln_gamma(n as f64)
        }
    })
}

/// `Φ(n_1, ..., n_k)`.
pub fn eppf_full(inner: &CrmSpec, freqs: &[u32]) -> Result<f64> {
    Ok(ln_eppf(inner, freqs)?.exp())
}

/// Marginal EPPF of one sample: its idiosyncratic frequencies together with its share of the shared clusters.
pub fn eppf_marginal(inner: &CrmSpec, own_freqs: &[u32], shared_freqs: &[u32]) -> Result<f64> {
    let all: Vec<u32> = own_freqs.iter().chain(shared_freqs).copied().collect();
    eppf_full(inner, &all)
}

/// `Φ` from its integral representation `c^k/Γ(N) ∫ u^{N-1} e^{-c ψ(u)} Π τ_{n_j}(u) du`.
pub fn eppf_quadrature(inner: &CrmSpec, freqs: &[u32], quad: &QuadratureSpec) -> Result<f64> {
    let freqs = nonzero(freqs)?;
    let k = freqs.len() as f64;
    let n: u64 = freqs.iter().map(|&f| f as u64).sum();
    let c = inner.mass();
    let est = integrate_halfline_log(
        |u, ln_u| {
            (n as f64 - 1.0) * ln_u - c * inner.psi(u)
                + freqs.iter().map(|&f| inner.ln_tau(f as u64, u, ln_u)).sum::<f64>()
        },
        quad,
    )?;
    Ok((k * c.ln() - ln_gamma(n as f64)).exp() * est.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::enumerate::set_partitions;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_values() {
        let s = CrmSpec::stable(0.5).unwrap();
        let g = CrmSpec::gamma(1.0).unwrap();
        assert_relative_eq!(eppf_full(&s, &[2]).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(eppf_full(&g, &[1, 1]).unwrap(), 0.5, max_relative = 1e-14);
        assert_eq!(eppf_full(&g, &[1, 0, 1]).unwrap(), eppf_full(&g, &[1, 1]).unwrap());
        assert!(eppf_full(&g, &[]).is_err());
    }

    #[test]
    fn sums_to_one_over_set_partitions() {
        for spec in [CrmSpec::stable(0.5).unwrap(), CrmSpec::gamma(0.7).unwrap()] {
            for n in 1..=6 {
                let total: f64 = set_partitions(n).iter().map(|blocks| eppf_full(&spec, blocks).unwrap()).sum();
                assert_relative_eq!(total, 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn marginal_is_concatenation() {
        let g = CrmSpec::gamma(2.0).unwrap();
        assert_eq!(eppf_marginal(&g, &[2], &[1]).unwrap(), eppf_full(&g, &[2, 1]).unwrap());
        assert_eq!(eppf_marginal(&g, &[2, 3], &[]).unwrap(), eppf_full(&g, &[2, 3]).unwrap());
    }

    #[test]
    fn integral_form_matches_closed_form() {
        let quad = QuadratureSpec::default();
        for spec in [CrmSpec::stable(0.3).unwrap(), CrmSpec::stable(0.8).unwrap(), CrmSpec::gamma(0.5).unwrap(), CrmSpec::gamma(3.0).unwrap()] {
            for freqs in [vec![1], vec![2, 1], vec![3, 1, 4], vec![1, 1, 1, 2]] {
                assert_relative_eq!(
                    eppf_quadrature(&spec, &freqs, &quad).unwrap(),
                    eppf_full(&spec, &freqs).unwrap(),
                    max_relative = 1e-8
                );
            }
        }
    }
}
