//! Completely random measure families and their prior coincidence probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfn::gamma::{ln_gamma, ln_pochhammer_pos};
use crate::specialfn::quadrature::{integrate_halfline_log, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrmFamily {
    /// `ρ(s) = e^{-s}/s`; normalizes to a Dirichlet process.
    Gamma,
    /// `ρ(s) = σ s^{-1-σ}/Γ(1-σ)`; normalizes to a σ-stable process.
    Stable,
}

/// A completely random measure: family, total mass and (stable only) the stability index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCrmSpec", into = "RawCrmSpec")]
pub struct CrmSpec {
    family: CrmFamily,
    mass: f64,
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCrmSpec {
    family: CrmFamily,
    #[serde(default = "one")]
    mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawCrmSpec> for CrmSpec {
    type Error = Error;
    fn try_from(raw: RawCrmSpec) -> Result<Self> {
        CrmSpec::new(raw.family, raw.mass, raw.sigma)
    }
}

impl From<CrmSpec> for RawCrmSpec {
    fn from(s: CrmSpec) -> Self {
        RawCrmSpec {
            family: s.family,
            mass: s.mass,
            sigma: (s.family == CrmFamily::Stable).then_some(s.sigma),
        }
    }
}

impl CrmSpec {
    pub fn new(family: CrmFamily, mass: f64, sigma: Option<f64>) -> Result<Self> {
        match family {
            CrmFamily::Gamma => {
                if sigma.is_some() {
                    return Err(Error::domain("the gamma family takes no stability parameter"));
                }
                Self::gamma(mass)
            }
            CrmFamily::Stable => {
                if mass != 1.0 {
                    return Err(Error::domain(format!(
                        "the stable family has its mass fixed at 1 (it cancels under normalization), got {mass}"
                    )));
                }
                let sigma = sigma.ok_or_else(|| Error::domain("the stable family needs sigma"))?;
                Self::stable(sigma)
            }
        }
    }

    pub fn gamma(mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::domain(format!("gamma CRM mass must be positive, got {mass}")));
        }
        Ok(Self {
            family: CrmFamily::Gamma,
            mass,
            sigma: 0.0,
        })
    }

    pub fn stable(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::domain(format!("stable CRM needs sigma in (0,1), got {sigma}")));
        }
        Ok(Self {
            family: CrmFamily::Stable,
            mass: 1.0,
            sigma,
        })
    }

    pub fn family(&self) -> CrmFamily {
        self.family
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Stability index; `None` for the gamma family.
    pub fn sigma(&self) -> Option<f64> {
        (self.family == CrmFamily::Stable).then_some(self.sigma)
    }

    /// `ψ(u)` without argument checks.
    #[inline]
    pub(crate) fn psi(&self, u: f64) -> f64 {
        match self.family {
            CrmFamily::Gamma => u.ln_1p(),
            CrmFamily::Stable => u.powf(self.sigma),
        }
    }

    /// `ln τ_q(u)` given `ln u`, without argument checks.
    #[inline]
    pub(crate) fn ln_tau(&self, q: u64, u: f64, ln_u: f64) -> f64 {
        if q == 0 {
            return 0.0;
        }
        match self.family {
            CrmFamily::Gamma => ln_gamma(q as f64) - q as f64 * u.ln_1p(),
            CrmFamily::Stable => {
                self.sigma.ln() + ln_pochhammer_pos(1.0 - self.sigma, q - 1) + (self.sigma - q as f64) * ln_u
            }
        }
    }
}

/// Laplace exponent `ψ(u)`.
pub fn laplace_exponent(spec: &CrmSpec, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::domain(format!("Laplace exponent needs u >= 0, got {u}")));
    }
    Ok(spec.psi(u))
}

/// `τ_q(u) = ∫ s^q e^{-us} ρ(s) ds`.
pub fn tau(spec: &CrmSpec, q: i64, u: f64) -> Result<f64> {
    if q < 0 {
        return Err(Error::domain(format!("tau needs q >= 0, got {q}")));
    }
    if !(u > 0.0) {
        return Err(Error::domain(format!("tau needs u > 0, got {u}")));
    }
    Ok(spec.ln_tau(q as u64, u, u.ln()).exp())
}

/// Closed-form probability that two draws from the normalized measure coincide.
pub fn prior_coincidence(spec: &CrmSpec) -> f64 {
    match spec.family {
        CrmFamily::Gamma => 1.0 / (1.0 + spec.mass),
        CrmFamily::Stable => 1.0 - spec.sigma,
    }
}

/// The coincidence probability `c ∫ u e^{-c ψ(u)} τ₂(u) du` by quadrature.
pub fn prior_coincidence_quadrature(spec: &CrmSpec, quad: &QuadratureSpec) -> Result<f64> {
    let c = spec.mass;
    let est = integrate_halfline_log(|u, ln_u| c.ln() + ln_u - c * spec.psi(u) + spec.ln_tau(2, u, ln_u), quad)?;
    Ok(est.value)
}

/// Probability that an observation from each sample takes the same value under the nested process.
pub fn tie_probability(outer: &CrmSpec, inner: &CrmSpec) -> f64 {
    prior_coincidence(outer) * prior_coincidence(inner)
}

/// Tie probability with both coincidence integrals evaluated by quadrature.
pub fn tie_probability_quadrature(outer: &CrmSpec, inner: &CrmSpec, quad: &QuadratureSpec) -> Result<f64> {
    Ok(prior_coincidence_quadrature(outer, quad)? * prior_coincidence_quadrature(inner, quad)?)
}

/// A discretized test of the mixed-moment decomposition.
///
/// Atoms of the nested random measure live in a finite set of cells whose base
/// probabilities are proportional to `cell_weights`; `f1` and `f2` are indicator
/// functionals over those cells.
#[derive(Debug, Clone)]
pub struct MomentTestCase {
    pub cell_weights: Vec<f64>,
    pub f1: Vec<bool>,
    pub f2: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    /// Simulated `E[q(f1) q(f2)]`.
    pub lhs: f64,
    /// `π₁ Q(f1 f2) + (1 - π₁) Q(f1) Q(f2)`.
    pub rhs: f64,
    pub std_error: f64,
    pub residual: f64,
}

const STICK_REMAINDER: f64 = 1e-6;
const MAX_STICKS: usize = 20_000;

/// Compares a truncated stick-breaking simulation of `E[q(f1) q(f2)]` with its
/// convex decomposition into a coincidence term and a product term.
pub fn mixed_moment_decomposition_check(
    outer: &CrmSpec,
    case: &MomentTestCase,
    draws: usize,
    seed: u64,
) -> Result<MomentCheck> {
    let cells = case.cell_weights.len();
    if cells == 0 || case.f1.len() != cells || case.f2.len() != cells || draws == 0 {
        return Err(Error::domain("moment test case needs matching nonempty cells and draws > 0"));
    }
    if case.cell_weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::domain("cell weights must be nonnegative"));
    }
    let total: f64 = case.cell_weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::domain("cell weights must not all vanish"));
    }
    let probs: Vec<f64> = case.cell_weights.iter().map(|w| w / total).collect();
    let q = |f: &[bool]| -> f64 { probs.iter().zip(f).filter(|(_, &b)| b).map(|(p, _)| p).sum() };
    let both: Vec<bool> = case.f1.iter().zip(&case.f2).map(|(a, b)| *a && *b).collect();
    let pi1 = prior_coincidence(outer);
    let rhs = pi1 * q(&both) + (1.0 - pi1) * q(&case.f1) * q(&case.f2);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for d in 0..draws {
        // mass outside each functional's support; q(f) = 1 - miss
        let mut miss1 = 0.0;
        let mut miss2 = 0.0;
        let mut remaining = 1.0;
        let mut i = 0usize;
        loop {
            let weight = if remaining < STICK_REMAINDER || i >= MAX_STICKS {
                remaining
            } else {
                let v: f64 = match outer.family {
                    CrmFamily::Gamma => Beta::new(1.0, outer.mass).map_err(|e| Error::domain(e.to_string()))?.sample(&mut rng),
                    CrmFamily::Stable => Beta::new(1.0 - outer.sigma, (i + 1) as f64 * outer.sigma)
                        .map_err(|e| Error::domain(e.to_string()))?
                        .sample(&mut rng),
                };
                v * remaining
            };
            let cell = sample_cell(&probs, rng.random::<f64>());
            if !case.f1[cell] {
                miss1 += weight;
            }
            if !case.f2[cell] {
                miss2 += weight;
            }
            if weight == remaining {
                break;
            }
            remaining -= weight;
            i += 1;
        }
        let x = (1.0 - miss1) * (1.0 - miss2);
        let delta = x - mean;
        mean += delta / (d + 1) as f64;
        m2 += delta * (x - mean);
    }
    let std_error = if draws > 1 {
        (m2 / (draws - 1) as f64 / draws as f64).sqrt()
    } else {
        0.0
    };
    Ok(MomentCheck {
        lhs: mean,
        rhs,
        std_error,
        residual: (mean - rhs).abs(),
    })
}

fn sample_cell(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
