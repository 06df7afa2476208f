//! The kernel `J(H1, H2; H) = ∫₀¹ w^(H1-1) (1-w)^(H2-1) [γ + w^σ₀ + (1-w)^σ₀]^(-H) dw`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfn::gamma::ln_beta;
use crate::specialfn::quadrature::{integrate_unit_log, QuadratureSpec};

pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// How `J` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JMethod {
    /// Quadrature when `min(H1, H2) >= 1`, Monte Carlo otherwise.
    Auto { samples: usize, seed: u64 },
    Quadrature,
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for JMethod {
    fn default() -> Self {
        JMethod::Auto {
            samples: DEFAULT_MC_SAMPLES,
            seed: 0,
        }
    }
}

impl JMethod {
    pub fn validate(&self) -> Result<()> {
        match *self {
            JMethod::Auto { samples, .. } | JMethod::MonteCarlo { samples, .. } if samples < 1 => {
                Err(Error::domain("Monte Carlo J needs at least one sample"))
            }
            _ => Ok(()),
        }
    }
}

/// Arguments of `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JArgs {
    pub sigma0: f64,
    pub gamma: f64,
    pub h1: f64,
    pub h2: f64,
    pub h: f64,
}

impl JArgs {
    pub fn new(sigma0: f64, gamma: f64, h1: f64, h2: f64, h: f64) -> Self {
        Self { sigma0, gamma, h1, h2, h }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma0 > 0.0 && self.sigma0 < 1.0) {
            return Err(Error::domain(format!("J needs sigma0 in (0,1), got {}", self.sigma0)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::domain(format!("J needs gamma >= 0, got {}", self.gamma)));
        }
        if !(self.h1 > 0.0) || !(self.h2 > 0.0) || !self.h1.is_finite() || !self.h2.is_finite() {
            return Err(Error::domain(format!("J needs H1, H2 > 0, got ({}, {})", self.h1, self.h2)));
        }
        if !(self.h >= 0.0) || !self.h.is_finite() {
            return Err(Error::domain(format!("J needs H >= 0, got {}", self.h)));
        }
        Ok(())
    }

    #[inline]
    fn ln_denominator(&self, w: f64, wc: f64) -> f64 {
        (self.gamma + w.powf(self.sigma0) + wc.powf(self.sigma0)).ln()
    }
}

/// A Monte Carlo estimate of `J` and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// `ln J` by quadrature.
pub fn ln_j_quadrature(args: JArgs, spec: &QuadratureSpec) -> Result<f64> {
    args.validate()?;
    if args.h == 0.0 {
        return Ok(ln_beta(args.h1, args.h2));
    }
    // the bracket lies in [γ+1, γ+2]; dividing by B(H1,H2)(γ+1)^(-H) leaves a Beta density times a factor in [2^(-H), 1]
    let shift = (args.gamma + 1.0).ln();
    let ln_b = ln_beta(args.h1, args.h2);
    let ln_f = |w: f64, wc: f64, ln_w: f64, ln_wc: f64| {
        (args.h1 - 1.0) * ln_w + (args.h2 - 1.0) * ln_wc - ln_b - args.h * (args.ln_denominator(w, wc) - shift)
    };
    // split at the Beta mode so that a narrow peak sits at an endpoint of each piece
    let c = if args.h1 > 1.0 && args.h2 > 1.0 { (args.h1 - 1.0) / (args.h1 + args.h2 - 2.0) } else { 0.5 };
    let (ln_c, ln_cc) = (c.ln(), (1.0 - c).ln());
    let left = integrate_unit_log(
        |p| {
            let w = c * p.w;
            ln_f(w, (1.0 - c) + c * p.wc, ln_c + p.ln_w, ((1.0 - c) + c * p.wc).ln()) + ln_c
        },
        spec,
    )?;
    let right = integrate_unit_log(
        |p| {
            let wc = (1.0 - c) * p.wc;
            ln_f(c + (1.0 - c) * p.w, wc, (c + (1.0 - c) * p.w).ln(), ln_cc + p.ln_wc) + ln_cc
        },
        spec,
    )?;
    Ok((left.value + right.value).ln() + ln_b - args.h * shift)
}

/// Monte Carlo estimate `B(H1,H2) · mean([γ + W^σ₀ + (1-W)^σ₀]^(-H))`, `W ~ Beta(H1, H2)`.
pub fn j_monte_carlo(args: JArgs, samples: usize, seed: u64) -> Result<McEstimate> {
    let (ln_scale, mean, se) = mc_mean(args, samples, seed)?;
    let scale = ln_scale.exp();
    Ok(McEstimate {
        value: scale * mean,
        std_error: scale * se,
    })
}

/// `(ln B(H1,H2), mean, standard error of the mean)` of the Monte Carlo average.
fn mc_mean(args: JArgs, samples: usize, seed: u64) -> Result<(f64, f64, f64)> {
    args.validate()?;
    if samples < 1 {
        return Err(Error::domain("Monte Carlo J needs at least one sample"));
    }
    let beta = Beta::new(args.h1, args.h2).map_err(|e| Error::domain(format!("Beta({}, {}): {e}", args.h1, args.h2)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let w: f64 = beta.sample(&mut rng);
        let x = (-args.h * args.ln_denominator(w, 1.0 - w)).exp();
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = if samples > 1 { m2 / (samples - 1) as f64 } else { 0.0 };
    Ok((ln_beta(args.h1, args.h2), mean, (var / samples as f64).sqrt()))
}

/// `ln J` with the requested method.
pub fn ln_j_integral(args: JArgs, method: &JMethod) -> Result<f64> {
    method.validate()?;
    match *method {
        JMethod::Quadrature => ln_j_quadrature(args, &QuadratureSpec::default()),
        JMethod::MonteCarlo { samples, seed } => ln_mc(args, samples, seed),
        JMethod::Auto { samples, seed } => {
            if args.h1.min(args.h2) >= 1.0 {
                ln_j_quadrature(args, &QuadratureSpec::default())
            } else {
                ln_mc(args, samples, seed)
            }
        }
    }
}

fn ln_mc(args: JArgs, samples: usize, seed: u64) -> Result<f64> {
    let (ln_b, mean, _) = mc_mean(args, samples, seed)?;
    Ok(ln_b + mean.ln())
}

/// `J(H1, H2; H)` for the stability parameter `sigma0` and shared-measure weight `gamma`.
pub fn j_integral(sigma0: f64, gamma: f64, h1: f64, h2: f64, h: f64, method: &JMethod) -> Result<f64> {
    Ok(ln_j_integral(JArgs::new(sigma0, gamma, h1, h2, h), method)?.exp())
}
