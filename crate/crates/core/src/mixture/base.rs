//! Gaussian kernel with a normal/inverse-gamma base measure.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfn::gamma::ln_gamma;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Mean and variance of one mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterValue {
    pub mean: f64,
    pub var: f64,
}

impl ClusterValue {
    pub fn new(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) || !mean.is_finite() || !var.is_finite() {
            return Err(Error::domain(format!("cluster value needs finite mean and positive variance, got ({mean}, {var})")));
        }
        Ok(Self { mean, var })
    }

    #[inline]
    pub(crate) fn ln_kernel(&self, x: f64) -> f64 {
        let z = x - self.mean;
        -LN_SQRT_2PI - 0.5 * self.var.ln() - 0.5 * z * z / self.var
    }
}

/// Hyperpriors `m ~ N(a, A)` and `τ⁻¹ ~ Gamma(w/2, rate W/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NigHyper {
    /// `a`
    pub mean_loc: f64,
    /// `A`
    pub mean_var: f64,
    /// `w`
    pub tau_shape: f64,
    /// `W`
    pub tau_rate: f64,
}

/// `V ~ IG(s₀, S₀)`, `M | V ~ N(m, τV)`, with hyperpriors on `m` and `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NigBase {
    /// `s₀`
    pub shape: f64,
    /// `S₀`
    pub scale: f64,
    /// `m`
    pub mean: f64,
    /// `τ`
    pub tau: f64,
    pub hyper: NigHyper,
}

impl NigBase {
    /// Defaults used for simulated data: `(s₀, S₀) = (1, 1)`, `A = 2`, `(w, W) = (1, 100)`, `a = m = data_mean`.
    pub fn defaults(data_mean: f64) -> Self {
        Self {
            shape: 1.0,
            scale: 1.0,
            mean: data_mean,
            tau: 100.0,
            hyper: NigHyper {
                mean_loc: data_mean,
                mean_var: 2.0,
                tau_shape: 1.0,
                tau_rate: 100.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("shape", self.shape),
            ("scale", self.scale),
            ("tau", self.tau),
            ("hyper.mean_var", self.hyper.mean_var),
            ("hyper.tau_shape", self.hyper.tau_shape),
            ("hyper.tau_rate", self.hyper.tau_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("base measure {name} must be positive, got {v}")));
            }
        }
        if !self.mean.is_finite() || !self.hyper.mean_loc.is_finite() {
            return Err(Error::Config("base measure locations must be finite".into()));
        }
        Ok(())
    }

    /// The same base with the given `(m, τ)`.
    pub fn at(&self, mean: f64, tau: f64) -> Self {
        Self { mean, tau, ..*self }
    }

    /// `ln ∫ h(x; θ) Q₀(dθ)`: Student-t with `2s₀` degrees of freedom, location `m`, squared scale `S₀(1+τ)/s₀`.
    pub fn ln_marginal(&self, x: f64) -> f64 {
        let nu = 2.0 * self.shape;
        let scale2 = self.scale * (1.0 + self.tau) / self.shape;
        let z2 = (x - self.mean).powi(2) / scale2;
        ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * std::f64::consts::PI * scale2).ln()
            - 0.5 * (nu + 1.0) * (z2 / nu).ln_1p()
    }

    /// Log marginal likelihood of a group of observations sharing one component.
    pub fn ln_marginal_group(&self, stats: &SuffStats) -> f64 {
        let post = self.posterior(stats);
        let lambda0 = 1.0 / self.tau;
        ln_gamma(post.shape) - ln_gamma(self.shape) + self.shape * self.scale.ln() - post.shape * post.scale.ln()
            + 0.5 * (lambda0 / post.precision).ln()
            - stats.n as f64 * LN_SQRT_2PI
    }

    /// Conjugate posterior parameters given the sufficient statistics of a group.
    pub fn posterior(&self, stats: &SuffStats) -> NigPosterior {
        let lambda0 = 1.0 / self.tau;
        let n = stats.n as f64;
        let precision = lambda0 + n;
        if stats.n == 0 {
            return NigPosterior {
                shape: self.shape,
                scale: self.scale,
                mean: self.mean,
                precision,
            };
        }
        let xbar = stats.sum / n;
        let ss = (stats.sum_sq - n * xbar * xbar).max(0.0);
        NigPosterior {
            shape: self.shape + 0.5 * n,
            scale: self.scale + 0.5 * (ss + lambda0 * n * (xbar - self.mean).powi(2) / precision),
            mean: (lambda0 * self.mean + stats.sum) / precision,
            precision,
        }
    }

    /// Draws a component from the base measure itself.
    pub fn draw_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> ClusterValue {
        self.posterior(&SuffStats::default()).draw(rng)
    }
}

/// Sufficient statistics of a group of observations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SuffStats {
    pub n: u32,
    pub sum: f64,
    pub sum_sq: f64,
}

impl SuffStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn of(xs: &[f64]) -> Self {
        let mut s = Self::default();
        xs.iter().for_each(|&x| s.push(x));
        s
    }
}

/// `V ~ IG(shape, scale)`, `M | V ~ N(mean, V / precision)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigPosterior {
    pub shape: f64,
    pub scale: f64,
    pub mean: f64,
    pub precision: f64,
}

impl NigPosterior {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ClusterValue {
        let g: f64 = Gamma::new(self.shape, 1.0 / self.scale)
            .expect("posterior shape and scale are positive")
            .sample(rng);
        let var = (1.0 / g).max(f64::MIN_POSITIVE);
        let sd = (var / self.precision).sqrt();
        let mean = self.mean + sd * Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
        ClusterValue { mean, var }
    }
}

/// Normal density `h(x; M, V)`.
pub fn kernel_density(theta: &ClusterValue, x: f64) -> Result<f64> {
    if !(theta.var > 0.0) {
        return Err(Error::domain(format!("kernel variance must be positive, got {}", theta.var)));
    }
    Ok(theta.ln_kernel(x).exp())
}

/// `∫ h(x; θ) Q₀(dθ)` under the normal/inverse-gamma base.
pub fn marginal_likelihood(base: &NigBase, x: f64) -> f64 {
    base.ln_marginal(x).exp()
}
