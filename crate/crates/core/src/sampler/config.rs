use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::base::NigBase;
use crate::specialfn::gamma::ln_beta;
use crate::specialfn::j_integral::JMethod;

/// Prior on a parameter in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitPrior {
    #[default]
    Uniform,
    Beta { a: f64, b: f64 },
}

impl UnitPrior {
    pub fn beta_params(&self) -> (f64, f64) {
        match *self {
            UnitPrior::Uniform => (1.0, 1.0),
            UnitPrior::Beta { a, b } => (a, b),
        }
    }

    pub fn ln_density(&self, x: f64) -> f64 {
        let (a, b) = self.beta_params();
        (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)
    }

    /// Prior mean.
    pub fn mean(&self) -> f64 {
        let (a, b) = self.beta_params();
        a / (a + b)
    }

    fn validate(&self, name: &str) -> Result<()> {
        let (a, b) = self.beta_params();
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Config(format!("{name}: Beta parameters must be positive")));
        }
        Ok(())
    }
}

/// Prior on the shared-measure weight `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaPrior {
    Gamma { shape: f64, rate: f64 },
}

impl Default for GammaPrior {
    fn default() -> Self {
        GammaPrior::Gamma { shape: 1.0, rate: 1.0 }
    }
}

impl GammaPrior {
    /// Log density up to an additive constant; `-inf` outside the support.
    pub fn ln_density(&self, x: f64) -> f64 {
        match *self {
            GammaPrior::Gamma { shape, rate } => {
                if x > 0.0 && x.is_finite() {
                    (shape - 1.0) * x.ln() - rate * x
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            GammaPrior::Gamma { shape, rate } if shape > 0.0 && rate > 0.0 => Ok(()),
            _ => Err(Error::Config("gamma_prior: shape and rate must be positive".into())),
        }
    }
}

/// Parameters held fixed at their initial values instead of being updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Frozen {
    pub sigma: bool,
    pub sigma0: bool,
    pub gamma: bool,
    /// The base-measure location `m` and scale multiplier `τ`.
    pub base: bool,
}

/// Starting values of the scalar parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialValues {
    pub sigma: f64,
    pub sigma0: f64,
    pub gamma: f64,
}

impl Default for InitialValues {
    fn default() -> Self {
        Self {
            sigma: 0.5,
            sigma0: 0.5,
            gamma: 1.0,
        }
    }
}

/// A point at which the predictive density of one sample is traced over iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TracePoint {
    /// 1 or 2.
    pub sample: u8,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Total sweeps, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub kappa_prior: UnitPrior,
    pub kappa0_prior: UnitPrior,
    pub gamma_prior: GammaPrior,
    pub j_method: JMethod,
    pub sigma0_grid_size: usize,
    /// Standard deviation of the random-walk proposal on `ln γ`.
    pub gamma_proposal_sd: f64,
    pub density_grid: Vec<f64>,
    pub trace_points: Vec<TracePoint>,
    /// Number of retained density curves kept for pointwise credible bands.
    pub density_snapshots: usize,
    pub base: NigBase,
    pub init: InitialValues,
    pub frozen: Frozen,
}

impl ChainConfig {
    pub fn new(iterations: usize, burn_in: usize, seed: u64, base: NigBase) -> Self {
        Self {
            iterations,
            burn_in,
            seed,
            kappa_prior: UnitPrior::Uniform,
            kappa0_prior: UnitPrior::Uniform,
            gamma_prior: GammaPrior::default(),
            j_method: JMethod::Quadrature,
            sigma0_grid_size: 200,
            gamma_proposal_sd: 0.5,
            density_grid: Vec::new(),
            trace_points: Vec::new(),
            density_snapshots: 2000,
            base,
            init: InitialValues::default(),
            frozen: Frozen::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        self.kappa_prior.validate("kappa_prior")?;
        self.kappa0_prior.validate("kappa0_prior")?;
        self.gamma_prior.validate()?;
        self.j_method.validate()?;
        if self.sigma0_grid_size < 2 {
            return Err(Error::Config("sigma0_grid_size must be at least 2".into()));
        }
        if !(self.gamma_proposal_sd > 0.0) {
            return Err(Error::Config("gamma_proposal_sd must be positive".into()));
        }
        if self.density_grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("density grid must be finite".into()));
        }
        if self.trace_points.iter().any(|t| t.sample != 1 && t.sample != 2) {
            return Err(Error::Config("trace points must refer to sample 1 or 2".into()));
        }
        let InitialValues { sigma, sigma0, gamma } = self.init;
        if !(sigma > 0.0 && sigma < 1.0 && sigma0 > 0.0 && sigma0 < 1.0 && gamma > 0.0) {
            return Err(Error::Config("initial sigma, sigma0 must lie in (0,1) and gamma must be positive".into()));
        }
        self.base.validate()
    }
}
