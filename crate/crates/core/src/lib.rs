//! Latent nested nonparametric priors for two-sample problems.

pub mod cli;
pub mod crm;
pub mod data;
pub mod error;
pub mod mixture;
pub mod partition;
pub mod sampler;
pub mod specialfn;

pub use error::{Error, Result};
