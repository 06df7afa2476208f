//! Gaussian mixture components, density estimation and posterior summaries.

pub mod base;
pub mod density;
pub mod summary;

pub use base::{kernel_density, marginal_likelihood, ClusterValue, NigBase, NigHyper, NigPosterior, SuffStats};
pub use density::{default_grid, predictive_density, DensityAccumulator, DensitySummary};
pub use summary::{bayes_factor, component_summaries, pacf, prior_homogeneity, BayesFactor, ComponentTable};
