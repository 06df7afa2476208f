//! Marginal Gibbs sampler for the latent nested σ-stable mixture model.

pub mod chain;
pub mod config;
pub mod state;
pub mod steps;
pub mod validation;

pub use chain::{initial_state, run_chain, ChainOutput, IterationRecord, CHAIN_CSV_HEADER};
pub use config::{ChainConfig, Frozen, GammaPrior, InitialValues, TracePoint, UnitPrior};
pub use state::{Cluster, GibbsState, LabelMass};
pub use steps::{GibbsKernel, Move};
pub use validation::{enumerate_posterior, forward_draw, geweke_joint_test, state_frequencies, GewekeReport, StateFrequencies, StateKey};
