use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::base::SuffStats;
use crate::mixture::density::{default_grid, predictive_density, DensityAccumulator, DEFAULT_GRID_POINTS};

use super::config::{ChainConfig, TracePoint};
use super::state::GibbsState;
use super::steps::GibbsKernel;

/// Scalar summary of one retained sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// `I`
    pub homogeneous: bool,
    pub k0: usize,
    pub k1: usize,
    pub k2: usize,
    pub sigma: f64,
    pub sigma0: f64,
    pub gamma: f64,
    pub m: f64,
    pub tau: f64,
}

impl IterationRecord {
    pub fn of(iter: usize, state: &GibbsState) -> Self {
        let (k0, k1, k2) = state.class_counts();
        Self {
            iter,
            homogeneous: state.homogeneous,
            k0,
            k1,
            k2,
            sigma: state.sigma,
            sigma0: state.sigma0,
            gamma: state.gamma,
            m: state.m,
            tau: state.tau,
        }
    }
}

pub const CHAIN_CSV_HEADER: &str = "iter,I,k0,k1,k2,sigma,sigma0,gamma,m,tau";

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub records: Vec<IterationRecord>,
    pub density: DensityAccumulator,
    pub trace_points: Vec<TracePoint>,
    /// One series per trace point, aligned with `records`.
    pub traces: Vec<Vec<f64>>,
    pub final_state: GibbsState,
}

impl ChainOutput {
    /// Retained iterations as CSV rows under [`CHAIN_CSV_HEADER`].
    pub fn chain_csv_rows(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.iter, r.homogeneous as u8, r.k0, r.k1, r.k2, r.sigma, r.sigma0, r.gamma, r.m, r.tau
                )
            })
            .collect()
    }
}

fn at_iteration(e: Error, iter: usize) -> Error {
    match e {
        Error::Numerical(m) => Error::Numerical(format!("iteration {iter}: {m}")),
        Error::Invariant(m) => Error::Invariant(format!("iteration {iter}: {m}")),
        Error::Domain(m) => Error::Domain(format!("iteration {iter}: {m}")),
        Error::Convergence {
            message,
            estimate,
            error_bound,
        } => Error::Convergence {
            message: format!("iteration {iter}: {message}"),
            estimate,
            error_bound,
        },
        other => other,
    }
}

/// Starting state: `I = 1` and one label-0 cluster holding every observation.
pub fn initial_state<R: rand::Rng + ?Sized>(sample1: &[f64], sample2: &[f64], config: &ChainConfig, rng: &mut R) -> Result<GibbsState> {
    let all: Vec<f64> = sample1.iter().chain(sample2).copied().collect();
    let value = config.base.posterior(&SuffStats::of(&all)).draw(rng);
    let mut state = GibbsState::single_cluster(sample1.to_vec(), sample2.to_vec(), value)?;
    state.sigma = config.init.sigma;
    state.sigma0 = config.init.sigma0;
    state.gamma = config.init.gamma;
    state.m = config.base.mean;
    state.tau = config.base.tau;
    Ok(state)
}

/// Runs one chain of the marginal Gibbs sampler.
pub fn run_chain(sample1: &[f64], sample2: &[f64], config: &ChainConfig) -> Result<ChainOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = initial_state(sample1, sample2, config, &mut rng)?;
    let mut kernel = GibbsKernel::new(config);
    let grid = if config.density_grid.is_empty() {
        default_grid(sample1, sample2, DEFAULT_GRID_POINTS)
    } else {
        config.density_grid.clone()
    };
    let retained = config.iterations - config.burn_in;
    let stride = retained.div_ceil(config.density_snapshots.max(1)).max(1);
    let mut density = DensityAccumulator::new(grid);
    let mut records = Vec::with_capacity(retained);
    let mut traces = vec![Vec::with_capacity(retained); config.trace_points.len()];
    let trace_grid: [Vec<f64>; 2] = [1u8, 2].map(|s| {
        config.trace_points.iter().filter(|t| t.sample == s).map(|t| t.x).collect()
    });
    for iter in 0..config.iterations {
        kernel.sweep(&mut state, &mut rng).map_err(|e| at_iteration(e, iter))?;
        if iter < config.burn_in {
            continue;
        }
        records.push(IterationRecord::of(iter, &state));
        let base = kernel.base(&state);
        let method = *kernel.j_method();
        let curve = |l: usize| predictive_density(&state, l, &density.grid, &base, &method).map_err(|e| at_iteration(e, iter));
        let curves = [curve(0)?, curve(1)?];
        density.add(curves, (iter - config.burn_in) % stride == 0);
        if !config.trace_points.is_empty() {
            let vals = [0, 1]
                .map(|l| predictive_density(&state, l, &trace_grid[l], &base, &method))
                .into_iter()
                .collect::<Result<Vec<_>>>()
                .map_err(|e| at_iteration(e, iter))?;
            let mut next = [0usize; 2];
            for (series, t) in traces.iter_mut().zip(&config.trace_points) {
                let l = (t.sample - 1) as usize;
                series.push(vals[l][next[l]]);
                next[l] += 1;
            }
        }
    }
    Ok(ChainOutput {
        records,
        density,
        trace_points: config.trace_points.clone(),
        traces,
        final_state: state,
    })
}
