//! Command-line front end: `lnp {simulate|fit|test|peppf|diagnose}`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crm::CrmSpec;
use crate::data::{generate_scenario, iris_petal_width, load_csv, Provenance, Scenario, TwoSampleData};
use crate::error::{Error, Result};
use crate::mixture::base::{NigBase, NigHyper};
use crate::mixture::density::{default_grid, DensitySummary};
use crate::mixture::summary::{bayes_factor, component_summaries, pacf, prior_homogeneity, BayesFactor, ComponentTable};
use crate::partition::{
    enumerate_two_sample_partitions, peppf_lnp_dirichlet, peppf_lnp_general, peppf_lnp_stable, peppf_nested_terms,
    LnpParams, TwoSamplePartition,
};
use crate::sampler::{run_chain, ChainConfig, ChainOutput, Frozen, GammaPrior, InitialValues, TracePoint, UnitPrior, CHAIN_CSV_HEADER};
use crate::specialfn::j_integral::JMethod;
use crate::specialfn::quadrature::QuadratureSpec;

#[derive(Debug, Parser)]
#[command(name = "lnp", version, about = "Latent nested nonparametric priors for two-sample data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a simulated two-sample data set.
    Simulate(SimulateArgs),
    /// Run the Gibbs sampler and write chain, density and summary files.
    Fit(FitArgs),
    /// Run the sampler and report the Bayes factor for homogeneity.
    Test(FitArgs),
    /// Evaluate partition probabilities.
    Peppf(PeppfArgs),
    /// Partial autocorrelations and density traces from a finished run.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 100)]
    pub n1: usize,
    #[arg(long, default_value_t = 100)]
    pub n2: usize,
    /// Falls back to LNP_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with header `value,sample`.
    #[arg(long, conflicts_with = "iris", required_unless_present = "iris")]
    pub data: Option<PathBuf>,
    /// Use the embedded Iris petal widths.
    #[arg(long)]
    pub iris: bool,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (required by `fit`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Trace point `sample:x`, repeatable.
    #[arg(long = "trace", value_parser = parse_trace_point)]
    pub trace: Vec<TracePoint>,
    /// Evaluate J by Monte Carlo with this many draws instead of quadrature.
    #[arg(long)]
    pub j_monte_carlo: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Nested,
    General,
    Stable,
    Dirichlet,
    All,
}

#[derive(Debug, Args)]
pub struct PeppfArgs {
    /// Partition JSON file.
    #[arg(long, conflicts_with = "normalize", required_unless_present = "normalize")]
    pub partition: Option<PathBuf>,
    /// Sum every evaluator over all partitions of the given sample sizes.
    #[arg(long, num_args = 2, value_names = ["N1", "N2"])]
    pub normalize: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = Model::All)]
    pub model: Model,
    /// Outer stable parameter (used unless `--c` is given).
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    /// Inner stable parameter (used unless `--c0` is given).
    #[arg(long, default_value_t = 0.5)]
    pub sigma0: f64,
    /// Outer gamma total mass.
    #[arg(long)]
    pub c: Option<f64>,
    /// Inner gamma total mass.
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// chain.csv written by `fit`.
    #[arg(long)]
    pub chain: PathBuf,
    /// trace.csv written by `fit`; needed for `--point`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Density trace to extract, `sample:x`, repeatable.
    #[arg(long = "point", value_parser = parse_trace_point)]
    pub points: Vec<TracePoint>,
    #[arg(long, default_value_t = 30)]
    pub max_lag: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_trace_point(s: &str) -> std::result::Result<TracePoint, String> {
    let (sample, x) = s.split_once(':').ok_or_else(|| format!("expected sample:x, got '{s}'"))?;
    let sample: u8 = sample.parse().map_err(|_| format!("bad sample in '{s}'"))?;
    if sample != 1 && sample != 2 {
        return Err(format!("sample must be 1 or 2 in '{s}'"));
    }
    let x: f64 = x.parse().map_err(|_| format!("bad grid point in '{s}'"))?;
    Ok(TracePoint { sample, x })
}

fn trace_column(t: &TracePoint) -> String {
    format!("s{}_x{}", t.sample, t.x)
}

/// Base-measure settings; unset fields take the defaults for the data set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaseSettings {
    pub shape: Option<f64>,
    pub scale: Option<f64>,
    pub mean: Option<f64>,
    pub tau: Option<f64>,
    pub mean_loc: Option<f64>,
    pub mean_var: Option<f64>,
    pub tau_shape: Option<f64>,
    pub tau_rate: Option<f64>,
}

impl BaseSettings {
    /// `(s₀, S₀) = (1, 1)`, or `(1, 4)` for Iris; `a = m =` pooled mean; `A = 2`; `(w, W) = (1, 100)`; `τ = 100`.
    pub fn resolve(&self, data: &TwoSampleData) -> NigBase {
        let d = NigBase::defaults(data.pooled_mean());
        let default_scale = if data.provenance == Provenance::Iris { 4.0 } else { 1.0 };
        NigBase {
            shape: self.shape.unwrap_or(d.shape),
            scale: self.scale.unwrap_or(default_scale),
            mean: self.mean.unwrap_or(d.mean),
            tau: self.tau.unwrap_or(d.tau),
            hyper: NigHyper {
                mean_loc: self.mean_loc.unwrap_or(d.hyper.mean_loc),
                mean_var: self.mean_var.unwrap_or(d.hyper.mean_var),
                tau_shape: self.tau_shape.unwrap_or(d.hyper.tau_shape),
                tau_rate: self.tau_rate.unwrap_or(d.hyper.tau_rate),
            },
        }
    }
}

fn default_j_method() -> JMethod {
    JMethod::Quadrature
}
fn default_grid_size() -> usize {
    200
}
fn default_proposal_sd() -> f64 {
    0.5
}
fn default_grid_points() -> usize {
    512
}
fn default_snapshots() -> usize {
    2000
}
fn one() -> usize {
    1
}

/// Run configuration read from JSON. `iterations` and `burn_in` are required; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub iterations: usize,
    pub burn_in: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub kappa_prior: UnitPrior,
    #[serde(default)]
    pub kappa0_prior: UnitPrior,
    #[serde(default)]
    pub gamma_prior: GammaPrior,
    #[serde(default = "default_j_method")]
    pub j_method: JMethod,
    #[serde(default = "default_grid_size")]
    pub sigma0_grid_size: usize,
    #[serde(default = "default_proposal_sd")]
    pub gamma_proposal_sd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_grid: Option<Vec<f64>>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub trace_points: Vec<TracePoint>,
    #[serde(default = "default_snapshots")]
    pub density_snapshots: usize,
    #[serde(default)]
    pub base: BaseSettings,
    #[serde(default)]
    pub init: InitialValues,
    #[serde(default)]
    pub frozen: Frozen,
    #[serde(default = "one")]
    pub chains: usize,
}

impl Default for RunConfig {
    /// 50,000 burn-in sweeps followed by 50,000 retained ones.
    fn default() -> Self {
        Self {
            iterations: 100_000,
            burn_in: 50_000,
            seed: None,
            kappa_prior: UnitPrior::Uniform,
            kappa0_prior: UnitPrior::Uniform,
            gamma_prior: GammaPrior::default(),
            j_method: default_j_method(),
            sigma0_grid_size: default_grid_size(),
            gamma_proposal_sd: default_proposal_sd(),
            density_grid: None,
            grid_points: default_grid_points(),
            trace_points: Vec::new(),
            density_snapshots: default_snapshots(),
            base: BaseSettings::default(),
            init: InitialValues::default(),
            frozen: Frozen::default(),
            chains: 1,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Sampler configuration for `data`, with the grid and base defaults filled in.
    pub fn chain_config(&self, data: &TwoSampleData, seed: u64) -> Result<ChainConfig> {
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        let mut c = ChainConfig::new(self.iterations, self.burn_in, seed, self.base.resolve(data));
        c.kappa_prior = self.kappa_prior;
        c.kappa0_prior = self.kappa0_prior;
        c.gamma_prior = self.gamma_prior;
        c.j_method = self.j_method;
        c.sigma0_grid_size = self.sigma0_grid_size;
        c.gamma_proposal_sd = self.gamma_proposal_sd;
        c.density_grid = match &self.density_grid {
            Some(g) => g.clone(),
            None => default_grid(&data.sample1, &data.sample2, self.grid_points),
        };
        c.trace_points = self.trace_points.clone();
        c.density_snapshots = self.density_snapshots;
        c.init = self.init;
        c.frozen = self.frozen;
        c.validate()?;
        Ok(c)
    }

    /// Git-style SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", json.len()));
        h.update(json);
        hex::encode(h.finalize())
    }
}

/// Seed precedence: flag, configuration file, `LNP_SEED`, then 0.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var("LNP_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("LNP_SEED must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

fn header(hash: &str, seed: u64) -> String {
    format!("# config_hash={hash} seed={seed}\n")
}

/// Manifest and results written to `summaries.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summaries {
    pub manifest: Manifest,
    pub components: ComponentTable,
    pub bayes_factor: BayesFactor,
    pub prior_homogeneity: f64,
    pub posterior_homogeneity: f64,
    pub verdict: String,
    pub density_integrals: [f64; 2],
    pub per_chain: Vec<ChainSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub base: NigBase,
    pub config_hash: String,
    pub seed: u64,
    pub chain_seeds: Vec<u64>,
    pub provenance: Provenance,
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub seed: u64,
    pub components: ComponentTable,
    pub bayes_factor: BayesFactor,
}

/// Plain-language reading of a Bayes factor.
pub fn verdict(bf: f64) -> &'static str {
    if bf > 1.0 {
        "evidence for homogeneity"
    } else if bf < 0.01 {
        "reject homogeneity: different distributions"
    } else {
        "weak evidence for different distributions"
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeds of the individual chains: the run seed itself for one chain, derived seeds otherwise.
pub fn chain_seeds(seed: u64, chains: usize) -> Vec<u64> {
    if chains == 1 {
        vec![seed]
    } else {
        (0..chains as u64).map(|c| splitmix(seed.wrapping_add(c))).collect()
    }
}

/// Result of [`fit`]: pooled and per-chain outputs with their summaries.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub outputs: Vec<ChainOutput>,
    pub summaries: Summaries,
    pub density: DensitySummary,
}

/// Runs every chain of a configuration, in parallel when there are several.
pub fn fit(data: &TwoSampleData, config: &RunConfig, seed: u64) -> Result<FitResult> {
    let mut config = config.clone();
    config.seed = Some(seed);
    let seeds = chain_seeds(seed, config.chains);
    let configs = seeds
        .iter()
        .map(|&s| config.chain_config(data, s))
        .collect::<Result<Vec<_>>>()?;
    let outputs: Vec<ChainOutput> = if configs.len() == 1 {
        vec![run_chain(&data.sample1, &data.sample2, &configs[0])?]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = configs
                .iter()
                .map(|c| scope.spawn(move || run_chain(&data.sample1, &data.sample2, c)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("chain thread panicked"))
                .collect::<Result<Vec<_>>>()
        })?
    };
    let records: Vec<_> = outputs.iter().flat_map(|o| o.records.iter().copied()).collect();
    let mut density = outputs[0].density.clone();
    for o in &outputs[1..] {
        density.merge(o.density.clone())?;
    }
    let density = density.summary();
    let components = component_summaries(&records)?;
    let bf = bayes_factor(&records, &config.kappa_prior)?;
    let per_chain = outputs
        .iter()
        .zip(&seeds)
        .map(|(o, &s)| {
            Ok(ChainSummary {
                seed: s,
                components: component_summaries(&o.records)?,
                bayes_factor: bayes_factor(&o.records, &config.kappa_prior)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries = Summaries {
        manifest: Manifest {
            base: configs[0].base,
            config_hash: config.hash(),
            seed,
            chain_seeds: seeds,
            provenance: data.provenance,
            n1: data.sample1.len(),
            n2: data.sample2.len(),
            config,
        },
        components,
        bayes_factor: bf,
        prior_homogeneity: prior_homogeneity(&configs[0].kappa_prior),
        posterior_homogeneity: bf.posterior_homogeneity,
        verdict: verdict(bf.value).to_string(),
        density_integrals: [density.integral(&density.mean1), density.integral(&density.mean2)],
        per_chain,
    };
    Ok(FitResult {
        outputs,
        summaries,
        density,
    })
}

fn chain_csv(output: &ChainOutput, head: &str) -> String {
    let mut s = String::from(head);
    s.push_str(CHAIN_CSV_HEADER);
    s.push('\n');
    for row in output.chain_csv_rows() {
        s.push_str(&row);
        s.push('\n');
    }
    s
}

fn density_csv(d: &DensitySummary, head: &str) -> String {
    let mut s = String::from(head);
    s.push_str("grid,mean1,q05_1,q95_1,mean2,q05_2,q95_2\n");
    for i in 0..d.grid.len() {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            d.grid[i], d.mean1[i], d.band1[i].0, d.band1[i].1, d.mean2[i], d.band2[i].0, d.band2[i].1
        ));
    }
    s
}

fn trace_csv(output: &ChainOutput, head: &str) -> String {
    let mut s = String::from(head);
    s.push_str("iter");
    for t in &output.trace_points {
        s.push(',');
        s.push_str(&trace_column(t));
    }
    s.push('\n');
    for (i, r) in output.records.iter().enumerate() {
        s.push_str(&r.iter.to_string());
        for series in &output.traces {
            s.push_str(&format!(",{}", series[i]));
        }
        s.push('\n');
    }
    s
}

/// Writes chain, density, trace and summary files for a finished fit.
pub fn write_fit(result: &FitResult, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let m = &result.summaries.manifest;
    let head = header(&m.config_hash, m.seed);
    if result.outputs.len() == 1 {
        fs::write(out.join("chain.csv"), chain_csv(&result.outputs[0], &head))?;
    } else {
        let mut pooled = head.clone();
        pooled.push_str(CHAIN_CSV_HEADER);
        pooled.push('\n');
        for (c, o) in result.outputs.iter().enumerate() {
            let h = format!("# config_hash={} seed={} chain={}\n", m.config_hash, m.chain_seeds[c], c + 1);
            fs::write(out.join(format!("chain_{}.csv", c + 1)), chain_csv(o, &h))?;
            for row in o.chain_csv_rows() {
                pooled.push_str(&row);
                pooled.push('\n');
            }
        }
        fs::write(out.join("chain.csv"), pooled)?;
    }
    fs::write(out.join("density.csv"), density_csv(&result.density, &head))?;
    if !result.outputs[0].trace_points.is_empty() {
        fs::write(out.join("trace.csv"), trace_csv(&result.outputs[0], &head))?;
        if result.outputs.len() > 1 {
            for (c, o) in result.outputs.iter().enumerate() {
                let h = format!("# config_hash={} seed={} chain={}\n", m.config_hash, m.chain_seeds[c], c + 1);
                fs::write(out.join(format!("trace_{}.csv", c + 1)), trace_csv(o, &h))?;
            }
        }
    }
    let json = serde_json::to_string_pretty(&result.summaries)?;
    fs::write(out.join("summaries.json"), json + "\n")?;
    Ok(())
}

fn load_data(args: &FitArgs) -> Result<TwoSampleData> {
    match (&args.data, args.iris) {
        (_, true) => Ok(iris_petal_width()),
        (Some(p), false) => load_csv(p),
        (None, false) => Err(Error::Config("either --data or --iris is required".into())),
    }
}

fn run_config(args: &FitArgs) -> Result<(RunConfig, u64)> {
    let mut config = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(n) = args.iterations {
        config.iterations = n;
    }
    if let Some(b) = args.burn_in {
        config.burn_in = b;
    }
    if let Some(c) = args.chains {
        config.chains = c;
    }
    if !args.trace.is_empty() {
        config.trace_points = args.trace.clone();
    }
    if let Some(samples) = args.j_monte_carlo {
        config.j_method = JMethod::MonteCarlo { samples, seed: 0 };
    }
    let seed = resolve_seed(args.seed, config.seed)?;
    config.seed = Some(seed);
    Ok((config, seed))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let scenario: Scenario = args.scenario.parse()?;
    let seed = resolve_seed(args.seed, None)?;
    let data = generate_scenario(scenario, args.n1, args.n2, seed)?;
    let hash = {
        let mut h = Sha256::new();
        let desc = format!("scenario={scenario} n1={} n2={} seed={seed}", args.n1, args.n2);
        h.update(format!("blob {}\0{desc}", desc.len()));
        hex::encode(h.finalize())
    };
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&args.out, header(&hash, seed) + &data.to_csv())?;
    Ok(format!(
        "wrote {} observations to {}\n",
        args.n1 + args.n2,
        args.out.display()
    ))
}

fn fit_report(s: &Summaries) -> String {
    let c = &s.components;
    format!(
        "MAP K1 = {}, MAP K2 = {}, MAP K12 = {}\nP(I=1 | X) = {:.6}\nBayes factor = {} (smoothed {:.6})\n",
        c.map_k1,
        c.map_k2,
        c.map_k12,
        s.posterior_homogeneity,
        fmt_bf(s.bayes_factor.value),
        s.bayes_factor.smoothed
    )
}

fn fmt_bf(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

fn cmd_fit(args: &FitArgs) -> Result<String> {
    let out = args
        .out
        .as_ref()
        .ok_or_else(|| Error::Config("fit needs --out".into()))?;
    let data = load_data(args)?;
    let (config, seed) = run_config(args)?;
    let result = fit(&data, &config, seed)?;
    write_fit(&result, out)?;
    Ok(fit_report(&result.summaries) + &format!("outputs written to {}\n", out.display()))
}

fn cmd_test(args: &FitArgs) -> Result<String> {
    let data = load_data(args)?;
    let (config, seed) = run_config(args)?;
    let result = fit(&data, &config, seed)?;
    if let Some(out) = &args.out {
        write_fit(&result, out)?;
    }
    let s = &result.summaries;
    Ok(format!(
        "Bayes factor: {} (smoothed {:.6})\nprior odds P(I=0)/P(I=1): {}\nP(I=1 | X): {:.6}\nverdict: {}\n",
        fmt_bf(s.bayes_factor.value),
        s.bayes_factor.smoothed,
        s.bayes_factor.prior_odds,
        s.posterior_homogeneity,
        s.verdict
    ))
}

fn params(args: &PeppfArgs) -> Result<LnpParams> {
    let outer = match args.c {
        Some(c) => CrmSpec::gamma(c)?,
        None => CrmSpec::stable(args.sigma)?,
    };
    let inner = match args.c0 {
        Some(c) => CrmSpec::gamma(c)?,
        None => CrmSpec::stable(args.sigma0)?,
    };
    LnpParams::new(outer, inner, args.gamma)
}

/// Values of the requested evaluators on one partition, `None` where the closed form does not apply.
struct Evaluations {
    nested: Option<(f64, f64)>,
    general: Option<f64>,
    stable: Option<f64>,
    dirichlet: Option<f64>,
}

fn evaluate(args: &PeppfArgs, p: &LnpParams, part: &TwoSamplePartition) -> Result<Evaluations> {
    let want = |m: Model| args.model == m || args.model == Model::All;
    let quad = QuadratureSpec::default();
    let nested = if want(Model::Nested) {
        let t = peppf_nested_terms(p, part)?;
        Some((t.value(), t.product))
    } else {
        None
    };
    let general = if want(Model::General) || (args.model == Model::All) {
        Some(peppf_lnp_general(p, part, &quad)?)
    } else {
        None
    };
    let stable = match (p.outer.sigma(), p.inner.sigma()) {
        (Some(s), Some(s0)) if want(Model::Stable) => Some(peppf_lnp_stable(s, s0, p.gamma, part)?),
        _ => None,
    };
    let dirichlet = if want(Model::Dirichlet) && p.outer.sigma().is_none() && p.inner.sigma().is_none() {
        Some(peppf_lnp_dirichlet(p.outer.mass(), p.inner.mass(), p.gamma, part)?)
    } else {
        None
    };
    if args.model == Model::Stable && stable.is_none() {
        return Err(Error::Config("the stable closed form needs --sigma and --sigma0 without --c/--c0".into()));
    }
    if args.model == Model::Dirichlet && dirichlet.is_none() {
        return Err(Error::Config("the Dirichlet closed form needs --c and --c0".into()));
    }
    Ok(Evaluations {
        nested,
        general,
        stable,
        dirichlet,
    })
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn cmd_peppf(args: &PeppfArgs) -> Result<String> {
    let p = params(args)?;
    let mut out = String::new();
    if let Some(sizes) = &args.normalize {
        let parts = enumerate_two_sample_partitions(sizes[0], sizes[1])?;
        let (mut tn, mut tg, mut ts, mut td) = (0.0, 0.0, 0.0, 0.0);
        let (mut ds, mut dd) = (0.0f64, 0.0f64);
        let mut ev = None;
        for part in &parts {
            let e = evaluate(args, &p, part)?;
            tn += e.nested.map_or(0.0, |v| v.0);
            tg += e.general.unwrap_or(0.0);
            ts += e.stable.unwrap_or(0.0);
            td += e.dirichlet.unwrap_or(0.0);
            if let (Some(g), Some(s)) = (e.general, e.stable) {
                ds = ds.max(rel_diff(g, s));
            }
            if let (Some(g), Some(d)) = (e.general, e.dirichlet) {
                dd = dd.max(rel_diff(g, d));
            }
            ev = Some(e);
        }
        out.push_str(&format!("partitions: {}\n", parts.len()));
        if let Some(e) = ev {
            if e.nested.is_some() {
                out.push_str(&format!("total[nested] = {tn:.9}\n"));
            }
            if e.general.is_some() {
                out.push_str(&format!("total[general] = {tg:.9}\n"));
            }
            if e.stable.is_some() {
                out.push_str(&format!("total[stable] = {ts:.9}\n"));
            }
            if e.dirichlet.is_some() {
                out.push_str(&format!("total[dirichlet] = {td:.9}\n"));
            }
            if e.general.is_some() && e.stable.is_some() {
                out.push_str(&format!("max relative difference stable vs general: {ds:.3e}\n"));
            }
            if e.general.is_some() && e.dirichlet.is_some() {
                out.push_str(&format!("max relative difference dirichlet vs general: {dd:.3e}\n"));
            }
        }
        return Ok(out);
    }
    let path = args.partition.as_ref().expect("clap enforces one input");
    let part: TwoSamplePartition = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::InvalidPartition(e.to_string()))?;
    let e = evaluate(args, &p, &part)?;
    let line = |name: &str, v: f64| format!("{name}: log = {:.12}, value = {:.12e}\n", v.ln(), v);
    if let Some((v, product)) = e.nested {
        out.push_str(&line("nested", v));
        out.push_str(&format!("nested second term: {product:e}\n"));
    }
    if let Some(v) = e.general {
        out.push_str(&line("general", v));
    }
    if let Some(v) = e.stable {
        out.push_str(&line("stable", v));
        if let Some(g) = e.general {
            out.push_str(&format!("relative difference stable vs general: {:.3e}\n", rel_diff(g, v)));
        }
    }
    if let Some(v) = e.dirichlet {
        out.push_str(&line("dirichlet", v));
        if let Some(g) = e.general {
            out.push_str(&format!("relative difference dirichlet vs general: {:.3e}\n", rel_diff(g, v)));
        }
    }
    Ok(out)
}

/// A CSV file: comment lines, a header and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut comments = Vec::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                comments.push(c.trim().to_string());
                continue;
            }
            match &columns {
                None => columns = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
                Some(cols) => {
                    let row = line
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<f64>, _>>()
                        .map_err(|e| Error::Parse {
                            line: i + 1,
                            message: e.to_string(),
                        })?;
                    if row.len() != cols.len() {
                        return Err(Error::Parse {
                            line: i + 1,
                            message: format!("expected {} fields, found {}", cols.len(), row.len()),
                        });
                    }
                    rows.push(row);
                }
            }
        }
        let columns = columns.ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        Ok(Self { comments, columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Schema(format!("column '{name}' not found")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<String> {
    let chain = Table::parse(&fs::read_to_string(&args.chain)?)?;
    let head: String = chain.comments.iter().map(|c| format!("# {c}\n")).collect();
    let sigma = pacf(&chain.column("sigma")?, args.max_lag)?;
    let sigma0 = pacf(&chain.column("sigma0")?, args.max_lag)?;
    fs::create_dir_all(&args.out)?;
    let mut s = head.clone();
    s.push_str("lag,sigma,sigma0\n");
    for h in 0..=args.max_lag {
        s.push_str(&format!("{h},{},{}\n", sigma[h], sigma0[h]));
    }
    fs::write(args.out.join("pacf.csv"), s)?;
    let band = 2.0 / (chain.rows.len() as f64).sqrt();
    let mut report = format!("pacf.csv written ({} lags, white-noise band ±{band:.4})\n", args.max_lag);
    if !args.points.is_empty() {
        let path = args
            .trace
            .as_ref()
            .ok_or_else(|| Error::Config("--point needs --trace".into()))?;
        let trace = Table::parse(&fs::read_to_string(path)?)?;
        let iter = trace.column("iter")?;
        let cols = args
            .points
            .iter()
            .map(|p| trace.column(&trace_column(p)))
            .collect::<Result<Vec<_>>>()?;
        let mut s = head;
        s.push_str("iter");
        for p in &args.points {
            s.push(',');
            s.push_str(&trace_column(p));
        }
        s.push('\n');
        for (i, it) in iter.iter().enumerate() {
            s.push_str(&it.to_string());
            for c in &cols {
                s.push_str(&format!(",{}", c[i]));
            }
            s.push('\n');
        }
        fs::write(args.out.join("traces.csv"), s)?;
        report.push_str(&format!("traces.csv written ({} columns)\n", args.points.len()));
    }
    Ok(report)
}

/// Executes a parsed command line, returning the text for standard output.
pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Test(a) => cmd_test(a),
        Command::Peppf(a) => cmd_peppf(a),
        Command::Diagnose(a) => cmd_diagnose(a),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
