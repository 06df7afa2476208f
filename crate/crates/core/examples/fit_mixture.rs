//! Fits the latent nested mixture to a simulated two-sample scenario and prints
//! the posterior number of components and homogeneity evidence.
//!
//! ```bash
//! cargo run --release --example fit_mixture -- II 4000
//! ```

use lnp::cli::{fit, RunConfig};
use lnp::data::{generate_scenario, Scenario};

fn main() -> lnp::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenario: Scenario = args.next().unwrap_or_else(|| "II".into()).parse()?;
    let iterations: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4000);
    let data = generate_scenario(scenario, 100, 100, 1)?;
    let config = RunConfig {
        iterations,
        burn_in: iterations / 2,
        ..RunConfig::default()
    };
    let result = fit(&data, &config, 7)?;
    let s = &result.summaries;
    let c = &s.components;
    println!("MAP K1 = {}, K2 = {}, K12 = {}", c.map_k1, c.map_k2, c.map_k12);
    println!("P(I=1 | X) = {:.4}", s.posterior_homogeneity);
    println!("Bayes factor = {:.4} ({})", s.bayes_factor.value, s.verdict);

    let d = &result.density;
    println!("{:>8} {:>10} {:>10}", "x", "f1(x)", "f2(x)");
    for i in (0..d.grid.len()).step_by(d.grid.len() / 16) {
        println!("{:>8.2} {:>10.4} {:>10.4}", d.grid[i], d.mean1[i], d.mean2[i]);
    }
    Ok(())
}
