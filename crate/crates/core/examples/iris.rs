//! Petal widths of versicolor and virginica: one shared component and one
//! sample-specific component each.
//!
//! ```bash
//! cargo run --release --example iris
//! ```

use lnp::cli::{fit, RunConfig};
use lnp::data::iris_petal_width;

fn main() -> lnp::Result<()> {
    let data = iris_petal_width();
    println!("n1 = {}, n2 = {}", data.sample1.len(), data.sample2.len());
    let config = RunConfig {
        iterations: 4000,
        burn_in: 2000,
        ..RunConfig::default()
    };
    let s = fit(&data, &config, 7)?.summaries;
    let c = &s.components;
    println!("MAP K1 = {}, K2 = {}, shared K12 = {}", c.map_k1, c.map_k2, c.map_k12);
    println!("P(I=1 | X) = {:.4}, verdict: {}", s.posterior_homogeneity, s.verdict);
    Ok(())
}
