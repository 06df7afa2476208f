//! The J integral behind the latent stable weights: quadrature against Monte Carlo.
//!
//! ```bash
//! cargo run --release --example j_integral
//! ```

use lnp::specialfn::j_integral::{j_monte_carlo, ln_j_quadrature, JArgs};
use lnp::specialfn::quadrature::QuadratureSpec;

fn main() -> lnp::Result<()> {
    let quad = QuadratureSpec::default();
    println!("{:>6} {:>6} {:>6} {:>6} {:>6} {:>14} {:>14} {:>10}", "s0", "gamma", "h1", "h2", "k", "quadrature", "monte carlo", "z");
    for (s0, g, h1, h2, k) in [(0.25, 0.1, 1.0, 1.0, 1.0), (0.5, 1.0, 2.5, 1.5, 3.0), (0.75, 5.0, 4.0, 7.0, 10.0)] {
        let args = JArgs::new(s0, g, h1, h2, k);
        let q = ln_j_quadrature(args, &quad)?.exp();
        let mc = j_monte_carlo(args, 100_000, 1)?;
        println!(
            "{s0:>6} {g:>6} {h1:>6} {h2:>6} {k:>6} {q:>14.6e} {:>14.6e} {:>10.2}",
            mc.value,
            (mc.value - q) / mc.std_error
        );
    }
    // masses seen in long chains stay finite on the log scale
    println!("ln J at h1 = 3e5, h2 = 9e4: {:.6}", ln_j_quadrature(JArgs::new(0.5, 1.0, 3e5, 9e4, 40.0), &quad)?);
    Ok(())
}
