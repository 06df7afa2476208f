//! Prior probability that two random measures coincide, and that two observations
//! from different samples tie, checked against their closed forms.
//!
//! ```bash
//! cargo run --release --example crm_priors
//! ```

use lnp::crm::{prior_coincidence, prior_coincidence_quadrature, tie_probability, tie_probability_quadrature, CrmSpec};
use lnp::specialfn::quadrature::QuadratureSpec;

fn main() -> lnp::Result<()> {
    let quad = QuadratureSpec::default();
    println!("{:>8} {:>14} {:>14}", "c", "P(coincide)", "quadrature");
    for c in [0.1, 1.0, 10.0] {
        let spec = CrmSpec::gamma(c)?;
        println!("{c:>8} {:>14.10} {:>14.10}", prior_coincidence(&spec), prior_coincidence_quadrature(&spec, &quad)?);
    }
    println!("{:>8} {:>14} {:>14}", "sigma", "P(coincide)", "quadrature");
    for s in [0.25, 0.5, 0.75] {
        let spec = CrmSpec::stable(s)?;
        println!("{s:>8} {:>14.10} {:>14.10}", prior_coincidence(&spec), prior_coincidence_quadrature(&spec, &quad)?);
    }
    let (outer, inner) = (CrmSpec::gamma(1.0)?, CrmSpec::gamma(0.5)?);
    println!(
        "tie probability, gamma(1) over gamma(0.5): {:.10} (quadrature {:.10})",
        tie_probability(&outer, &inner),
        tie_probability_quadrature(&outer, &inner, &quad)?
    );
    Ok(())
}
